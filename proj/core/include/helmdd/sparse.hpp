#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "helmdd/common.hpp"

namespace helmdd {

/// General complex sparse matrix in compressed-row storage.
/// Column indices are sorted and unique within each row.
class SparseComplexMatrix {
  public:
    SparseComplexMatrix() = default;
    SparseComplexMatrix(int rows, int cols, std::vector<std::int64_t> row_start,
                        std::vector<int> col, std::vector<Complex> val);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::int64_t nnz() const { return static_cast<std::int64_t>(col_.size()); }

    std::span<const int> row_cols(int i) const {
        return {col_.data() + row_start_[i], col_.data() + row_start_[i + 1]};
    }
    std::span<const Complex> row_vals(int i) const {
        return {val_.data() + row_start_[i], val_.data() + row_start_[i + 1]};
    }
    const std::vector<std::int64_t>& row_start() const { return row_start_; }
    const std::vector<int>& col_indices() const { return col_; }
    const std::vector<Complex>& values() const { return val_; }

    /// Entry lookup by binary search; zero if not stored.
    Complex coeff(int i, int j) const;

    /// y = A x
    void mult(std::span<const Complex> x, std::span<Complex> y) const;
    /// y = A^T x (plain transpose, no conjugation)
    void mult_transpose(std::span<const Complex> x, std::span<Complex> y) const;
    /// y = A^H x
    void mult_adjoint(std::span<const Complex> x, std::span<Complex> y) const;

    double max_abs() const;

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::int64_t> row_start_{0};
    std::vector<int> col_;
    std::vector<Complex> val_;
};

/// Accumulates (i, j, value) contributions; duplicates are summed on assembly.
class TripletList {
  public:
    TripletList() = default;
    explicit TripletList(std::size_t reserve) { entries_.reserve(reserve); }

    void add(int i, int j, Complex v) { entries_.push_back({i, j, v}); }
    std::size_t size() const { return entries_.size(); }

    SparseComplexMatrix assemble(int rows, int cols) const;

  private:
    struct Entry {
        int i, j;
        Complex v;
    };
    std::vector<Entry> entries_;
};

/// C = sum_k coeff[k] * term[k]; the sparsity pattern is the union of patterns.
SparseComplexMatrix linear_combination(std::span<const Complex> coeff,
                                       std::span<const SparseComplexMatrix* const> term);

/// Coordinate (triplet) text format: header "rows cols nnz", then one
/// "i j re im" line per entry with 0-based indices. Values are printed with
/// enough digits to round-trip bit-exactly.
void export_coordinate(const SparseComplexMatrix& a, std::ostream& out);
SparseComplexMatrix import_coordinate(std::istream& in);

// Small vector helpers shared across the library. The inner product is
// linear in the first argument: dot(x, y) = y^H x.
Complex dot(std::span<const Complex> x, std::span<const Complex> y);
double norm2(std::span<const Complex> x);
void axpy(Complex a, std::span<const Complex> x, std::span<Complex> y);

} // namespace helmdd
