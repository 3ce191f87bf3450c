#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "helmdd/sparse.hpp"

namespace helmdd {

struct FactorizationOptions {
    /// Column ordering: approximate minimum degree on the symmetrized
    /// pattern when true, natural order when false.
    bool fill_reducing = true;
    /// Relative threshold for partial pivoting: the diagonal entry is kept
    /// as pivot whenever its magnitude is at least this fraction of the
    /// largest candidate.
    double pivot_threshold = 0.1;
    /// A pivot smaller than this fraction of max|A| flags the factorization
    /// as near-singular (reported, not fatal).
    double near_singular_ratio = 1e-12;
};

/// Sparse LU of a square complex matrix: P_r A P_c = L U with a
/// fill-reducing column ordering P_c and row pivoting P_r. Immutable after
/// construction; solves are reusable for many right-hand sides and safe to
/// call concurrently.
class SparseLU {
  public:
    SparseLU() = default;

    /// Throws StructurallySingular when a column of the active submatrix has
    /// no admissible pivot entry.
    static SparseLU factorize(const SparseComplexMatrix& a, const FactorizationOptions& opt = {});

    int dimension() const { return n_; }

    void solve(std::span<const Complex> b, std::span<Complex> x) const;
    std::vector<Complex> solve(std::span<const Complex> b) const;
    /// Solves A^H y = b.
    void solve_adjoint(std::span<const Complex> b, std::span<Complex> y) const;
    std::vector<Complex> solve_adjoint(std::span<const Complex> b) const;

    bool near_singular() const { return near_singular_; }
    double min_pivot() const { return min_pivot_; }
    double max_pivot() const { return max_pivot_; }
    double matrix_scale() const { return scale_; }
    std::int64_t factor_nnz() const;

    /// pinv[r] = pivot position assigned to original row r.
    const std::vector<int>& row_permutation() const { return pinv_; }
    /// q[j] = original column eliminated at step j.
    const std::vector<int>& column_order() const { return q_; }

    /// Explicit factors in pivot coordinates, for verification:
    /// (P_r A P_c)_{ij} = A(prow(i), q[j]) equals (L U)_{ij}, where
    /// prow is the inverse of pinv. L carries its unit diagonal.
    SparseComplexMatrix lower() const;
    SparseComplexMatrix upper() const;

  private:
    int n_ = 0;
    std::vector<std::int64_t> lcolp_, ucolp_;
    std::vector<int> lrow_, urow_; // pivot coordinates; L excludes its unit diagonal
    std::vector<Complex> lval_, uval_;
    std::vector<int> pinv_, q_;
    bool near_singular_ = false;
    double min_pivot_ = 0.0, max_pivot_ = 0.0, scale_ = 0.0;
};

/// One step of iterative refinement: x += A \ (b - A x).
void refine_once(const SparseComplexMatrix& a, const SparseLU& lu, std::span<const Complex> b,
                 std::span<Complex> x);

} // namespace helmdd
