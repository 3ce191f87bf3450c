#pragma once

#include <functional>
#include <span>
#include <vector>

#include "helmdd/sparse.hpp"

namespace helmdd {

/// Column-major dense complex matrix; just enough for the diagnostics and
/// the dense verification paths.
class DenseComplexMatrix {
  public:
    DenseComplexMatrix() = default;
    DenseComplexMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Complex& at(int i, int j) { return a_[std::size_t(j) * rows_ + i]; }
    const Complex& at(int i, int j) const { return a_[std::size_t(j) * rows_ + i]; }
    Complex* col(int j) { return a_.data() + std::size_t(j) * rows_; }
    const Complex* col(int j) const { return a_.data() + std::size_t(j) * rows_; }

    void mult(std::span<const Complex> x, std::span<Complex> y) const;         // y = A x
    void mult_adjoint(std::span<const Complex> x, std::span<Complex> y) const; // y = A^H x

  private:
    int rows_ = 0, cols_ = 0;
    std::vector<Complex> a_;
};

/// A = L L^T for a real symmetric positive definite matrix, stored as the
/// lower factor, column-major. Used with the (real-valued) energy matrix.
class RealCholesky {
  public:
    static RealCholesky factor_sparse_real(const SparseComplexMatrix& spd);

    int dimension() const { return n_; }
    double at(int i, int j) const { return l_[std::size_t(j) * n_ + i]; }

    void solve_lower(std::span<Complex> z) const;      // z := L^{-1} z
    void solve_lower_t(std::span<Complex> z) const;    // z := L^{-T} z
    void mult_lower_t(std::span<Complex> z) const;     // z := L^T z
    void mult_lower(std::span<Complex> z) const;       // z := L z

  private:
    int n_ = 0;
    std::vector<double> l_;
};

/// Columns of the operator, one application per unit vector.
DenseComplexMatrix materialize(const std::function<void(std::span<const Complex>, std::span<Complex>)>& op,
                               int n);

/// Largest singular value by power iteration on A^H A (deterministic start).
double largest_singular_value(const DenseComplexMatrix& a, double tol = 1e-10,
                              int max_iterations = 2000, std::uint64_t seed = 0x5eed);

/// All singular values by one-sided Jacobi rotations; for modest sizes.
std::vector<double> singular_values_jacobi(DenseComplexMatrix a);

} // namespace helmdd
