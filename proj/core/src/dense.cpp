#include "helmdd/dense.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace helmdd {

void DenseComplexMatrix::mult(std::span<const Complex> x, std::span<Complex> y) const {
    std::fill(y.begin(), y.end(), Complex{});
    for (int j = 0; j < cols_; ++j) {
        const Complex xj = x[j];
        if (xj == Complex{}) continue;
        const Complex* c = col(j);
        for (int i = 0; i < rows_; ++i) y[i] += c[i] * xj;
    }
}

void DenseComplexMatrix::mult_adjoint(std::span<const Complex> x, std::span<Complex> y) const {
    for (int j = 0; j < cols_; ++j) {
        const Complex* c = col(j);
        Complex acc{};
        for (int i = 0; i < rows_; ++i) acc += std::conj(c[i]) * x[i];
        y[j] = acc;
    }
}

RealCholesky RealCholesky::factor_sparse_real(const SparseComplexMatrix& spd) {
    const int n = spd.rows();
    RealCholesky ch;
    ch.n_ = n;
    ch.l_.assign(std::size_t(n) * n, 0.0);
    auto l = [&](int i, int j) -> double& { return ch.l_[std::size_t(j) * n + i]; };
    for (int i = 0; i < n; ++i) {
        auto cs = spd.row_cols(i);
        auto vs = spd.row_vals(i);
        for (std::size_t t = 0; t < cs.size(); ++t)
            if (cs[t] <= i) l(i, cs[t]) = vs[t].real();
    }
    for (int j = 0; j < n; ++j) {
        double d = l(j, j);
        for (int t = 0; t < j; ++t) d -= l(j, t) * l(j, t);
        if (d <= 0.0) throw std::runtime_error("RealCholesky: matrix not positive definite");
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            double acc = l(i, j);
            for (int t = 0; t < j; ++t) acc -= l(i, t) * l(j, t);
            l(i, j) = acc / ljj;
        }
    }
    return ch;
}

void RealCholesky::solve_lower(std::span<Complex> z) const {
    for (int j = 0; j < n_; ++j) {
        const Complex zj = z[j] / at(j, j);
        z[j] = zj;
        for (int i = j + 1; i < n_; ++i) z[i] -= at(i, j) * zj;
    }
}

void RealCholesky::solve_lower_t(std::span<Complex> z) const {
    for (int j = n_ - 1; j >= 0; --j) {
        Complex acc = z[j];
        for (int i = j + 1; i < n_; ++i) acc -= at(i, j) * z[i];
        z[j] = acc / at(j, j);
    }
}

void RealCholesky::mult_lower_t(std::span<Complex> z) const {
    for (int j = 0; j < n_; ++j) {
        Complex acc = at(j, j) * z[j];
        for (int i = j + 1; i < n_; ++i) acc += at(i, j) * z[i];
        z[j] = acc;
    }
}

void RealCholesky::mult_lower(std::span<Complex> z) const {
    for (int j = n_ - 1; j >= 0; --j) {
        Complex acc = at(j, j) * z[j];
        for (int i = 0; i < j; ++i) acc += at(j, i) * z[i];
        z[j] = acc;
    }
}

DenseComplexMatrix materialize(
    const std::function<void(std::span<const Complex>, std::span<Complex>)>& op, int n) {
    DenseComplexMatrix a(n, n);
    std::vector<Complex> e(n, Complex{});
    std::vector<Complex> y(n);
    for (int j = 0; j < n; ++j) {
        e[j] = Complex(1.0, 0.0);
        op(e, y);
        std::copy(y.begin(), y.end(), a.col(j));
        e[j] = Complex{};
    }
    return a;
}

double largest_singular_value(const DenseComplexMatrix& a, double tol, int max_iterations,
                              std::uint64_t seed) {
    const int n = a.cols();
    if (n == 0) return 0.0;
    SplitMix64 gen(seed);
    std::vector<Complex> v(n), av(a.rows()), w(n);
    for (auto& x : v) x = Complex(gen.uniform01() - 0.5, gen.uniform01() - 0.5);
    double nv = norm2(v);
    for (auto& x : v) x /= nv;
    double lambda = 0.0;
    for (int it = 0; it < max_iterations; ++it) {
        a.mult(v, av);
        a.mult_adjoint(av, w);
        const double lnew = std::sqrt(std::max(0.0, dot(w, v).real()));
        const double wn = norm2(w);
        if (wn == 0.0) return 0.0;
        for (int i = 0; i < n; ++i) v[i] = w[i] / wn;
        if (std::abs(lnew - lambda) <= tol * std::max(lnew, 1e-300)) return lnew;
        lambda = lnew;
    }
    return lambda;
}

std::vector<double> singular_values_jacobi(DenseComplexMatrix a) {
    const int m = a.rows(), n = a.cols();
    const double eps = 1e-14;
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                Complex* cp = a.col(p);
                Complex* cq = a.col(q);
                double app = 0.0, aqq = 0.0;
                Complex g{}; // cp^H cq
                for (int i = 0; i < m; ++i) {
                    app += std::norm(cp[i]);
                    aqq += std::norm(cq[i]);
                    g += std::conj(cp[i]) * cq[i];
                }
                if (std::abs(g) <= eps * std::sqrt(app * aqq)) continue;
                rotated = true;
                // Phase-adjusted Rutishauser rotation orthogonalizing the pair.
                const double tau = (aqq - app) / (2.0 * std::abs(g));
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                const Complex phc = std::conj(g / std::abs(g));
                for (int i = 0; i < m; ++i) {
                    const Complex vp = cp[i], vq = cq[i];
                    cp[i] = c * vp - s * phc * vq;
                    cq[i] = s * vp + c * phc * vq;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> sv(n);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        const Complex* c = a.col(j);
        for (int i = 0; i < m; ++i) acc += std::norm(c[i]);
        sv[j] = std::sqrt(acc);
    }
    std::sort(sv.rbegin(), sv.rend());
    return sv;
}

} // namespace helmdd
