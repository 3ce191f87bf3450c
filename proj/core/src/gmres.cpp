#include "helmdd/gmres.hpp"

#include <cmath>

#include "helmdd/common.hpp"

namespace helmdd {
namespace {

constexpr double kBreakdownTol = 1e-14;

// Weighted inner products via cached W v products: one weight application
// per Arnoldi step in total.
struct InnerProduct {
    const SparseComplexMatrix* weight;

    std::vector<Complex> apply(std::span<const Complex> v) const {
        if (!weight) return {v.begin(), v.end()};
        std::vector<Complex> wv(v.size());
        weight->mult(v, wv);
        return wv;
    }

    // <u, v>_W given wu = W u.
    static Complex dot_cached(std::span<const Complex> wu, std::span<const Complex> v) {
        return dot(wu, v);
    }

    static double norm_cached(std::span<const Complex> wu, std::span<const Complex> u) {
        const Complex s = dot(wu, u);
        if (!(s.real() > 0.0) && norm2(u) > 0.0) {
            if (std::abs(s) == 0.0) return 0.0;
            throw std::runtime_error("gmres: weight operator not positive on a Krylov vector");
        }
        return std::sqrt(std::max(s.real(), 0.0));
    }
};

} // namespace

GmresResult gmres(const LinearOp& apply_a, const LinearOp& apply_p, std::span<const Complex> rhs,
                  const GmresConfig& cfg) {
    const int n = static_cast<int>(rhs.size());
    const bool has_p = static_cast<bool>(apply_p);
    const bool right = cfg.side == GmresConfig::Side::Right;
    if (right && cfg.weight)
        throw std::invalid_argument(
            "gmres: the weighted inner product is supported with left preconditioning only");
    const InnerProduct ip{cfg.weight};

    GmresResult res;
    res.solution.assign(n, Complex{});
    if (cfg.start == GmresConfig::Start::Random) {
        SplitMix64 gen(cfg.seed);
        for (auto& v : res.solution) v = Complex(gen.uniform01(), 0.0);
    }

    std::vector<Complex> tmp(n), r0(n);
    apply_a(res.solution, tmp);
    for (int i = 0; i < n; ++i) tmp[i] = rhs[i] - tmp[i];
    if (has_p && !right)
        apply_p(tmp, r0);
    else
        r0 = tmp;

    std::vector<Complex> wr0 = ip.apply(r0);
    const double beta = InnerProduct::norm_cached(wr0, r0);
    res.residual_history.push_back(beta);
    if (cfg.record_unpreconditioned) {
        apply_a(res.solution, tmp);
        for (int i = 0; i < n; ++i) tmp[i] = rhs[i] - tmp[i];
        res.unpreconditioned_history.push_back(norm2(tmp));
    }
    if (beta == 0.0) {
        res.converged = true;
        return res;
    }

    std::vector<std::vector<Complex>> basis, wbasis;
    basis.emplace_back(r0);
    for (auto& v : basis[0]) v /= beta;
    wbasis.emplace_back(std::move(wr0));
    for (auto& v : wbasis[0]) v /= beta;

    std::vector<std::vector<Complex>> hess; // column j holds h(0..j+1, j)
    std::vector<Complex> givens_s;
    std::vector<double> givens_c;
    std::vector<Complex> g{Complex(beta, 0.0)};

    auto form_solution = [&](int steps) {
        std::vector<Complex> y(steps);
        for (int i = steps - 1; i >= 0; --i) {
            Complex acc = g[i];
            for (int l = i + 1; l < steps; ++l) acc -= hess[l][i] * y[l];
            y[i] = acc / hess[i][i];
        }
        std::vector<Complex> x = res.solution;
        if (right && has_p) {
            std::vector<Complex> vy(n, Complex{}), pvy(n);
            for (int l = 0; l < steps; ++l) axpy(y[l], basis[l], vy);
            apply_p(vy, pvy);
            for (int i = 0; i < n; ++i) x[i] += pvy[i];
        } else {
            for (int l = 0; l < steps; ++l) axpy(y[l], basis[l], x);
        }
        return x;
    };

    int j = 0;
    for (; j < cfg.max_iterations; ++j) {
        std::vector<Complex> w(n);
        if (right && has_p) {
            apply_p(basis[j], tmp);
            apply_a(tmp, w);
        } else {
            apply_a(basis[j], tmp);
            if (has_p)
                apply_p(tmp, w);
            else
                w = tmp;
        }
        std::vector<Complex> ww = ip.apply(w);
        const double pre_norm = InnerProduct::norm_cached(ww, w);

        std::vector<Complex> h(j + 2, Complex{});
        auto mgs_pass = [&]() {
            for (int i = 0; i <= j; ++i) {
                const Complex hij = InnerProduct::dot_cached(ww, basis[i]);
                h[i] += hij;
                const Complex neg = -hij;
                axpy(neg, basis[i], w);
                axpy(neg, wbasis[i], ww);
            }
        };
        mgs_pass();
        double wnorm = InnerProduct::norm_cached(ww, w);
        if (wnorm < pre_norm / std::sqrt(2.0)) {
            mgs_pass(); // loss-of-orthogonality heuristic tripped
            wnorm = InnerProduct::norm_cached(ww, w);
        }
        h[j + 1] = Complex(wnorm, 0.0);

        const bool broke_down = wnorm < kBreakdownTol;
        if (!broke_down) {
            for (auto& v : w) v /= wnorm;
            // refresh the cached weighted copy; the incrementally updated one
            // has accumulated the Gram-Schmidt roundoff
            ww = ip.apply(w);
            const double exact = InnerProduct::norm_cached(ww, w);
            if (exact > 0.0) {
                for (auto& v : w) v /= exact;
                for (auto& v : ww) v /= exact;
            }
            basis.push_back(std::move(w));
            wbasis.push_back(std::move(ww));
        }

        // Givens update of the new Hessenberg column.
        for (int i = 0; i < j; ++i) {
            const Complex hi = h[i], hi1 = h[i + 1];
            h[i] = givens_c[i] * hi + givens_s[i] * hi1;
            h[i + 1] = -std::conj(givens_s[i]) * hi + givens_c[i] * hi1;
        }
        {
            const Complex a = h[j];
            const double b = h[j + 1].real();
            double c;
            Complex s;
            const double am = std::abs(a);
            if (am == 0.0) {
                c = 0.0;
                s = Complex(1.0, 0.0);
            } else {
                const double r = std::hypot(am, b);
                c = am / r;
                s = (a / am) * (b / r);
            }
            givens_c.push_back(c);
            givens_s.push_back(s);
            h[j] = c * a + s * b;
            h[j + 1] = Complex{};
            g.push_back(-std::conj(s) * g[j]);
            g[j] *= c;
        }
        hess.push_back(std::move(h));

        const double resid = std::abs(g[j + 1]);
        res.residual_history.push_back(resid);
        if (cfg.record_unpreconditioned) {
            const std::vector<Complex> xj = form_solution(j + 1);
            apply_a(xj, tmp);
            for (int i = 0; i < n; ++i) tmp[i] = rhs[i] - tmp[i];
            res.unpreconditioned_history.push_back(norm2(tmp));
        }

        if (resid <= cfg.tolerance * beta || broke_down) {
            res.converged = true;
            res.breakdown = broke_down;
            ++j;
            break;
        }
    }

    res.iterations = j;
    res.solution = form_solution(j);
    if (cfg.keep_basis) res.basis = std::move(basis);
    return res;
}

} // namespace helmdd
