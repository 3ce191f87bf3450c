#include "helmdd/diag.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

#include "helmdd/factorization.hpp"
#include "helmdd/parallel.hpp"

namespace helmdd {

double SigmaResult::max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

bool SigmaResult::all_converged() const {
    for (auto c : converged)
        if (!c) return false;
    return true;
}

namespace {

SparseComplexMatrix submatrix(const SparseComplexMatrix& a, std::span<const int> keep) {
    std::vector<int> pos(a.rows(), -1);
    for (std::size_t t = 0; t < keep.size(); ++t) pos[keep[t]] = static_cast<int>(t);
    TripletList tl;
    for (std::size_t t = 0; t < keep.size(); ++t) {
        const int i = keep[t];
        auto cs = a.row_cols(i);
        auto vs = a.row_vals(i);
        for (std::size_t p = 0; p < cs.size(); ++p)
            if (pos[cs[p]] >= 0) tl.add(static_cast<int>(t), pos[cs[p]], vs[p]);
    }
    const int n = static_cast<int>(keep.size());
    return tl.assemble(n, n);
}

// T_s v = A_s^{-1} R_s (system v) - R_s v, mapping global vectors to local
// unknown vectors of subdomain s.
struct LocalDeviation {
    const SparseComplexMatrix* system;
    const SchwarzPreconditioner* precond;
    int s;

    std::vector<Complex> apply(std::span<const Complex> v, std::vector<Complex>& scratch) const {
        const int nl = precond->local_dimension(s);
        scratch.resize(system->rows());
        system->mult(v, scratch);
        std::vector<Complex> loc(nl);
        precond->gather(s, scratch, loc);
        std::vector<Complex> out = precond->factor(s).solve(loc);
        precond->gather(s, v, loc);
        for (int t = 0; t < nl; ++t) out[t] -= loc[t];
        return out;
    }

    std::vector<Complex> apply_adjoint(std::span<const Complex> u,
                                       std::vector<Complex>& scratch) const {
        const int n = system->rows();
        std::vector<Complex> p = precond->factor(s).solve_adjoint(u);
        std::vector<Complex> z(n, Complex{});
        precond->scatter_add(s, p, z);
        scratch.resize(n);
        system->mult_adjoint(z, scratch);
        std::vector<Complex> out(scratch.begin(), scratch.end());
        std::vector<Complex> neg(u.begin(), u.end());
        for (auto& x : neg) x = -x;
        precond->scatter_add(s, neg, out);
        return out;
    }
};

double sigma_power(const LocalDeviation& dev, const SparseComplexMatrix& local_energy,
                   const SparseLU& energy_lu, const SigmaOptions& opt, std::uint64_t seed,
                   bool& converged) {
    const int n = dev.system->rows();
    SplitMix64 gen(seed);
    std::vector<Complex> v(n), scratch;
    for (auto& x : v) x = Complex(gen.uniform01() - 0.5, gen.uniform01() - 0.5);

    double lambda = 0.0;
    converged = false;
    for (int it = 0; it < opt.max_iterations; ++it) {
        std::vector<Complex> t = dev.apply(v, scratch);
        std::vector<Complex> dt(t.size());
        local_energy.mult(t, dt);
        std::vector<Complex> z = dev.apply_adjoint(dt, scratch);
        std::vector<Complex> vnew = energy_lu.solve(z);
        const double lnew = std::max(0.0, dot(z, v).real());
        const double nrm = std::sqrt(std::max(0.0, dot(z, vnew).real()));
        if (lnew < 1e-24 || nrm < 1e-150) {
            converged = true;
            return std::sqrt(lnew);
        }
        for (int i = 0; i < n; ++i) v[i] = vnew[i] / nrm;
        if (it > 0 && std::abs(lnew - lambda) <= opt.tolerance * lnew) {
            converged = true;
            return std::sqrt(lnew);
        }
        lambda = lnew;
    }
    return std::sqrt(std::max(0.0, lambda));
}

double sigma_dense(const LocalDeviation& dev, const SparseComplexMatrix& local_energy,
                   const RealCholesky& energy_chol, const SigmaOptions& opt) {
    const int n = dev.system->rows();
    const int nl = local_energy.rows();
    const RealCholesky lloc = RealCholesky::factor_sparse_real(local_energy);

    DenseComplexMatrix b(nl, n);
    std::vector<Complex> e(n, Complex{}), scratch;
    for (int j = 0; j < n; ++j) {
        e[j] = Complex(1.0, 0.0);
        std::vector<Complex> col = dev.apply(e, scratch);
        std::copy(col.begin(), col.end(), b.col(j));
        e[j] = Complex{};
    }
    // B := L_loc^T T L_g^{-T}
    for (int i = 0; i < n; ++i) {
        const double d = energy_chol.at(i, i);
        Complex* ci = b.col(i);
        for (int r = 0; r < nl; ++r) ci[r] /= d;
        for (int j = i + 1; j < n; ++j) {
            const double lji = energy_chol.at(j, i);
            if (lji == 0.0) continue;
            Complex* cj = b.col(j);
            for (int r = 0; r < nl; ++r) cj[r] -= lji * ci[r];
        }
    }
    for (int j = 0; j < n; ++j) lloc.mult_lower_t({b.col(j), static_cast<std::size_t>(nl)});

    if (n <= 600) return singular_values_jacobi(std::move(b)).front();
    return largest_singular_value(b, 1e-10, 5000, opt.seed);
}

} // namespace

SigmaResult estimate_sigma(const FineMesh& fine, const SubdomainDecomposition& decomp,
                           const SparseComplexMatrix& system, const SparseComplexMatrix& energy,
                           const SchwarzPreconditioner& precond, double k,
                           const SigmaOptions& opt) {
    const int n = system.rows();
    const bool dense = opt.method == SigmaOptions::Method::DenseOracle ||
                       (opt.method == SigmaOptions::Method::Auto && n <= opt.dense_cap);

    SigmaResult res;
    res.values.assign(decomp.count(), 0.0);
    res.converged.assign(decomp.count(), 1);

    std::optional<SparseLU> energy_lu;
    std::optional<RealCholesky> energy_chol;
    if (dense)
        energy_chol = RealCholesky::factor_sparse_real(energy);
    else
        energy_lu = SparseLU::factorize(energy);

    for (int s = 0; s < decomp.count(); ++s) {
        SparseComplexMatrix local_energy = assemble_local_energy(fine, decomp, s, k);
        if (precond.bc() == BoundaryCondition::Dirichlet)
            local_energy = submatrix(local_energy, precond.local_unknowns(s));
        const LocalDeviation dev{&system, &precond, s};
        if (dense) {
            res.values[s] = sigma_dense(dev, local_energy, *energy_chol, opt);
        } else {
            bool conv = false;
            res.values[s] =
                sigma_power(dev, local_energy, *energy_lu, opt, derive_seed(opt.seed, s), conv);
            res.converged[s] = conv;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Norm and field of values.

namespace {

// Eigenvalues (ascending) and eigenvectors of a small dense symmetric
// matrix, by cyclic Jacobi rotations. Used on Lanczos tridiagonals.
void sym_eig_small(int n, std::vector<double> a, std::vector<double>& evals,
                   std::vector<double>& evecs) {
    evecs.assign(std::size_t(n) * n, 0.0);
    for (int i = 0; i < n; ++i) evecs[std::size_t(i) * n + i] = 1.0;
    auto A = [&](int i, int j) -> double& { return a[std::size_t(j) * n + i]; };
    auto V = [&](int i, int j) -> double& { return evecs[std::size_t(j) * n + i]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-28) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(A(p, q)) < 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < n; ++i) {
                    const double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = A(p, i), aqi = A(q, i);
                    A(p, i) = c * api - s * aqi;
                    A(q, i) = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const double vip = V(i, p), viq = V(i, q);
                    V(i, p) = c * vip - s * viq;
                    V(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    evals.resize(n);
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = A(i, i);
    std::sort(idx.begin(), idx.end(), [&](int x, int y) { return diag[x] < diag[y]; });
    std::vector<double> vs(evecs);
    for (int j = 0; j < n; ++j) {
        evals[j] = diag[idx[j]];
        for (int i = 0; i < n; ++i) evecs[std::size_t(j) * n + i] = vs[std::size_t(idx[j]) * n + i];
    }
}

struct ExtremePair {
    double lambda = 0.0;
    std::vector<Complex> vec;
};

// Largest eigenvalue of a Hermitian operator by Lanczos with full
// reorthogonalization; warm starts make a handful of steps sufficient
// inside the rotation sweep.
template <class Matvec>
ExtremePair lanczos_max(const Matvec& mv, int n, std::vector<Complex> start, int min_steps,
                        int max_steps, double tol) {
    std::vector<std::vector<Complex>> q;
    std::vector<double> alpha, beta;
    double nrm = norm2(start);
    if (nrm == 0.0) {
        start.assign(n, Complex{});
        start[0] = Complex(1.0, 0.0);
        nrm = 1.0;
    }
    for (auto& x : start) x /= nrm;
    q.push_back(std::move(start));

    double prev = 0.0;
    ExtremePair best;
    std::vector<double> evals, evecs;
    for (int j = 0; j < max_steps; ++j) {
        std::vector<Complex> w(n);
        mv(q[j], w);
        for (int r = 0; r < 2; ++r)
            for (std::size_t i = 0; i < q.size(); ++i) {
                const Complex c = dot(w, q[i]);
                if (static_cast<int>(i) == j) {
                    if (r == 0)
                        alpha.push_back(c.real());
                    else
                        alpha.back() += c.real();
                }
                axpy(-c, q[i], w);
            }
        const double b = norm2(w);

        const int m = j + 1;
        std::vector<double> tri(std::size_t(m) * m, 0.0);
        for (int i = 0; i < m; ++i) tri[std::size_t(i) * m + i] = alpha[i];
        for (int i = 0; i + 1 < m; ++i)
            tri[std::size_t(i) * m + i + 1] = tri[std::size_t(i + 1) * m + i] = beta[i];
        sym_eig_small(m, tri, evals, evecs);
        const double lmax = evals[m - 1];

        const bool stagnated = j + 1 >= min_steps && std::abs(lmax - prev) <=
                                   tol * std::max({std::abs(lmax), std::abs(prev), 1e-30});
        prev = lmax;
        if (stagnated || b < 1e-13 || j + 1 == max_steps) {
            best.lambda = lmax;
            best.vec.assign(n, Complex{});
            for (int i = 0; i < m; ++i)
                axpy(Complex(evecs[std::size_t(m - 1) * m + i], 0.0), q[i], best.vec);
            const double vn = norm2(best.vec);
            if (vn > 0.0)
                for (auto& x : best.vec) x /= vn;
            return best;
        }
        beta.push_back(b);
        for (auto& x : w) x /= b;
        q.push_back(std::move(w));
    }
    return best;
}

double distance_from_hull(std::vector<std::array<double, 2>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.empty()) return 0.0;
    if (pts.size() == 1) return std::hypot(pts[0][0], pts[0][1]);

    auto cross = [](const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<std::array<double, 2>> hull(2 * pts.size());
    std::size_t h = 0;
    for (const auto& p : pts) { // lower
        while (h >= 2 && cross(hull[h - 2], hull[h - 1], p) <= 0.0) --h;
        hull[h++] = p;
    }
    const std::size_t lower = h + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) { // upper
        while (h >= lower && cross(hull[h - 2], hull[h - 1], *it) <= 0.0) --h;
        hull[h++] = *it;
    }
    hull.resize(h > 1 ? h - 1 : h); // closed polygon, CCW

    auto seg_dist = [](const std::array<double, 2>& a, const std::array<double, 2>& b) {
        const double vx = b[0] - a[0], vy = b[1] - a[1];
        const double len2 = vx * vx + vy * vy;
        double t = len2 > 0.0 ? -(a[0] * vx + a[1] * vy) / len2 : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return std::hypot(a[0] + t * vx, a[1] + t * vy);
    };
    if (hull.size() == 1) return std::hypot(hull[0][0], hull[0][1]);
    if (hull.size() == 2) return seg_dist(hull[0], hull[1]);

    bool inside = true;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& a = hull[i];
        const auto& b = hull[(i + 1) % hull.size()];
        if (cross(a, b, {0.0, 0.0}) < 0.0) inside = false;
        dist = std::min(dist, seg_dist(a, b));
    }
    return inside ? 0.0 : dist;
}

} // namespace

NormFovResult norm_and_fov(const LinearOp& op, const SparseComplexMatrix& energy,
                           const NormFovOptions& opt) {
    const int n = energy.rows();
    if (n > opt.dense_cap)
        throw std::invalid_argument("norm_and_fov: problem exceeds the dense cap");

    const DenseComplexMatrix t = materialize(op, n);
    const RealCholesky chol = RealCholesky::factor_sparse_real(energy);

    // W = L^T T L^{-T}; the norm needs only W / W^H applications.
    auto apply_w = [&](std::span<const Complex> x, std::span<Complex> y) {
        std::vector<Complex> u(x.begin(), x.end());
        chol.solve_lower_t(u);
        t.mult(u, y);
        chol.mult_lower_t(y);
    };
    auto apply_wh = [&](std::span<const Complex> x, std::span<Complex> y) {
        std::vector<Complex> u(x.begin(), x.end());
        chol.mult_lower(u);
        t.mult_adjoint(u, y);
        chol.solve_lower(y);
    };

    NormFovResult res;
    {
        SplitMix64 gen(opt.seed);
        std::vector<Complex> v(n), z(n), w(n);
        for (auto& x : v) x = Complex(gen.uniform01() - 0.5, gen.uniform01() - 0.5);
        double nv = norm2(v);
        for (auto& x : v) x /= nv;
        double lambda = 0.0;
        for (int it = 0; it < opt.power_max_iterations; ++it) {
            apply_w(v, z);
            apply_wh(z, w);
            const double lnew = std::max(0.0, dot(w, v).real());
            const double wn = norm2(w);
            if (wn == 0.0) break;
            for (int i = 0; i < n; ++i) v[i] = w[i] / wn;
            if (it > 0 && std::abs(lnew - lambda) <= opt.power_tol * std::max(lnew, 1e-300)) {
                lambda = lnew;
                break;
            }
            lambda = lnew;
        }
        res.norm = std::sqrt(lambda);
    }
    if (!opt.want_fov) return res;

    // Materialize W for the rotation sweep.
    DenseComplexMatrix w(n, n);
    {
        std::vector<Complex> col(n);
        for (int j = 0; j < n; ++j) {
            std::copy(t.col(j), t.col(j) + n, w.col(j));
        }
        // W0 = T L^{-T} by forward accumulation over columns of L.
        for (int i = 0; i < n; ++i) {
            const double d = chol.at(i, i);
            Complex* ci = w.col(i);
            for (int r = 0; r < n; ++r) ci[r] /= d;
            for (int j = i + 1; j < n; ++j) {
                const double lji = chol.at(j, i);
                if (lji == 0.0) continue;
                Complex* cj = w.col(j);
                for (int r = 0; r < n; ++r) cj[r] -= lji * ci[r];
            }
        }
        for (int j = 0; j < n; ++j) chol.mult_lower_t({w.col(j), static_cast<std::size_t>(n)});
    }

    const int angles = opt.sweep_angles;
    std::vector<double> support(angles);
    std::vector<std::array<double, 2>> boundary(angles);

    auto eval_angle = [&](double theta, std::vector<Complex> start, ExtremePair& out) {
        const Complex ph(std::cos(theta), std::sin(theta));
        auto mv = [&](std::span<const Complex> x, std::span<Complex> y) {
            std::vector<Complex> t1(n), t2(n);
            w.mult(x, t1);
            w.mult_adjoint(x, t2);
            for (int i = 0; i < n; ++i) y[i] = 0.5 * (ph * t1[i] + std::conj(ph) * t2[i]);
        };
        const bool warm = !out.vec.empty();
        if (warm) start = out.vec;
        out = lanczos_max(mv, n, std::move(start), warm ? 3 : 8, warm ? 14 : 64, 1e-10);
    };
    auto boundary_point = [&](const std::vector<Complex>& v) -> std::array<double, 2> {
        std::vector<Complex> wv(n);
        w.mult(v, wv);
        const Complex z = dot(wv, v);
        return {z.real(), z.imag()};
    };

    // Fixed arc partition: results do not depend on the worker count.
    const int arcs = 8;
    parallel_for(arcs, opt.workers, [&](int arc) {
        const int begin = arc * angles / arcs, end = (arc + 1) * angles / arcs;
        ExtremePair state;
        SplitMix64 gen(derive_seed(opt.seed, 100 + arc));
        std::vector<Complex> start(n);
        for (auto& x : start) x = Complex(gen.uniform01() - 0.5, gen.uniform01() - 0.5);
        for (int j = begin; j < end; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / angles;
            eval_angle(theta, start, state);
            support[j] = state.lambda;
            boundary[j] = boundary_point(state.vec);
        }
    });

    std::vector<std::array<double, 2>> pts(boundary.begin(), boundary.end());

    // Bisection refinement near the support-minimizing angle.
    int jmin = 0;
    for (int j = 1; j < angles; ++j)
        if (support[j] < support[jmin]) jmin = j;
    double theta_star = 2.0 * std::numbers::pi * jmin / angles;
    double step = 2.0 * std::numbers::pi / angles;
    double best = support[jmin];
    ExtremePair state;
    SplitMix64 gen(derive_seed(opt.seed, 999));
    std::vector<Complex> start(n);
    for (auto& x : start) x = Complex(gen.uniform01() - 0.5, gen.uniform01() - 0.5);
    for (int level = 0; level < opt.refine_levels; ++level) {
        step *= 0.5;
        double best_theta = theta_star;
        for (double theta : {theta_star - step, theta_star + step}) {
            eval_angle(theta, start, state);
            pts.push_back(boundary_point(state.vec));
            if (state.lambda < best) {
                best = state.lambda;
                best_theta = theta;
            }
        }
        theta_star = best_theta;
    }

    res.fov_distance = distance_from_hull(std::move(pts));
    return res;
}

double theta_bound(double eps, double subdomain_extent, double k, bool starshaped) {
    if (k < 1.0 || subdomain_extent <= 0.0)
        throw std::invalid_argument("theta_bound: k >= 1 and positive extent required");
    if (!starshaped) {
        if (eps == 0.0)
            throw std::invalid_argument("theta_bound: eps = 0 requires starshaped subdomains");
        return k * k / std::abs(eps);
    }
    if (eps == 0.0) return 1.0 + subdomain_extent * k;
    return std::min(1.0 + k * subdomain_extent, k * k / std::abs(eps));
}

TheoryReport theory_report(const FineMesh& fine, const SubdomainDecomposition& decomp, double k,
                           double eps, const TheoryOptions& opt) {
    const FemForms forms = assemble_forms(fine);
    const Complex eta = impedance_coefficient(k, eps, opt.eta_rule);
    const SparseComplexMatrix system = combine(forms, k, eps, eta);
    const SparseComplexMatrix energy = energy_matrix(forms, k);

    std::vector<LocalSystem> locals;
    locals.reserve(decomp.count());
    for (int s = 0; s < decomp.count(); ++s)
        locals.push_back(assemble_local(fine, decomp, s, k, eps, eta, opt.bc));
    SchwarzOptions sopt;
    sopt.workers = opt.workers;
    const SchwarzPreconditioner precond = SchwarzPreconditioner::build(decomp, locals, sopt);

    TheoryReport r;
    r.k = k;
    r.eps = eps;
    r.n = fine.node_count();
    SigmaResult sig = estimate_sigma(fine, decomp, system, energy, precond, k, opt.sigma);
    r.sigma_per_subdomain = sig.values;
    r.sigma = sig.max_value();

    LinearOp t = [&](std::span<const Complex> x, std::span<Complex> y) {
        std::vector<Complex> ax(system.rows());
        system.mult(x, ax);
        precond.apply(ax, y);
    };
    NormFovOptions nopt = opt.norm_fov;
    nopt.workers = std::max(nopt.workers, opt.workers);
    const NormFovResult nf = norm_and_fov(t, energy, nopt);
    r.norm_dk = nf.norm;
    r.fov_distance = nf.fov_distance;

    r.overlap_count = decomp.overlap_count();
    r.theoretical_upper = r.overlap_count * (1.0 + r.sigma);
    r.theoretical_lower = 1.0 / r.overlap_count - std::sqrt(2.0) * r.sigma * r.overlap_count;
    return r;
}

void print_report(std::ostream& out, const TheoryReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "k = %.17g\neps = %.17g\nn = %d\nsubdomains = %zu\n", r.k,
                  r.eps, r.n, r.sigma_per_subdomain.size());
    out << buf;
    out << "sigma_per_subdomain =";
    for (double v : r.sigma_per_subdomain) {
        std::snprintf(buf, sizeof(buf), " %.6g", v);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "\nsigma = %.10g\nnorm_dk = %.10g\nfov_distance = %.10g\nlambda = %d\n"
                  "theoretical_upper = %.10g\ntheoretical_lower = %.10g\n",
                  r.sigma, r.norm_dk, r.fov_distance, r.overlap_count, r.theoretical_upper,
                  r.theoretical_lower);
    out << buf;
}

std::string report_csv_header() {
    return "k,eps,n,sigma,norm_dk,fov_distance,lambda,theoretical_upper,theoretical_lower";
}

std::string report_csv_row(const TheoryReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%.17g,%.17g,%.17g,%d,%.17g,%.17g", r.k, r.eps,
                  r.n, r.sigma, r.norm_dk, r.fov_distance, r.overlap_count, r.theoretical_upper,
                  r.theoretical_lower);
    return buf;
}

PerturbationReport perturbation_scan(const FineMesh& fine, const SubdomainDecomposition& decomp,
                                     double k, std::span<const double> eps_list,
                                     const PerturbationOptions& opt) {
    PerturbationReport rep;
    rep.k = k;
    rep.n = fine.node_count();
    if (rep.n > opt.norm_fov.dense_cap)
        throw std::invalid_argument("perturbation_scan: problem exceeds the dense cap");

    const FemForms forms = assemble_forms(fine);
    const Complex eta(k, 0.0); // the unshifted reference uses eta = k throughout
    const SparseComplexMatrix ref = combine(forms, k, 0.0, eta);
    const SparseComplexMatrix energy = energy_matrix(forms, k);
    const RealCholesky chol = RealCholesky::factor_sparse_real(energy);
    const int n = rep.n;

    for (double eps : eps_list) {
        rep.eps_values.push_back(eps);
        double nrm = 0.0;
        if (eps != 0.0) {
            const SparseComplexMatrix shifted = combine(forms, k, eps, eta);
            const SparseLU lu = SparseLU::factorize(shifted);
            DenseComplexMatrix e(n, n);
            std::vector<Complex> col(n), ax(n);
            std::vector<Complex> unit(n, Complex{});
            for (int j = 0; j < n; ++j) {
                unit[j] = Complex(1.0, 0.0);
                ref.mult(unit, ax);
                lu.solve(ax, col);
                for (int i = 0; i < n; ++i) col[i] = (i == j ? Complex(1.0, 0.0) : Complex{}) - col[i];
                std::copy(col.begin(), col.end(), e.col(j));
                unit[j] = Complex{};
            }
            auto apply_w = [&](std::span<const Complex> x, std::span<Complex> y) {
                std::vector<Complex> u(x.begin(), x.end());
                chol.solve_lower_t(u);
                e.mult(u, y);
                chol.mult_lower_t(y);
            };
            DenseComplexMatrix wmat = materialize(apply_w, n);
            nrm = largest_singular_value(wmat, 1e-10, 5000);
        }
        rep.norms.push_back(nrm);

        // Measured preconditioner quality at this absorption level.
        std::vector<LocalSystem> locals;
        for (int s = 0; s < decomp.count(); ++s)
            locals.push_back(
                assemble_local(fine, decomp, s, k, eps, eta, BoundaryCondition::Impedance));
        SchwarzOptions sopt;
        sopt.workers = opt.workers;
        const SchwarzPreconditioner precond = SchwarzPreconditioner::build(decomp, locals, sopt);
        const SparseComplexMatrix shifted =
            eps == 0.0 ? ref : combine(forms, k, eps, eta);
        LinearOp t = [&](std::span<const Complex> x, std::span<Complex> y) {
            std::vector<Complex> ax(n);
            shifted.mult(x, ax);
            precond.apply(ax, y);
        };
        NormFovOptions nopt = opt.norm_fov;
        nopt.workers = std::max(nopt.workers, opt.workers);
        const NormFovResult nf = norm_and_fov(t, energy, nopt);
        rep.c1.push_back(nf.norm);
        rep.c2.push_back(nf.fov_distance);
    }

    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < rep.eps_values.size(); ++i) {
        const double x = std::abs(rep.eps_values[i]) / k;
        sxy += x * rep.norms[i];
        sxx += x * x;
    }
    rep.slope = sxx > 0.0 ? sxy / sxx : 0.0;

    for (std::size_t i = 0; i < rep.eps_values.size(); ++i) {
        const double x = std::abs(rep.eps_values[i]) / k;
        rep.upper_bound.push_back(rep.c1[i] * (1.0 + rep.slope * x));
        rep.lower_bound.push_back(rep.c2[i] - rep.slope * rep.c1[i] * x);
    }
    return rep;
}

void print_report(std::ostream& out, const PerturbationReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "k = %.17g\nn = %d\nslope_K = %.10g\n", r.k, r.n, r.slope);
    out << buf;
    for (std::size_t i = 0; i < r.eps_values.size(); ++i) {
        std::snprintf(buf, sizeof(buf),
                      "eps = %-12.6g norm = %-14.8g C1 = %-12.6g C2 = %-12.6g upper = %-12.6g "
                      "lower = %-12.6g\n",
                      r.eps_values[i], r.norms[i], r.c1[i], r.c2[i], r.upper_bound[i],
                      r.lower_bound[i]);
        out << buf;
    }
}

std::string perturbation_csv_header() {
    return "k,n,eps,norm,slope_K,c1,c2,upper_bound,lower_bound";
}

std::string perturbation_csv_rows(const PerturbationReport& r) {
    std::ostringstream out;
    char buf[512];
    for (std::size_t i = 0; i < r.eps_values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      r.k, r.n, r.eps_values[i], r.norms[i], r.slope, r.c1[i], r.c2[i],
                      r.upper_bound[i], r.lower_bound[i]);
        out << buf;
    }
    return out.str();
}

} // namespace helmdd
