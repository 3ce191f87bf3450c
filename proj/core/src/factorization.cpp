#include "helmdd/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "helmdd/ordering.hpp"

namespace helmdd {
namespace {

// Column-compressed copy of A with columns taken in the order q.
struct CscView {
    std::vector<std::int64_t> colp;
    std::vector<int> row;
    std::vector<Complex> val;
};

CscView csc_permuted(const SparseComplexMatrix& a, const std::vector<int>& q) {
    const int n = a.rows();
    std::vector<int> pos_of_col(n); // original column -> eliminated position
    for (int j = 0; j < n; ++j) pos_of_col[q[j]] = j;

    CscView c;
    c.colp.assign(n + 1, 0);
    for (int i = 0; i < n; ++i)
        for (int j : a.row_cols(i)) ++c.colp[pos_of_col[j] + 1];
    for (int j = 0; j < n; ++j) c.colp[j + 1] += c.colp[j];
    c.row.resize(a.nnz());
    c.val.resize(a.nnz());
    std::vector<std::int64_t> fill(c.colp.begin(), c.colp.end() - 1);
    for (int i = 0; i < a.rows(); ++i) {
        auto cs = a.row_cols(i);
        auto vs = a.row_vals(i);
        for (std::size_t t = 0; t < cs.size(); ++t) {
            const std::int64_t p = fill[pos_of_col[cs[t]]]++;
            c.row[p] = i;
            c.val[p] = vs[t];
        }
    }
    return c;
}

} // namespace

SparseLU SparseLU::factorize(const SparseComplexMatrix& a, const FactorizationOptions& opt) {
    if (a.rows() != a.cols()) throw std::invalid_argument("factorize: matrix must be square");
    const int n = a.rows();

    SparseLU f;
    f.n_ = n;
    f.scale_ = a.max_abs();
    f.q_.resize(n);
    if (opt.fill_reducing && n > 2) {
        f.q_ = amd_order(a);
    } else {
        for (int j = 0; j < n; ++j) f.q_[j] = j;
    }
    if (n == 0) return f;

    const CscView c = csc_permuted(a, f.q_);

    // Growing CSC factors; during factorization L rows are original indices,
    // remapped to pivot coordinates at the end.
    std::vector<std::int64_t>&lcolp = f.lcolp_, &ucolp = f.ucolp_;
    lcolp.assign(1, 0);
    ucolp.assign(1, 0);
    std::vector<int>&lrow = f.lrow_, &urow = f.urow_;
    std::vector<Complex>&lval = f.lval_, &uval = f.uval_;
    lrow.reserve(4 * c.row.size());
    lval.reserve(4 * c.row.size());
    urow.reserve(4 * c.row.size());
    uval.reserve(4 * c.row.size());

    std::vector<int>& pinv = f.pinv_;
    pinv.assign(n, -1);
    std::vector<Complex> x(n, Complex{});
    std::vector<int> stamp(n, -1);
    std::vector<int> xi(n), stack(n);
    std::vector<std::int64_t> pstack(n);

    f.min_pivot_ = std::numeric_limits<double>::infinity();
    f.max_pivot_ = 0.0;

    for (int j = 0; j < n; ++j) {
        // Reach of the column pattern through the graph of L (topological
        // order comes out at xi[top..n)).
        int top = n;
        for (std::int64_t t = c.colp[j]; t < c.colp[j + 1]; ++t) {
            int r = c.row[t];
            if (stamp[r] == j) continue;
            int depth = 0;
            stack[0] = r;
            stamp[r] = j;
            pstack[0] = -1;
            while (depth >= 0) {
                const int s = stack[depth];
                const int jcol = pinv[s];
                std::int64_t& p = pstack[depth];
                if (p < 0) p = jcol >= 0 ? lcolp[jcol] : std::numeric_limits<std::int64_t>::max();
                const std::int64_t pend = jcol >= 0 ? lcolp[jcol + 1] : -1;
                bool descended = false;
                while (p < pend) {
                    const int rr = lrow[p++];
                    if (stamp[rr] != j) {
                        stamp[rr] = j;
                        stack[++depth] = rr;
                        pstack[depth] = -1;
                        descended = true;
                        break;
                    }
                }
                if (!descended) {
                    xi[--top] = s;
                    --depth;
                }
            }
        }

        for (int t = top; t < n; ++t) x[xi[t]] = Complex{};
        for (std::int64_t t = c.colp[j]; t < c.colp[j + 1]; ++t) x[c.row[t]] = c.val[t];

        // Sparse lower triangular solve in topological order.
        for (int t = top; t < n; ++t) {
            const int s = xi[t];
            const int jcol = pinv[s];
            if (jcol < 0) continue;
            const Complex xs = x[s];
            if (xs == Complex{}) continue;
            for (std::int64_t p = lcolp[jcol]; p < lcolp[jcol + 1]; ++p) x[lrow[p]] -= lval[p] * xs;
        }

        // Threshold partial pivoting: keep the natural diagonal when it is
        // within pivot_threshold of the largest remaining candidate.
        const int diag_row = f.q_[j];
        int pivot_row = -1;
        double pivot_mag = -1.0;
        bool any_candidate = false;
        for (int t = top; t < n; ++t) {
            const int s = xi[t];
            if (pinv[s] >= 0) continue;
            any_candidate = true;
            const double m = std::abs(x[s]);
            if (m > pivot_mag) {
                pivot_mag = m;
                pivot_row = s;
            }
        }
        if (!any_candidate)
            throw StructurallySingular("factorize: no pivot candidate in column " +
                                       std::to_string(j));
        if (stamp[diag_row] == j && pinv[diag_row] < 0 &&
            std::abs(x[diag_row]) >= opt.pivot_threshold * pivot_mag) {
            pivot_row = diag_row;
            pivot_mag = std::abs(x[diag_row]);
        }
        if (pivot_mag == 0.0)
            throw StructurallySingular("factorize: exactly zero pivot column " +
                                       std::to_string(j));
        const Complex piv = x[pivot_row];
        f.min_pivot_ = std::min(f.min_pivot_, pivot_mag);
        f.max_pivot_ = std::max(f.max_pivot_, pivot_mag);
        pinv[pivot_row] = j;

        for (int t = top; t < n; ++t) {
            const int s = xi[t];
            if (pinv[s] >= 0 && s != pivot_row) {
                urow.push_back(pinv[s]);
                uval.push_back(x[s]);
            } else if (s != pivot_row && x[s] != Complex{}) {
                lrow.push_back(s);
                lval.push_back(x[s] / piv);
            }
        }
        urow.push_back(j); // diagonal stored last in each U column
        uval.push_back(piv);
        lcolp.push_back(static_cast<std::int64_t>(lrow.size()));
        ucolp.push_back(static_cast<std::int64_t>(urow.size()));
    }

    for (int& r : lrow) r = pinv[r];
    f.near_singular_ = f.min_pivot_ < opt.near_singular_ratio * f.scale_;
    return f;
}

void SparseLU::solve(std::span<const Complex> b, std::span<Complex> x) const {
    if (static_cast<int>(b.size()) != n_ || static_cast<int>(x.size()) != n_)
        throw std::invalid_argument("SparseLU::solve: dimension mismatch");
    std::vector<Complex> w(n_);
    for (int r = 0; r < n_; ++r) w[pinv_[r]] = b[r];
    // L z = w (unit diagonal, scatter by columns)
    for (int jc = 0; jc < n_; ++jc) {
        const Complex zj = w[jc];
        if (zj == Complex{}) continue;
        for (std::int64_t p = lcolp_[jc]; p < lcolp_[jc + 1]; ++p) w[lrow_[p]] -= lval_[p] * zj;
    }
    // U y = z (diagonal is the last entry of each column)
    for (int jc = n_ - 1; jc >= 0; --jc) {
        const std::int64_t pend = ucolp_[jc + 1] - 1;
        const Complex yj = w[jc] / uval_[pend];
        w[jc] = yj;
        if (yj == Complex{}) continue;
        for (std::int64_t p = ucolp_[jc]; p < pend; ++p) w[urow_[p]] -= uval_[p] * yj;
    }
    for (int jc = 0; jc < n_; ++jc) x[q_[jc]] = w[jc];
}

std::vector<Complex> SparseLU::solve(std::span<const Complex> b) const {
    std::vector<Complex> x(n_);
    solve(b, x);
    return x;
}

void SparseLU::solve_adjoint(std::span<const Complex> b, std::span<Complex> y) const {
    if (static_cast<int>(b.size()) != n_ || static_cast<int>(y.size()) != n_)
        throw std::invalid_argument("SparseLU::solve_adjoint: dimension mismatch");
    std::vector<Complex> w(n_);
    for (int jc = 0; jc < n_; ++jc) w[jc] = b[q_[jc]];
    // U^H z = w is lower triangular; gather by columns of U.
    for (int jc = 0; jc < n_; ++jc) {
        Complex acc = w[jc];
        const std::int64_t pend = ucolp_[jc + 1] - 1;
        for (std::int64_t p = ucolp_[jc]; p < pend; ++p) acc -= std::conj(uval_[p]) * w[urow_[p]];
        w[jc] = acc / std::conj(uval_[pend]);
    }
    // L^H v = z is unit upper triangular; gather by columns of L.
    for (int jc = n_ - 1; jc >= 0; --jc) {
        Complex acc = w[jc];
        for (std::int64_t p = lcolp_[jc]; p < lcolp_[jc + 1]; ++p)
            acc -= std::conj(lval_[p]) * w[lrow_[p]];
        w[jc] = acc;
    }
    for (int r = 0; r < n_; ++r) y[r] = w[pinv_[r]];
}

std::vector<Complex> SparseLU::solve_adjoint(std::span<const Complex> b) const {
    std::vector<Complex> y(n_);
    solve_adjoint(b, y);
    return y;
}

std::int64_t SparseLU::factor_nnz() const {
    return static_cast<std::int64_t>(lrow_.size() + urow_.size()) + n_; // + unit diagonal of L
}

SparseComplexMatrix SparseLU::lower() const {
    TripletList t(lrow_.size() + n_);
    for (int j = 0; j < n_; ++j) {
        t.add(j, j, Complex(1.0, 0.0));
        for (std::int64_t p = lcolp_[j]; p < lcolp_[j + 1]; ++p) t.add(lrow_[p], j, lval_[p]);
    }
    return t.assemble(n_, n_);
}

SparseComplexMatrix SparseLU::upper() const {
    TripletList t(urow_.size());
    for (int j = 0; j < n_; ++j)
        for (std::int64_t p = ucolp_[j]; p < ucolp_[j + 1]; ++p) t.add(urow_[p], j, uval_[p]);
    return t.assemble(n_, n_);
}

void refine_once(const SparseComplexMatrix& a, const SparseLU& lu, std::span<const Complex> b,
                 std::span<Complex> x) {
    std::vector<Complex> r(b.begin(), b.end());
    std::vector<Complex> ax(a.rows());
    a.mult(x, ax);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= ax[i];
    std::vector<Complex> dx = lu.solve(r);
    for (std::size_t i = 0; i < r.size(); ++i) x[i] += dx[i];
}

} // namespace helmdd
