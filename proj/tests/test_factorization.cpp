#include <doctest.h>

#include <set>

#include "helmdd/factorization.hpp"
#include "helmdd/ordering.hpp"
#include "oracles.hpp"

using namespace helmdd;
namespace tst = helmdd::testing;

namespace {

// 5-point Laplacian on a g x g grid.
SparseComplexMatrix grid_laplacian(int g) {
    TripletList t;
    auto id = [g](int i, int j) { return j * g + i; };
    for (int j = 0; j < g; ++j)
        for (int i = 0; i < g; ++i) {
            t.add(id(i, j), id(i, j), Complex(4.0, 0.0));
            if (i > 0) t.add(id(i, j), id(i - 1, j), Complex(-1.0, 0.0));
            if (i < g - 1) t.add(id(i, j), id(i + 1, j), Complex(-1.0, 0.0));
            if (j > 0) t.add(id(i, j), id(i, j - 1), Complex(-1.0, 0.0));
            if (j < g - 1) t.add(id(i, j), id(i, j + 1), Complex(-1.0, 0.0));
        }
    return t.assemble(g * g, g * g);
}

double solve_residual(const SparseComplexMatrix& a, const SparseLU& lu,
                      const std::vector<Complex>& b) {
    const auto x = lu.solve(b);
    std::vector<Complex> ax(a.rows());
    a.mult(x, ax);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        num += std::norm(ax[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num / den);
}

} // namespace

TEST_CASE("solve of a complex diagonal") {
    TripletList t;
    t.add(0, 0, Complex(2.0, 0.0));
    t.add(1, 1, Complex(0.0, 3.0));
    const auto a = t.assemble(2, 2);
    const SparseLU lu = SparseLU::factorize(a);
    const std::vector<Complex> b{Complex(1.0, 0.0), Complex(1.0, 0.0)};
    const auto x = lu.solve(b);
    CHECK(std::abs(x[0] - Complex(0.5, 0.0)) <= 1e-15);
    CHECK(std::abs(x[1] - Complex(0.0, -1.0 / 3.0)) <= 1e-15);
    CHECK_FALSE(lu.near_singular());
}

TEST_CASE("pivoting handles a zero diagonal") {
    TripletList t;
    t.add(0, 1, Complex(1.0, 0.0));
    t.add(1, 0, Complex(1.0, 0.0));
    const auto a = t.assemble(2, 2);
    const SparseLU lu = SparseLU::factorize(a);
    const std::vector<Complex> b{Complex(3.0, 1.0), Complex(-2.0, 0.5)};
    const auto x = lu.solve(b);
    CHECK(std::abs(x[0] - b[1]) <= 1e-15);
    CHECK(std::abs(x[1] - b[0]) <= 1e-15);
}

TEST_CASE("random well-conditioned system solves to 1e-10") {
    const auto a = tst::random_sparse(100, 0.06, 2024);
    const SparseLU lu = SparseLU::factorize(a);
    const auto b = tst::random_vector(100, 5);
    CHECK(solve_residual(a, lu, b) <= 1e-10);
}

TEST_CASE("adjoint solve satisfies the conjugate-transposed system") {
    const auto a = tst::random_sparse(60, 0.1, 11);
    const SparseLU lu = SparseLU::factorize(a);
    const auto b = tst::random_vector(60, 12);
    std::vector<Complex> y(60), ahy(60);
    lu.solve_adjoint(b, y);
    a.mult_adjoint(y, ahy);
    for (int i = 0; i < 60; ++i) CHECK(std::abs(ahy[i] - b[i]) <= 1e-10);
}

TEST_CASE("factors reproduce the permuted matrix") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto a = tst::random_sparse(40, 0.12, seed, false);
        const SparseLU lu = SparseLU::factorize(a);
        const auto l = tst::to_dense(lu.lower());
        const auto u = tst::to_dense(lu.upper());
        const auto& pinv = lu.row_permutation();
        const auto& q = lu.column_order();
        std::vector<int> prow(40);
        for (int r = 0; r < 40; ++r) prow[pinv[r]] = r;
        double max_err = 0.0;
        for (int i = 0; i < 40; ++i)
            for (int j = 0; j < 40; ++j) {
                Complex lu_ij{};
                for (int s = 0; s < 40; ++s) lu_ij += l.at(i, s) * u.at(s, j);
                max_err = std::max(max_err, std::abs(lu_ij - a.coeff(prow[i], q[j])));
            }
        CHECK(max_err <= 1e-10 * a.max_abs());
    }
}

TEST_CASE("structurally singular matrix is reported as such") {
    TripletList t; // column 1 has no entries
    t.add(0, 0, Complex(1.0, 0.0));
    t.add(1, 0, Complex(1.0, 0.0));
    t.add(1, 2, Complex(1.0, 0.0));
    t.add(2, 2, Complex(1.0, 0.0));
    const auto a = t.assemble(3, 3);
    CHECK_THROWS_AS(SparseLU::factorize(a), StructurallySingular);
}

TEST_CASE("near-singular pivot is flagged but solvable") {
    TripletList t;
    t.add(0, 0, Complex(1.0, 0.0));
    t.add(1, 1, Complex(1e-15, 0.0));
    const auto a = t.assemble(2, 2);
    const SparseLU lu = SparseLU::factorize(a);
    CHECK(lu.near_singular());
    CHECK(lu.min_pivot() == doctest::Approx(1e-15));
    const std::vector<Complex> b{Complex(1.0, 0.0), Complex(1e-15, 0.0)};
    const auto x = lu.solve(b);
    CHECK(std::abs(x[1] - Complex(1.0, 0.0)) <= 1e-9);
}

TEST_CASE("repeated solves are bitwise identical") {
    const auto a = tst::random_sparse(80, 0.08, 77);
    const SparseLU lu = SparseLU::factorize(a);
    const auto b = tst::random_vector(80, 78);
    const auto x1 = lu.solve(b);
    const auto x2 = lu.solve(b);
    for (int i = 0; i < 80; ++i) {
        CHECK(x1[i].real() == x2[i].real());
        CHECK(x1[i].imag() == x2[i].imag());
    }
}

TEST_CASE("one refinement step does not hurt an already good solve") {
    const auto a = tst::random_sparse(50, 0.1, 31);
    const SparseLU lu = SparseLU::factorize(a);
    const auto b = tst::random_vector(50, 32);
    auto x = lu.solve(b);
    refine_once(a, lu, b, x);
    std::vector<Complex> ax(50);
    a.mult(x, ax);
    double num = 0.0;
    for (int i = 0; i < 50; ++i) num += std::norm(ax[i] - b[i]);
    CHECK(std::sqrt(num) <= 1e-11 * norm2(b));
}

TEST_CASE("amd returns a valid permutation") {
    for (int n : {1, 2, 7, 33, 120}) {
        const auto a = tst::random_sparse(n, 0.08, 100 + n, false);
        const auto p = amd_order(a);
        REQUIRE(static_cast<int>(p.size()) == n);
        std::set<int> seen(p.begin(), p.end());
        CHECK(static_cast<int>(seen.size()) == n);
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == n - 1);
    }
}

TEST_CASE("fill-reducing ordering beats natural order on the grid Laplacian") {
    const auto a = grid_laplacian(32);
    FactorizationOptions natural;
    natural.fill_reducing = false;
    const SparseLU lu_nat = SparseLU::factorize(a, natural);
    const SparseLU lu_amd = SparseLU::factorize(a);
    CHECK(static_cast<double>(lu_nat.factor_nnz()) >=
          1.5 * static_cast<double>(lu_amd.factor_nnz()));

    const auto b = tst::random_vector(a.rows(), 1234);
    CHECK(solve_residual(a, lu_amd, b) <= 1e-12);
    CHECK(solve_residual(a, lu_nat, b) <= 1e-12);
}

TEST_CASE("grid Laplacian solve matches the dense oracle") {
    const auto a = grid_laplacian(9);
    const SparseLU lu = SparseLU::factorize(a);
    const auto b = tst::random_vector(81, 55);
    const auto x = lu.solve(b);
    const auto xd = tst::dense_solve(tst::to_dense(a), b);
    for (int i = 0; i < 81; ++i) CHECK(std::abs(x[i] - xd[i]) <= 1e-11);
}
