#include <doctest.h>

#include <sstream>

#include "helmdd/sparse.hpp"
#include "oracles.hpp"

using namespace helmdd;
namespace tst = helmdd::testing;

TEST_CASE("triplet assembly sums duplicates and sorts columns") {
    TripletList t;
    t.add(1, 2, Complex(1.0, 0.0));
    t.add(0, 1, Complex(2.0, 1.0));
    t.add(1, 2, Complex(0.5, -2.0));
    t.add(1, 0, Complex(3.0, 0.0));
    const SparseComplexMatrix a = t.assemble(2, 3);
    CHECK(a.nnz() == 3);
    CHECK(a.coeff(1, 2) == Complex(1.5, -2.0));
    CHECK(a.coeff(0, 1) == Complex(2.0, 1.0));
    CHECK(a.coeff(0, 0) == Complex(0.0, 0.0));
    auto cols = a.row_cols(1);
    CHECK(std::is_sorted(cols.begin(), cols.end()));
}

TEST_CASE("spmv identity returns its input") {
    TripletList t;
    for (int i = 0; i < 5; ++i) t.add(i, i, Complex(1.0, 0.0));
    const SparseComplexMatrix a = t.assemble(5, 5);
    const auto x = tst::random_vector(5, 7);
    std::vector<Complex> y(5);
    a.mult(x, y);
    for (int i = 0; i < 5; ++i) CHECK(y[i] == x[i]);
}

TEST_CASE("spmv diagonal example") {
    TripletList t;
    t.add(0, 0, Complex(1.0, 0.0));
    t.add(1, 1, Complex(0.0, 2.0));
    const SparseComplexMatrix a = t.assemble(2, 2);
    std::vector<Complex> x{Complex(1.0, 0.0), Complex(1.0, 0.0)}, y(2);
    a.mult(x, y);
    CHECK(y[0] == Complex(1.0, 0.0));
    CHECK(y[1] == Complex(0.0, 2.0));
}

TEST_CASE("spmv and adjoint agree with the dense oracle") {
    const int n = 50;
    const SparseComplexMatrix a = tst::random_sparse(n, 0.15, 42, false);
    const auto d = tst::to_dense(a);
    const auto x = tst::random_vector(n, 43);
    std::vector<Complex> ys(n), yd(n);

    a.mult(x, ys);
    d.mult(x, yd);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        num += std::norm(ys[i] - yd[i]);
        den += std::norm(yd[i]);
    }
    CHECK(std::sqrt(num) <= 1e-13 * std::sqrt(den));

    a.mult_adjoint(x, ys);
    d.mult_adjoint(x, yd);
    for (int i = 0; i < n; ++i) CHECK(std::abs(ys[i] - yd[i]) <= 1e-13);

    std::vector<Complex> yt(n);
    a.mult_transpose(x, yt);
    for (int i = 0; i < n; ++i) {
        Complex acc{};
        for (int j = 0; j < n; ++j) acc += d.at(j, i) * x[j];
        CHECK(std::abs(yt[i] - acc) <= 1e-13);
    }
}

TEST_CASE("spmv rejects dimension mismatch") {
    const SparseComplexMatrix a = tst::random_sparse(4, 0.5, 1);
    std::vector<Complex> x(3), y(4);
    CHECK_THROWS_AS(a.mult(x, y), std::invalid_argument);
}

TEST_CASE("linear combination merges patterns") {
    TripletList ta, tb;
    ta.add(0, 0, Complex(1.0, 0.0));
    ta.add(1, 1, Complex(2.0, 0.0));
    tb.add(0, 1, Complex(1.0, 0.0));
    tb.add(1, 1, Complex(1.0, 0.0));
    const SparseComplexMatrix a = ta.assemble(2, 2), b = tb.assemble(2, 2);
    const Complex coeff[2] = {Complex(2.0, 0.0), Complex(0.0, -1.0)};
    const SparseComplexMatrix* terms[2] = {&a, &b};
    const SparseComplexMatrix c = linear_combination(coeff, terms);
    CHECK(c.nnz() == 3);
    CHECK(c.coeff(0, 0) == Complex(2.0, 0.0));
    CHECK(c.coeff(0, 1) == Complex(0.0, -1.0));
    CHECK(c.coeff(1, 1) == Complex(4.0, -1.0));
}

TEST_CASE("coordinate format round-trips bit-exactly") {
    const SparseComplexMatrix a = tst::random_sparse(23, 0.21, 99, false);
    std::stringstream buf;
    export_coordinate(a, buf);
    const SparseComplexMatrix b = import_coordinate(buf);
    REQUIRE(b.rows() == a.rows());
    REQUIRE(b.cols() == a.cols());
    REQUIRE(b.nnz() == a.nnz());
    CHECK(b.row_start() == a.row_start());
    CHECK(b.col_indices() == a.col_indices());
    for (std::int64_t t = 0; t < a.nnz(); ++t) {
        CHECK(a.values()[t].real() == b.values()[t].real());
        CHECK(a.values()[t].imag() == b.values()[t].imag());
    }
}

TEST_CASE("coordinate import rejects garbage") {
    std::stringstream buf("not a header");
    CHECK_THROWS(import_coordinate(buf));
}

TEST_CASE("dot is linear in the first argument") {
    const auto x = tst::random_vector(8, 3);
    const auto y = tst::random_vector(8, 4);
    Complex manual{};
    for (int i = 0; i < 8; ++i) manual += x[i] * std::conj(y[i]);
    CHECK(std::abs(dot(x, y) - manual) <= 1e-15);
    CHECK(norm2(x) == doctest::Approx(std::sqrt(dot(x, x).real())));
}
