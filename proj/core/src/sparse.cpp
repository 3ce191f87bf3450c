#include "helmdd/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace helmdd {

SparseComplexMatrix::SparseComplexMatrix(int rows, int cols, std::vector<std::int64_t> row_start,
                                         std::vector<int> col, std::vector<Complex> val)
    : rows_(rows), cols_(cols), row_start_(std::move(row_start)), col_(std::move(col)),
      val_(std::move(val)) {
    if (rows_ < 0 || cols_ < 0 || row_start_.size() != static_cast<std::size_t>(rows_) + 1 ||
        col_.size() != val_.size() ||
        row_start_.back() != static_cast<std::int64_t>(col_.size())) {
        throw std::invalid_argument("SparseComplexMatrix: inconsistent CSR arrays");
    }
}

Complex SparseComplexMatrix::coeff(int i, int j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return {};
    return val_[row_start_[i] + (it - cols.begin())];
}

void SparseComplexMatrix::mult(std::span<const Complex> x, std::span<Complex> y) const {
    if (static_cast<int>(x.size()) != cols_ || static_cast<int>(y.size()) != rows_)
        throw std::invalid_argument("spmv: dimension mismatch");
    for (int i = 0; i < rows_; ++i) {
        Complex acc{};
        const std::int64_t b = row_start_[i], e = row_start_[i + 1];
        for (std::int64_t t = b; t < e; ++t) acc += val_[t] * x[col_[t]];
        y[i] = acc;
    }
}

void SparseComplexMatrix::mult_transpose(std::span<const Complex> x, std::span<Complex> y) const {
    if (static_cast<int>(x.size()) != rows_ || static_cast<int>(y.size()) != cols_)
        throw std::invalid_argument("spmv^T: dimension mismatch");
    std::fill(y.begin(), y.end(), Complex{});
    for (int i = 0; i < rows_; ++i) {
        const std::int64_t b = row_start_[i], e = row_start_[i + 1];
        for (std::int64_t t = b; t < e; ++t) y[col_[t]] += val_[t] * x[i];
    }
}

void SparseComplexMatrix::mult_adjoint(std::span<const Complex> x, std::span<Complex> y) const {
    if (static_cast<int>(x.size()) != rows_ || static_cast<int>(y.size()) != cols_)
        throw std::invalid_argument("spmv^H: dimension mismatch");
    std::fill(y.begin(), y.end(), Complex{});
    for (int i = 0; i < rows_; ++i) {
        const std::int64_t b = row_start_[i], e = row_start_[i + 1];
        for (std::int64_t t = b; t < e; ++t) y[col_[t]] += std::conj(val_[t]) * x[i];
    }
}

double SparseComplexMatrix::max_abs() const {
    double m = 0.0;
    for (const Complex& v : val_) m = std::max(m, std::abs(v));
    return m;
}

SparseComplexMatrix TripletList::assemble(int rows, int cols) const {
    std::vector<Entry> sorted(entries_);
    std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    std::vector<std::int64_t> row_start(rows + 1, 0);
    std::vector<int> col;
    std::vector<Complex> val;
    col.reserve(sorted.size());
    val.reserve(sorted.size());
    std::size_t t = 0;
    for (int i = 0; i < rows; ++i) {
        while (t < sorted.size() && sorted[t].i == i) {
            int j = sorted[t].j;
            if (i < 0 || j < 0 || j >= cols)
                throw std::invalid_argument("TripletList: index out of range");
            Complex acc{};
            while (t < sorted.size() && sorted[t].i == i && sorted[t].j == j)
                acc += sorted[t++].v;
            col.push_back(j);
            val.push_back(acc);
        }
        row_start[i + 1] = static_cast<std::int64_t>(col.size());
    }
    if (t != sorted.size()) throw std::invalid_argument("TripletList: row index out of range");
    return SparseComplexMatrix(rows, cols, std::move(row_start), std::move(col), std::move(val));
}

SparseComplexMatrix linear_combination(std::span<const Complex> coeff,
                                       std::span<const SparseComplexMatrix* const> term) {
    if (coeff.size() != term.size() || term.empty())
        throw std::invalid_argument("linear_combination: bad arguments");
    const int rows = term[0]->rows(), cols = term[0]->cols();
    for (const auto* m : term)
        if (m->rows() != rows || m->cols() != cols)
            throw std::invalid_argument("linear_combination: dimension mismatch");

    std::vector<std::int64_t> row_start(rows + 1, 0);
    std::vector<int> col;
    std::vector<Complex> val;
    std::int64_t cap = 0;
    for (const auto* m : term) cap += m->nnz();
    col.reserve(cap);
    val.reserve(cap);

    std::vector<Complex> acc(cols, Complex{});
    std::vector<int> touched;
    for (int i = 0; i < rows; ++i) {
        touched.clear();
        for (std::size_t k = 0; k < term.size(); ++k) {
            auto cs = term[k]->row_cols(i);
            auto vs = term[k]->row_vals(i);
            for (std::size_t t = 0; t < cs.size(); ++t) {
                if (acc[cs[t]] == Complex{} &&
                    std::find(touched.begin(), touched.end(), cs[t]) == touched.end())
                    touched.push_back(cs[t]);
                acc[cs[t]] += coeff[k] * vs[t];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (int j : touched) {
            col.push_back(j);
            val.push_back(acc[j]);
            acc[j] = Complex{};
        }
        row_start[i + 1] = static_cast<std::int64_t>(col.size());
    }
    return SparseComplexMatrix(rows, cols, std::move(row_start), std::move(col), std::move(val));
}

void export_coordinate(const SparseComplexMatrix& a, std::ostream& out) {
    out << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
    char buf[128];
    for (int i = 0; i < a.rows(); ++i) {
        auto cs = a.row_cols(i);
        auto vs = a.row_vals(i);
        for (std::size_t t = 0; t < cs.size(); ++t) {
            std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g\n", i, cs[t], vs[t].real(),
                          vs[t].imag());
            out << buf;
        }
    }
}

SparseComplexMatrix import_coordinate(std::istream& in) {
    int rows = 0, cols = 0;
    std::int64_t nnz = 0;
    if (!(in >> rows >> cols >> nnz)) throw std::runtime_error("coordinate import: bad header");
    TripletList triplets(static_cast<std::size_t>(nnz));
    for (std::int64_t t = 0; t < nnz; ++t) {
        int i, j;
        double re, im;
        if (!(in >> i >> j >> re >> im)) throw std::runtime_error("coordinate import: bad entry");
        triplets.add(i, j, Complex(re, im));
    }
    return triplets.assemble(rows, cols);
}

Complex dot(std::span<const Complex> x, std::span<const Complex> y) {
    Complex acc{};
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * std::conj(y[i]);
    return acc;
}

double norm2(std::span<const Complex> x) {
    double acc = 0.0;
    for (const Complex& v : x) acc += std::norm(v);
    return std::sqrt(acc);
}

void axpy(Complex a, std::span<const Complex> x, std::span<Complex> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

} // namespace helmdd
