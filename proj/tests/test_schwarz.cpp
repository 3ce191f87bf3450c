#include <doctest.h>

#include "helmdd/schwarz.hpp"
#include "oracles.hpp"

using namespace helmdd;
namespace tst = helmdd::testing;

namespace {

struct Problem {
    GridPair grids;
    SubdomainDecomposition decomp;
    FemForms forms;
    SparseComplexMatrix system;
    std::vector<LocalSystem> locals;
    double k, eps;
    Complex eta;
};

Problem make_problem(int coarse, int fine, double k, double eps,
                     BoundaryCondition bc = BoundaryCondition::Impedance) {
    Problem p{{CoarseGrid{coarse}, FineMesh(fine)},
              {},
              {},
              {},
              {},
              k,
              eps,
              Complex(k, 0.0)};
    p.decomp = build_decomposition(p.grids.coarse, p.grids.fine);
    p.forms = assemble_forms(p.grids.fine);
    p.system = combine(p.forms, k, eps, p.eta);
    for (int s = 0; s < p.decomp.count(); ++s)
        p.locals.push_back(assemble_local(p.grids.fine, p.decomp, s, k, eps, p.eta, bc));
    return p;
}

} // namespace

TEST_CASE("build collects one factorization per subdomain with matching sizes") {
    const Problem p = make_problem(2, 8, 5.0, 5.0);
    const SchwarzPreconditioner pc = SchwarzPreconditioner::build(p.decomp, p.locals);
    REQUIRE(pc.count() == 9);
    for (int s = 0; s < 9; ++s) {
        CHECK(pc.local_dimension(s) == p.decomp.subdomain(s).node_count());
        CHECK(pc.factor(s).dimension() == p.decomp.subdomain(s).node_count());
        CHECK_FALSE(pc.diagnostics()[s].near_singular);
    }
}

TEST_CASE("dirichlet local systems shrink by the rim nodes") {
    const Problem imp = make_problem(2, 8, 5.0, 5.0);
    const Problem dir = make_problem(2, 8, 5.0, 5.0, BoundaryCondition::Dirichlet);
    const SchwarzPreconditioner pci = SchwarzPreconditioner::build(imp.decomp, imp.locals);
    const SchwarzPreconditioner pcd = SchwarzPreconditioner::build(dir.decomp, dir.locals);
    for (int s = 0; s < pci.count(); ++s) {
        const Subdomain& sd = imp.decomp.subdomain(s);
        int rim = 0;
        for (auto b : sd.on_boundary) rim += b ? 1 : 0;
        CHECK(pcd.local_dimension(s) == pci.local_dimension(s) - rim);
    }
}

TEST_CASE("single whole-domain subdomain inverts the system exactly") {
    const FineMesh mesh(6);
    const auto decomp = SubdomainDecomposition::whole_domain(mesh);
    const double k = 5.0, eps = 5.0;
    const Complex eta(k, 0.0);
    const FemForms forms = assemble_forms(mesh);
    const SparseComplexMatrix a = combine(forms, k, eps, eta);
    std::vector<LocalSystem> locals{
        assemble_local(mesh, decomp, 0, k, eps, eta, BoundaryCondition::Impedance)};
    const SchwarzPreconditioner pc = SchwarzPreconditioner::build(decomp, locals);

    const auto v = tst::random_vector(a.rows(), 99);
    std::vector<Complex> av(a.rows()), back(a.rows());
    a.mult(v, av);
    pc.apply(av, back);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < a.rows(); ++i) {
        num += std::norm(back[i] - v[i]);
        den += std::norm(v[i]);
    }
    CHECK(std::sqrt(num / den) <= 1e-10);
}

TEST_CASE("zero stays zero") {
    const Problem p = make_problem(2, 4, 4.0, 4.0);
    const SchwarzPreconditioner pc = SchwarzPreconditioner::build(p.decomp, p.locals);
    std::vector<Complex> zero(p.system.rows(), Complex{}), out(p.system.rows());
    pc.apply(zero, out);
    for (const Complex& v : out) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("apply agrees with the dense composition oracle") {
    const Problem p = make_problem(2, 6, 6.0, 6.0);
    const SchwarzPreconditioner pc = SchwarzPreconditioner::build(p.decomp, p.locals);
    const int n = p.system.rows();
    const auto v = tst::random_vector(n, 1001);

    // dense oracle: sum_l R_l^T A_l^{-1} R_l v with explicit dense solves
    std::vector<Complex> expect(n, Complex{});
    for (int s = 0; s < p.decomp.count(); ++s) {
        const Subdomain& sd = p.decomp.subdomain(s);
        std::vector<Complex> loc(sd.node_count());
        for (int t = 0; t < sd.node_count(); ++t) loc[t] = sd.weights[t] * v[sd.nodes[t]];
        const auto sol = tst::dense_solve(tst::to_dense(p.locals[s].matrix), loc);
        for (int t = 0; t < sd.node_count(); ++t) expect[sd.nodes[t]] += sd.weights[t] * sol[t];
    }

    std::vector<Complex> out(n);
    pc.apply(v, out);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        num += std::norm(out[i] - expect[i]);
        den += std::norm(expect[i]);
    }
    CHECK(std::sqrt(num / den) <= 1e-9);
}

TEST_CASE("apply is independent of the worker count") {
    const Problem p = make_problem(3, 6, 4.0, 4.0);
    SchwarzOptions seq, par;
    par.workers = 4;
    const SchwarzPreconditioner a = SchwarzPreconditioner::build(p.decomp, p.locals, seq);
    const SchwarzPreconditioner b = SchwarzPreconditioner::build(p.decomp, p.locals, par);
    const auto v = tst::random_vector(p.system.rows(), 2020);
    std::vector<Complex> oa(p.system.rows()), ob(p.system.rows());
    a.apply(v, oa);
    b.apply(v, ob);
    for (int i = 0; i < p.system.rows(); ++i) {
        CHECK(oa[i].real() == ob[i].real());
        CHECK(oa[i].imag() == ob[i].imag());
    }
}

TEST_CASE("weighted scatter of plain gathers reproduces the vector") {
    const Problem p = make_problem(3, 9, 4.0, 4.0);
    const SchwarzPreconditioner pc = SchwarzPreconditioner::build(p.decomp, p.locals);
    const int n = p.system.rows();
    const auto v = tst::random_vector(n, 321);
    std::vector<Complex> out(n, Complex{});
    for (int s = 0; s < pc.count(); ++s) {
        std::vector<Complex> plain(pc.local_dimension(s));
        const auto nodes = pc.local_nodes(s);
        for (std::size_t t = 0; t < nodes.size(); ++t) plain[t] = v[nodes[t]];
        pc.scatter_add(s, plain, out);
    }
    for (int i = 0; i < n; ++i)
        CHECK(std::abs(out[i] - v[i]) <=
              8.0 * std::numeric_limits<double>::epsilon() * std::abs(v[i]));
}

TEST_CASE("the preconditioner is complex symmetric") {
    const Problem p = make_problem(2, 4, 4.0, 8.0);
    const SchwarzPreconditioner pc = SchwarzPreconditioner::build(p.decomp, p.locals);
    const int n = p.system.rows();
    const DenseComplexMatrix b = materialize(
        [&](std::span<const Complex> x, std::span<Complex> y) { pc.apply(x, y); }, n);
    double max_entry = 0.0, max_diff = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            max_entry = std::max(max_entry, std::abs(b.at(i, j)));
            max_diff = std::max(max_diff, std::abs(b.at(i, j) - b.at(j, i)));
        }
    CHECK(max_diff <= 1e-10 * max_entry);
}

TEST_CASE("adjoint apply matches the conjugate transpose") {
    const Problem p = make_problem(2, 4, 4.0, 4.0);
    const SchwarzPreconditioner pc = SchwarzPreconditioner::build(p.decomp, p.locals);
    const int n = p.system.rows();
    const auto x = tst::random_vector(n, 71);
    const auto y = tst::random_vector(n, 72);
    std::vector<Complex> px(n), phy(n);
    pc.apply(x, px);
    pc.apply_adjoint(y, phy);
    // <P x, y> == <x, P^H y>
    CHECK(std::abs(dot(px, y) - dot(x, phy)) <= 1e-11 * norm2(x) * norm2(y));
}

TEST_CASE("local solve equals the independently assembled projection") {
    // the matrix route A_l^{-1} R_l A V against a quadrature-assembled dense
    // local problem solved densely
    const Problem p = make_problem(2, 4, 5.0, 5.0);
    const SchwarzPreconditioner pc = SchwarzPreconditioner::build(p.decomp, p.locals);
    const int n = p.system.rows();
    const auto v = tst::random_vector(n, 7777);
    std::vector<Complex> av(n);
    p.system.mult(v, av);

    for (int s = 0; s < pc.count(); ++s) {
        const Subdomain& sd = p.decomp.subdomain(s);
        const int nl = sd.node_count();

        std::vector<Complex> gathered(nl);
        pc.gather(s, av, gathered);
        const auto via_matrices = pc.factor(s).solve(gathered);

        // oracle: local matrix by quadrature, right-hand side from the
        // global quadrature form against weighted local basis functions
        const DenseComplexMatrix local = tst::quad_local_matrix(p.grids.fine, sd, p.k, p.eps,
                                                                p.eta);
        std::vector<Complex> rhs(nl);
        std::vector<Complex> basis(n, Complex{});
        for (int t = 0; t < nl; ++t) {
            basis[sd.nodes[t]] = Complex(sd.weights[t], 0.0);
            rhs[t] = tst::quad_global_form(p.grids.fine, p.k, p.eps, p.eta, v, basis);
            basis[sd.nodes[t]] = Complex{};
        }
        const auto via_projection = tst::dense_solve(local, rhs);

        const SparseComplexMatrix denergy =
            assemble_local_energy(p.grids.fine, p.decomp, s, p.k);
        std::vector<Complex> diff(nl), tmp(nl);
        for (int t = 0; t < nl; ++t) diff[t] = via_matrices[t] - via_projection[t];
        denergy.mult(diff, tmp);
        const double err = std::sqrt(std::abs(dot(tmp, diff).real()));
        std::vector<Complex> ref(via_projection);
        denergy.mult(ref, tmp);
        const double scale = std::sqrt(std::abs(dot(tmp, ref).real()));
        CHECK(err <= 1e-10 * std::max(scale, 1e-30));
    }
}

TEST_CASE("near-singular local factorizations are surfaced, structural ones abort") {
    const FineMesh mesh(1);
    const auto decomp = SubdomainDecomposition::whole_domain(mesh);

    SUBCASE("near-singular flag") {
        TripletList t;
        for (int i = 0; i < 4; ++i)
            t.add(i, i, i == 3 ? Complex(1e-16, 0.0) : Complex(1.0, 0.0));
        LocalSystem sys;
        sys.subdomain = 0;
        sys.matrix = t.assemble(4, 4);
        sys.unknowns = {0, 1, 2, 3};
        const SchwarzPreconditioner pc = SchwarzPreconditioner::build(decomp, {sys});
        CHECK(pc.diagnostics()[0].near_singular);
    }
    SUBCASE("structural failure names the subdomain") {
        TripletList t;
        t.add(0, 0, Complex(1.0, 0.0));
        t.add(1, 1, Complex(1.0, 0.0));
        t.add(2, 2, Complex(1.0, 0.0));
        t.add(0, 3, Complex(1.0, 0.0)); // row 3 empty, column 3 never pivotal
        LocalSystem sys;
        sys.subdomain = 0;
        sys.matrix = t.assemble(4, 4);
        sys.unknowns = {0, 1, 2, 3};
        try {
            SchwarzPreconditioner::build(decomp, {sys});
            FAIL("expected a structural failure");
        } catch (const StructurallySingular& e) {
            CHECK(std::string(e.what()).find("subdomain 0") != std::string::npos);
        }
    }
}
