#include "helmdd/assemble.hpp"

#include <cmath>
#include <iostream>

namespace helmdd {

double triangle_area(const double* xs, const double* ys) {
    return 0.5 * ((xs[1] - xs[0]) * (ys[2] - ys[0]) - (xs[2] - xs[0]) * (ys[1] - ys[0]));
}

void element_stiffness(const double* xs, const double* ys, double out[9]) {
    const double area = triangle_area(xs, ys);
    const double b[3] = {ys[1] - ys[2], ys[2] - ys[0], ys[0] - ys[1]};
    const double c[3] = {xs[2] - xs[1], xs[0] - xs[2], xs[1] - xs[0]};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[3 * i + j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
}

void element_mass(double area, double out[9]) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[3 * i + j] = area / 12.0 * (i == j ? 2.0 : 1.0);
}

void element_boundary_mass(double length, double out[4]) {
    out[0] = out[3] = length / 3.0;
    out[1] = out[2] = length / 6.0;
}

namespace {

// Shared triangle loop: every triangle of the uniform mesh is congruent to
// one of the two split orientations, so the element matrices are computed
// once per orientation.
template <class NodeMap>
void accumulate_volume(const FineMesh& fine, int i0, int i1, int j0, int j1,
                       const NodeMap& local_of, TripletList& stiff, TripletList& mass) {
    const int m = fine.squares_per_side();
    const double h = 1.0 / m;
    double sk[2][9], mk[9];
    {
        const double xs0[3] = {0, h, h}, ys0[3] = {0, 0, h};  // lower triangle (a,b,d)
        const double xs1[3] = {0, h, 0}, ys1[3] = {0, h, h};  // upper triangle (a,d,c)
        element_stiffness(xs0, ys0, sk[0]);
        element_stiffness(xs1, ys1, sk[1]);
        element_mass(0.5 * h * h, mk);
    }
    for (int sy = j0; sy < j1; ++sy) {
        for (int sx = i0; sx < i1; ++sx) {
            const int a = local_of(sx, sy), b = local_of(sx + 1, sy);
            const int c = local_of(sx, sy + 1), d = local_of(sx + 1, sy + 1);
            const int tri[2][3] = {{a, b, d}, {a, d, c}};
            for (int o = 0; o < 2; ++o)
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) {
                        stiff.add(tri[o][i], tri[o][j], sk[o][3 * i + j]);
                        mass.add(tri[o][i], tri[o][j], mk[3 * i + j]);
                    }
        }
    }
}

} // namespace

FemForms assemble_forms(const FineMesh& fine) {
    const int n = fine.node_count();
    const int m = fine.squares_per_side();
    TripletList stiff(static_cast<std::size_t>(18) * m * m);
    TripletList mass(static_cast<std::size_t>(18) * m * m);
    accumulate_volume(fine, 0, m, 0, m,
                      [&](int i, int j) { return fine.node_index(i, j); }, stiff, mass);

    TripletList bmass(static_cast<std::size_t>(4) * fine.boundary_edge_count());
    double ek[4];
    element_boundary_mass(fine.edge_length(), ek);
    for (int e = 0; e < fine.boundary_edge_count(); ++e) {
        const auto edge = fine.boundary_edge(e);
        const int pq[2] = {edge.a, edge.b};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) bmass.add(pq[i], pq[j], ek[2 * i + j]);
    }
    return {stiff.assemble(n, n), mass.assemble(n, n), bmass.assemble(n, n)};
}

SparseComplexMatrix combine(const FemForms& forms, double k, double eps, Complex eta) {
    if (k < 1.0) throw std::invalid_argument("combine: wavenumber must be >= 1");
    if (std::abs(eps) > k * k)
        std::cerr << "helmdd warning: |eps| = " << std::abs(eps) << " exceeds k^2 = " << k * k
                  << "; outside the absorption range the analysis covers\n";
    const Complex coeff[3] = {Complex(1.0, 0.0), -Complex(k * k, eps), Complex(0.0, -1.0) * eta};
    const SparseComplexMatrix* terms[3] = {&forms.stiffness, &forms.mass, &forms.boundary_mass};
    return linear_combination(coeff, terms);
}

SparseComplexMatrix energy_matrix(const FemForms& forms, double k) {
    const Complex coeff[2] = {Complex(1.0, 0.0), Complex(k * k, 0.0)};
    const SparseComplexMatrix* terms[2] = {&forms.stiffness, &forms.mass};
    return linear_combination(coeff, terms);
}

Complex impedance_coefficient(double k, double eps, EtaRule rule) {
    if (rule == EtaRule::WavenumberSign) return Complex(eps < 0.0 ? -k : k, 0.0);
    // sqrt(k^2 + i eps) with the branch cut along the positive real axis
    const Complex z(k * k, eps);
    double theta = std::atan2(z.imag(), z.real());
    if (theta < 0.0) theta += 2.0 * M_PI;
    return std::sqrt(std::abs(z)) * Complex(std::cos(theta / 2.0), std::sin(theta / 2.0));
}

namespace {

struct LocalAssembly {
    TripletList stiff, mass, bmass;
    int n_local;
};

enum class BoundaryRing { Full, GlobalOnly, None };

LocalAssembly assemble_subdomain_forms(const FineMesh& fine, const Subdomain& s,
                                       BoundaryRing ring) {
    LocalAssembly out{TripletList(static_cast<std::size_t>(18) * s.nx() * s.ny()),
                      TripletList(static_cast<std::size_t>(18) * s.nx() * s.ny()),
                      TripletList(static_cast<std::size_t>(8) * (s.nx() + s.ny())),
                      s.node_count()};
    auto local_of = [&](int i, int j) { return s.local_index(i, j); };
    accumulate_volume(fine, s.i0, s.i1, s.j0, s.j1, local_of, out.stiff, out.mass);
    if (ring == BoundaryRing::None) return out;

    // Full: the impedance term runs over the entire subdomain boundary,
    // including the parts interior to the global domain. GlobalOnly: just
    // the sides coinciding with the global boundary.
    const int m = fine.squares_per_side();
    double ek[4];
    element_boundary_mass(fine.edge_length(), ek);
    auto add_edge = [&](int la, int lb) {
        const int pq[2] = {la, lb};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out.bmass.add(pq[i], pq[j], ek[2 * i + j]);
    };
    const bool full = ring == BoundaryRing::Full;
    for (int i = s.i0; i < s.i1; ++i) {
        if (full || s.j0 == 0) add_edge(local_of(i, s.j0), local_of(i + 1, s.j0));
        if (full || s.j1 == m) add_edge(local_of(i, s.j1), local_of(i + 1, s.j1));
    }
    for (int j = s.j0; j < s.j1; ++j) {
        if (full || s.i0 == 0) add_edge(local_of(s.i0, j), local_of(s.i0, j + 1));
        if (full || s.i1 == m) add_edge(local_of(s.i1, j), local_of(s.i1, j + 1));
    }
    return out;
}

} // namespace

LocalSystem assemble_local(const FineMesh& fine, const SubdomainDecomposition& decomp, int id,
                           double k, double eps, Complex eta, BoundaryCondition bc) {
    if (id < 0 || id >= decomp.count())
        throw std::invalid_argument("assemble_local: subdomain id out of range");
    const Subdomain& s = decomp.subdomain(id);
    const BoundaryRing ring = bc == BoundaryCondition::Impedance          ? BoundaryRing::Full
                              : bc == BoundaryCondition::InterfaceDirichlet ? BoundaryRing::GlobalOnly
                                                                            : BoundaryRing::None;
    LocalAssembly forms = assemble_subdomain_forms(fine, s, ring);
    const int n = forms.n_local;

    LocalSystem sys;
    sys.subdomain = id;
    sys.bc = bc;

    const SparseComplexMatrix st = forms.stiff.assemble(n, n);
    const SparseComplexMatrix ms = forms.mass.assemble(n, n);
    const SparseComplexMatrix bm = forms.bmass.assemble(n, n);
    const Complex coeff[3] = {Complex(1.0, 0.0), -Complex(k * k, eps), Complex(0.0, -1.0) * eta};
    const SparseComplexMatrix* terms[3] = {&st, &ms, &bm};
    const SparseComplexMatrix full = linear_combination(coeff, terms);

    if (bc == BoundaryCondition::Impedance) {
        sys.matrix = full;
        sys.unknowns.resize(n);
        for (int i = 0; i < n; ++i) sys.unknowns[i] = i;
        return sys;
    }

    // Eliminate the Dirichlet trace: the whole rim, or only the parts of it
    // cutting through the domain interior.
    const int m = fine.squares_per_side();
    std::vector<int> reduced(n, -1);
    for (int j = s.j0; j <= s.j1; ++j)
        for (int i = s.i0; i <= s.i1; ++i) {
            bool eliminate;
            if (bc == BoundaryCondition::Dirichlet) {
                eliminate = i == s.i0 || i == s.i1 || j == s.j0 || j == s.j1;
            } else {
                eliminate = (i == s.i0 && s.i0 > 0) || (i == s.i1 && s.i1 < m) ||
                            (j == s.j0 && s.j0 > 0) || (j == s.j1 && s.j1 < m);
            }
            if (!eliminate) {
                const int li = s.local_index(i, j);
                reduced[li] = static_cast<int>(sys.unknowns.size());
                sys.unknowns.push_back(li);
            }
        }
    if (sys.unknowns.empty())
        throw std::runtime_error("assemble_local: Dirichlet subdomain has no interior node");

    const int ni = static_cast<int>(sys.unknowns.size());
    TripletList t;
    for (int i = 0; i < n; ++i) {
        if (reduced[i] < 0) continue;
        auto cs = full.row_cols(i);
        auto vs = full.row_vals(i);
        for (std::size_t p = 0; p < cs.size(); ++p)
            if (reduced[cs[p]] >= 0) t.add(reduced[i], reduced[cs[p]], vs[p]);
    }
    sys.matrix = t.assemble(ni, ni);
    return sys;
}

SparseComplexMatrix assemble_local_energy(const FineMesh& fine,
                                          const SubdomainDecomposition& decomp, int id,
                                          double k) {
    const Subdomain& s = decomp.subdomain(id);
    LocalAssembly forms = assemble_subdomain_forms(fine, s, BoundaryRing::None);
    const int n = forms.n_local;
    const SparseComplexMatrix st = forms.stiff.assemble(n, n);
    const SparseComplexMatrix ms = forms.mass.assemble(n, n);
    const Complex coeff[2] = {Complex(1.0, 0.0), Complex(k * k, 0.0)};
    const SparseComplexMatrix* terms[2] = {&st, &ms};
    return linear_combination(coeff, terms);
}

std::vector<Complex> planewave_nodal(const FineMesh& fine, double k, double dir_x, double dir_y) {
    std::vector<Complex> u(fine.node_count());
    for (int p = 0; p < fine.node_count(); ++p) {
        const auto xy = fine.node_coords(p);
        const double phase = k * (xy[0] * dir_x + xy[1] * dir_y);
        u[p] = Complex(std::cos(phase), std::sin(phase));
    }
    return u;
}

std::vector<Complex> assemble_rhs_planewave(const FineMesh& fine, double k, double eps,
                                            Complex eta, double dir_x, double dir_y) {
    const double dn = std::hypot(dir_x, dir_y);
    if (std::abs(dn - 1.0) > 1e-12)
        throw std::invalid_argument("assemble_rhs_planewave: direction must be a unit vector");

    const std::vector<Complex> u = planewave_nodal(fine, k, dir_x, dir_y);
    std::vector<Complex> f(fine.node_count(), Complex{});

    // Volume load f = -i eps u, integrated through its nodal interpolant.
    if (eps != 0.0) {
        const int m = fine.squares_per_side();
        const double h = 1.0 / m;
        double mk[9];
        element_mass(0.5 * h * h, mk);
        const Complex scale(0.0, -eps);
        for (int t = 0; t < fine.triangle_count(); ++t) {
            const auto v = fine.triangle(t);
            for (int i = 0; i < 3; ++i) {
                Complex acc{};
                for (int j = 0; j < 3; ++j) acc += mk[3 * i + j] * u[v[j]];
                f[v[i]] += scale * acc;
            }
        }
    }

    // Impedance data g = (i k d.n - i eta) u, interpolated per edge so the
    // normal jump at corners is kept.
    double ek[4];
    element_boundary_mass(fine.edge_length(), ek);
    for (int e = 0; e < fine.boundary_edge_count(); ++e) {
        const auto edge = fine.boundary_edge(e);
        const Complex factor = Complex(0.0, k * (dir_x * edge.nx + dir_y * edge.ny)) -
                               Complex(0.0, 1.0) * eta;
        const Complex g[2] = {factor * u[edge.a], factor * u[edge.b]};
        f[edge.a] += ek[0] * g[0] + ek[1] * g[1];
        f[edge.b] += ek[2] * g[0] + ek[3] * g[1];
    }
    return f;
}

} // namespace helmdd
