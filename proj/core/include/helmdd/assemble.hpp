#pragma once

#include <span>
#include <vector>

#include "helmdd/grid.hpp"
#include "helmdd/sparse.hpp"

namespace helmdd {

/// The three real symmetric forms of the discretization: stiffness S,
/// domain mass M, and boundary mass N (supported on boundary node pairs).
struct FemForms {
    SparseComplexMatrix stiffness;
    SparseComplexMatrix mass;
    SparseComplexMatrix boundary_mass;
};

/// Exact P1 element integrals; no quadrature error.
FemForms assemble_forms(const FineMesh& fine);

/// Closed-form P1 element matrices for an arbitrary triangle / edge,
/// row-major. These are what the mesh loops use.
void element_stiffness(const double* xs, const double* ys, double out[9]);
void element_mass(double area, double out[9]);
void element_boundary_mass(double length, double out[4]);
double triangle_area(const double* xs, const double* ys);

/// System matrix S - (k^2 + i eps) M - i eta N. Warns (stderr) when
/// |eps| > k^2, which leaves the regime the analysis covers.
SparseComplexMatrix combine(const FemForms& forms, double k, double eps, Complex eta);

/// Energy matrix S + k^2 M: the Hermitian positive definite weight behind
/// the energy norm used by all diagnostics.
SparseComplexMatrix energy_matrix(const FemForms& forms, double k);

/// Impedance: Robin term over the entire subdomain boundary.
/// Dirichlet: homogeneous Dirichlet on the entire subdomain boundary
/// (all rim unknowns eliminated, no boundary term).
/// InterfaceDirichlet: homogeneous Dirichlet on the internal interfaces
/// only; the parts of the subdomain boundary lying on the global boundary
/// keep the impedance term. This is the variant behind the reported
/// Dirichlet-subdomain iteration tables.
enum class BoundaryCondition { Impedance, Dirichlet, InterfaceDirichlet };

enum class EtaRule {
    WavenumberSign, // eta = sign(eps) k, with sign(0) = +1
    SqrtShifted,    // eta = sqrt(k^2 + i eps), branch cut on the positive real axis
};

Complex impedance_coefficient(double k, double eps, EtaRule rule);

/// Discrete subproblem on one subdomain. For the impedance condition the
/// boundary term is assembled over the entire subdomain boundary on the
/// restricted mesh (this is not a submatrix of the global system). For the
/// Dirichlet condition the boundary rows and columns are eliminated.
struct LocalSystem {
    int subdomain = 0;
    BoundaryCondition bc = BoundaryCondition::Impedance;
    SparseComplexMatrix matrix;
    /// Local node indices carrying unknowns: all of them for impedance,
    /// the interior ones for Dirichlet.
    std::vector<int> unknowns;
};

LocalSystem assemble_local(const FineMesh& fine, const SubdomainDecomposition& decomp, int id,
                           double k, double eps, Complex eta, BoundaryCondition bc);

/// Local energy matrix S_l + k^2 M_l over all nodes of the subdomain mesh.
SparseComplexMatrix assemble_local_energy(const FineMesh& fine,
                                          const SubdomainDecomposition& decomp, int id, double k);

/// Right-hand side for the manufactured plane wave u(x) = exp(i k x.d):
/// volume load f = -i eps u and impedance data g = (i k d.n - i eta) u,
/// both integrated exactly through their P1 / per-edge nodal interpolants.
std::vector<Complex> assemble_rhs_planewave(const FineMesh& fine, double k, double eps,
                                            Complex eta, double dir_x, double dir_y);

/// Nodal interpolant of the plane wave itself (reference solution).
std::vector<Complex> planewave_nodal(const FineMesh& fine, double k, double dir_x, double dir_y);

} // namespace helmdd
