#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "helmdd/assemble.hpp"
#include "helmdd/dense.hpp"
#include "helmdd/gmres.hpp"
#include "helmdd/grid.hpp"
#include "helmdd/schwarz.hpp"

namespace helmdd {

// ---------------------------------------------------------------------------
// Local-solve deviation sigma: per subdomain, the operator norm of
// A_l^{-1} R_l A - R_l measured from the global energy norm into the local
// energy norm on the subdomain mesh.

struct SigmaOptions {
    enum class Method { Auto, PowerIteration, DenseOracle };
    Method method = Method::Auto;
    int dense_cap = 2000;     // Auto switches to the dense oracle up to here
    double tolerance = 1e-6;  // relative eigenvalue stagnation for the power path
    int max_iterations = 500;
    std::uint64_t seed = 0x5165a;
};

struct SigmaResult {
    std::vector<double> values;
    std::vector<std::uint8_t> converged; // per subdomain (power path only)
    double max_value() const;
    bool all_converged() const;
};

SigmaResult estimate_sigma(const FineMesh& fine, const SubdomainDecomposition& decomp,
                           const SparseComplexMatrix& system, const SparseComplexMatrix& energy,
                           const SchwarzPreconditioner& precond, double k,
                           const SigmaOptions& opt = {});

// ---------------------------------------------------------------------------
// Energy-norm operator norm and field-of-values distance of a preconditioned
// operator, on densely materialized instances.

struct NormFovOptions {
    int dense_cap = 4000;
    int sweep_angles = 720;  // rotation sweep resolution
    int refine_levels = 3;   // bisection refinements near the closest angle
    bool want_fov = true;    // the sweep is the expensive part; norm alone is cheap
    int workers = 1;
    double power_tol = 1e-9;
    int power_max_iterations = 5000;
    std::uint64_t seed = 0xf00d;
};

struct NormFovResult {
    double norm = 0.0;         // largest singular value in the energy norm
    double fov_distance = 0.0; // distance of the numerical range from 0 (0 if inside)
};

NormFovResult norm_and_fov(const LinearOp& op, const SparseComplexMatrix& energy,
                           const NormFovOptions& opt = {});

// ---------------------------------------------------------------------------
// Solvability bound Theta(eps, H, k): k^2/|eps| in general; when the
// subdomains are certified starshaped, min(1 + k H, k^2/|eps|) with the
// eps = 0 convention 1 + H k.
double theta_bound(double eps, double subdomain_extent, double k, bool starshaped);

// ---------------------------------------------------------------------------
// Full theory report for one configuration.

struct TheoryOptions {
    SigmaOptions sigma;
    NormFovOptions norm_fov;
    EtaRule eta_rule = EtaRule::WavenumberSign;
    BoundaryCondition bc = BoundaryCondition::Impedance;
    int workers = 1;
};

struct TheoryReport {
    double k = 0.0, eps = 0.0;
    int n = 0;
    std::vector<double> sigma_per_subdomain;
    double sigma = 0.0;
    double norm_dk = 0.0;
    double fov_distance = 0.0;
    int overlap_count = 0;
    double theoretical_upper = 0.0; // Lambda (1 + sigma)
    double theoretical_lower = 0.0; // 1/Lambda - sqrt(2) sigma Lambda
};

TheoryReport theory_report(const FineMesh& fine, const SubdomainDecomposition& decomp, double k,
                           double eps, const TheoryOptions& opt = {});

void print_report(std::ostream& out, const TheoryReport& r);
std::string report_csv_header();
std::string report_csv_row(const TheoryReport& r);

// ---------------------------------------------------------------------------
// Absorption perturbation scan: || I - A_eps^{-1} A ||_{D_k} over a list of
// shifts, the fitted slope against |eps|/k, and the composite norm / field
// of values bounds it implies for preconditioning the unshifted problem.

struct PerturbationOptions {
    NormFovOptions norm_fov;
    int workers = 1;
};

struct PerturbationReport {
    double k = 0.0;
    int n = 0;
    std::vector<double> eps_values;
    std::vector<double> norms;       // || I - A_eps^{-1} A ||_{D_k}
    double slope = 0.0;              // fitted K in norm ~ K |eps| / k
    std::vector<double> c1;          // || B_eps^{-1} A_eps ||_{D_k}
    std::vector<double> c2;          // fov distance of B_eps^{-1} A_eps
    std::vector<double> upper_bound; // C1 (1 + K |eps|/k)
    std::vector<double> lower_bound; // C2 - K C1 |eps|/k
};

PerturbationReport perturbation_scan(const FineMesh& fine, const SubdomainDecomposition& decomp,
                                     double k, std::span<const double> eps_list,
                                     const PerturbationOptions& opt = {});

void print_report(std::ostream& out, const PerturbationReport& r);
std::string perturbation_csv_header();
std::string perturbation_csv_rows(const PerturbationReport& r);

} // namespace helmdd
