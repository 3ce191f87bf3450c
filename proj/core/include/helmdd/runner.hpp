#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "helmdd/assemble.hpp"
#include "helmdd/gmres.hpp"
#include "helmdd/grid.hpp"
#include "helmdd/schwarz.hpp"

namespace helmdd {

/// Absorption rules used by the experiment protocol: 0, k, or k^{1+beta}
/// with beta = alpha + 0.1.
enum class EpsRule { Zero, Wavenumber, WavenumberPlus };

double resolve_eps(EpsRule rule, double k, double alpha);
EpsRule eps_rule_from_string(const std::string& s);
std::string to_string(EpsRule rule);

struct ExperimentConfig {
    std::string id = "custom"; // E1..E6 or custom
    std::vector<double> k_list = {10, 20, 40, 60};
    std::vector<double> alpha_list = {0.2, 0.3, 0.4, 0.5};
    std::vector<int> m_list; // fixed-subdomain mode when nonempty (overrides alpha_list)
    EpsRule eps_prob = EpsRule::Wavenumber;
    EpsRule eps_prec = EpsRule::Wavenumber;
    BoundaryCondition bc = BoundaryCondition::Impedance;
    GmresConfig::Start start = GmresConfig::Start::Random;
    EtaRule eta_rule = EtaRule::WavenumberSign;
    /// The experiment protocol that reproduces the reported iteration
    /// tables: plain gather / hat scatter, right preconditioning with the
    /// true-residual stopping rule. The energy inner product requires the
    /// left side.
    SchwarzWeighting weighting = SchwarzWeighting::ScatterHat;
    GmresConfig::Side side = GmresConfig::Side::Right;
    double tolerance = 1e-6;
    int max_iterations = 500;
    double c_fine = 1.0;
    bool energy_inner_product = false; // minimize in the energy norm instead of Euclidean
    std::uint64_t seed = 1;
    int workers = 1; // concurrent cells
    std::int64_t max_nodes = 4'000'000;

    /// Progress hook, called as cells finish (from worker threads, serialized).
    std::function<void(const struct CellResult&)> on_cell;
};

/// Presets for the studied configurations. E1: both absorptions k^{1+beta};
/// E2: both k; E4: pure Helmholtz problem, absorption k in the
/// preconditioner; E5: like E4 on fixed subdomain counts M = 4, 8;
/// E6: like E4 with Dirichlet subdomain solves. E3 is an alias of E2 kept
/// for symmetric numbering.
ExperimentConfig experiment_preset(const std::string& id);

struct CellResult {
    double k = 0.0;
    double alpha = 0.0; // meaningful only when m_mode is false
    bool m_mode = false;
    int m_coarse = 0, m_fine = 0, n = 0;
    double eps_prob = 0.0, eps_prec = 0.0;
    BoundaryCondition bc = BoundaryCondition::Impedance;
    GmresConfig::Start start = GmresConfig::Start::Random;
    std::uint64_t seed = 0;
    int iterations = 0;
    bool converged = false;
    double final_residual = 0.0; // relative to the initial residual
    double wall_ms = 0.0;
    std::string error; // nonempty when the cell failed; other fields sentinel
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<CellResult> cells; // row-major: k outer, alpha (or M) inner
    int columns = 0;
};

/// Runs every (k, alpha-or-M) cell: grids, assembly, preconditioner,
/// plane-wave right-hand side with direction (1,1)/sqrt(2), GMRES. Cell
/// failures are recorded in the row, not thrown.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Iteration-count grid, k rows by alpha (or M) columns.
std::string emit_markdown(const ExperimentResult& result);

/// One row per cell:
/// experiment,k,alpha,M,m_fine,n,eps_prob,eps_prec,bc,start,seed,iterations,
/// converged,final_residual,wall_ms. Failed cells carry iterations = -1 and
/// final_residual = -1.
std::string emit_csv(const ExperimentResult& result);
std::vector<CellResult> parse_csv(std::istream& in, std::string* experiment_id = nullptr);

} // namespace helmdd
