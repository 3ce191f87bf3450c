#include "helmdd/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <mutex>
#include <sstream>

#include "helmdd/parallel.hpp"
#include "helmdd/schwarz.hpp"

namespace helmdd {

double resolve_eps(EpsRule rule, double k, double alpha) {
    switch (rule) {
        case EpsRule::Zero: return 0.0;
        case EpsRule::Wavenumber: return k;
        case EpsRule::WavenumberPlus:
            if (!(alpha >= 0.0))
                throw std::invalid_argument("eps rule k^{1+beta} needs alpha (beta = alpha + 0.1)");
            return std::pow(k, 1.1 + alpha);
    }
    throw std::invalid_argument("unknown eps rule");
}

EpsRule eps_rule_from_string(const std::string& s) {
    if (s == "0") return EpsRule::Zero;
    if (s == "k") return EpsRule::Wavenumber;
    if (s == "k1b") return EpsRule::WavenumberPlus;
    throw std::invalid_argument("eps rule must be one of 0|k|k1b, got '" + s + "'");
}

std::string to_string(EpsRule rule) {
    switch (rule) {
        case EpsRule::Zero: return "0";
        case EpsRule::Wavenumber: return "k";
        case EpsRule::WavenumberPlus: return "k1b";
    }
    return "?";
}

ExperimentConfig experiment_preset(const std::string& id) {
    ExperimentConfig c;
    c.id = id;
    if (id == "E1") {
        c.eps_prob = c.eps_prec = EpsRule::WavenumberPlus;
    } else if (id == "E2" || id == "E3") {
        c.eps_prob = c.eps_prec = EpsRule::Wavenumber;
    } else if (id == "E4") {
        c.eps_prob = EpsRule::Zero;
        c.eps_prec = EpsRule::Wavenumber;
    } else if (id == "E5") {
        c.eps_prob = EpsRule::Zero;
        c.eps_prec = EpsRule::Wavenumber;
        c.m_list = {4, 8};
        c.alpha_list.clear();
    } else if (id == "E6") {
        c.eps_prob = EpsRule::Zero;
        c.eps_prec = EpsRule::Wavenumber;
        c.bc = BoundaryCondition::InterfaceDirichlet;
    } else if (id != "custom") {
        throw std::invalid_argument("unknown experiment id '" + id + "'");
    }
    return c;
}

namespace {

CellResult run_cell(const ExperimentConfig& cfg, double k, double alpha, int fixed_m,
                    std::uint64_t seed) {
    CellResult cell;
    cell.k = k;
    cell.alpha = alpha;
    cell.m_mode = fixed_m > 0;
    cell.bc = cfg.bc;
    cell.start = cfg.start;
    cell.seed = seed;

    const auto t0 = std::chrono::steady_clock::now();
    try {
        GridOptions gopt;
        gopt.c_fine = cfg.c_fine;
        gopt.max_nodes = cfg.max_nodes;
        const GridPair grids = fixed_m > 0 ? build_grids_fixed(k, fixed_m, gopt)
                                           : build_grids(k, alpha, gopt);
        cell.m_coarse = grids.coarse.cells_per_side;
        cell.m_fine = grids.fine.squares_per_side();
        cell.n = grids.fine.node_count();

        cell.eps_prob = resolve_eps(cfg.eps_prob, k, alpha);
        cell.eps_prec = resolve_eps(cfg.eps_prec, k, alpha);
        const Complex eta_prob = impedance_coefficient(k, cell.eps_prob, cfg.eta_rule);
        const Complex eta_prec = impedance_coefficient(k, cell.eps_prec, cfg.eta_rule);

        const SubdomainDecomposition decomp = build_decomposition(grids.coarse, grids.fine);
        const FemForms forms = assemble_forms(grids.fine);
        const SparseComplexMatrix system = combine(forms, k, cell.eps_prob, eta_prob);

        std::vector<LocalSystem> locals;
        locals.reserve(decomp.count());
        for (int s = 0; s < decomp.count(); ++s)
            locals.push_back(
                assemble_local(grids.fine, decomp, s, k, cell.eps_prec, eta_prec, cfg.bc));
        SchwarzOptions sopt;
        sopt.weighting = cfg.weighting;
        const SchwarzPreconditioner precond = SchwarzPreconditioner::build(decomp, locals, sopt);

        const std::vector<Complex> rhs = assemble_rhs_planewave(
            grids.fine, k, cell.eps_prob, eta_prob, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));

        SparseComplexMatrix energy;
        GmresConfig gc;
        gc.tolerance = cfg.tolerance;
        gc.max_iterations = cfg.max_iterations;
        gc.start = cfg.start;
        gc.seed = seed;
        gc.side = cfg.side;
        if (cfg.energy_inner_product) {
            if (gc.side != GmresConfig::Side::Left)
                throw std::invalid_argument(
                    "run_experiment: the energy inner product needs left preconditioning");
            energy = energy_matrix(forms, k);
            gc.weight = &energy;
        }

        const GmresResult sol = gmres(
            [&](std::span<const Complex> x, std::span<Complex> y) { system.mult(x, y); },
            [&](std::span<const Complex> x, std::span<Complex> y) { precond.apply(x, y); }, rhs,
            gc);

        cell.iterations = sol.iterations;
        cell.converged = sol.converged;
        cell.final_residual = sol.residual_history.front() > 0.0
                                  ? sol.residual_history.back() / sol.residual_history.front()
                                  : 0.0;
    } catch (const std::exception& e) {
        cell.error = e.what();
        cell.iterations = -1;
        cell.converged = false;
        cell.final_residual = -1.0;
    }
    cell.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                       .count();
    return cell;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    const bool m_mode = !cfg.m_list.empty();
    const int cols = m_mode ? static_cast<int>(cfg.m_list.size())
                            : static_cast<int>(cfg.alpha_list.size());
    if (cols == 0 || cfg.k_list.empty())
        throw std::invalid_argument("run_experiment: empty k or alpha/M lists");

    ExperimentResult result;
    result.config = cfg;
    result.columns = cols;
    result.cells.resize(static_cast<std::size_t>(cols) * cfg.k_list.size());

    std::mutex progress;
    parallel_for(static_cast<int>(result.cells.size()), std::max(1, cfg.workers), [&](int idx) {
        const int ik = idx / cols, ic = idx % cols;
        const double k = cfg.k_list[ik];
        const double alpha = m_mode ? -1.0 : cfg.alpha_list[ic];
        const int fixed_m = m_mode ? cfg.m_list[ic] : 0;
        result.cells[idx] = run_cell(cfg, k, alpha, fixed_m, derive_seed(cfg.seed, idx));
        if (cfg.on_cell) {
            std::lock_guard<std::mutex> lock(progress);
            cfg.on_cell(result.cells[idx]);
        }
    });
    return result;
}

std::string emit_markdown(const ExperimentResult& result) {
    const bool m_mode = !result.config.m_list.empty();
    std::ostringstream out;
    char buf[64];
    out << "| k \\ " << (m_mode ? "M" : "alpha") << " |";
    for (int c = 0; c < result.columns; ++c) {
        if (m_mode)
            out << ' ' << result.config.m_list[c] << " |";
        else {
            std::snprintf(buf, sizeof(buf), " %g |", result.config.alpha_list[c]);
            out << buf;
        }
    }
    out << "\n|---|";
    for (int c = 0; c < result.columns; ++c) out << "---|";
    out << '\n';
    for (std::size_t i = 0; i < result.config.k_list.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "| %g |", result.config.k_list[i]);
        out << buf;
        for (int c = 0; c < result.columns; ++c) {
            const CellResult& cell = result.cells[i * result.columns + c];
            if (!cell.error.empty())
                out << " err |";
            else if (!cell.converged)
                out << ' ' << cell.iterations << "* |";
            else
                out << ' ' << cell.iterations << " |";
        }
        out << '\n';
    }
    return out.str();
}

std::string emit_csv(const ExperimentResult& result) {
    std::ostringstream out;
    out << "experiment,k,alpha,M,m_fine,n,eps_prob,eps_prec,bc,start,seed,iterations,converged,"
           "final_residual,wall_ms\n";
    char buf[512];
    for (const CellResult& c : result.cells) {
        std::snprintf(buf, sizeof(buf), "%s,%.17g,", result.config.id.c_str(), c.k);
        out << buf;
        if (!c.m_mode) {
            std::snprintf(buf, sizeof(buf), "%.17g", c.alpha);
            out << buf;
        }
        const char* bc_token = c.bc == BoundaryCondition::Impedance ? "impedance"
                               : c.bc == BoundaryCondition::InterfaceDirichlet
                                   ? "dirichlet"
                                   : "dirichlet-all";
        std::snprintf(buf, sizeof(buf), ",%d,%d,%d,%.17g,%.17g,%s,%s,%llu,%d,%d,%.17g,%.17g\n",
                      c.m_coarse, c.m_fine, c.n, c.eps_prob, c.eps_prec, bc_token,
                      c.start == GmresConfig::Start::Random ? "random" : "zero",
                      static_cast<unsigned long long>(c.seed), c.iterations,
                      c.converged ? 1 : 0, c.final_residual, c.wall_ms);
        out << buf;
    }
    return out.str();
}

std::vector<CellResult> parse_csv(std::istream& in, std::string* experiment_id) {
    std::vector<CellResult> cells;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            f.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (f.size() != 15) throw std::runtime_error("parse_csv: malformed row: " + line);
        if (experiment_id) *experiment_id = f[0];
        CellResult c;
        c.k = std::stod(f[1]);
        c.m_mode = f[2].empty();
        c.alpha = c.m_mode ? -1.0 : std::stod(f[2]);
        c.m_coarse = std::stoi(f[3]);
        c.m_fine = std::stoi(f[4]);
        c.n = std::stoi(f[5]);
        c.eps_prob = std::stod(f[6]);
        c.eps_prec = std::stod(f[7]);
        c.bc = f[8] == "dirichlet"       ? BoundaryCondition::InterfaceDirichlet
               : f[8] == "dirichlet-all" ? BoundaryCondition::Dirichlet
                                         : BoundaryCondition::Impedance;
        c.start = f[9] == "zero" ? GmresConfig::Start::Zero : GmresConfig::Start::Random;
        c.seed = std::stoull(f[10]);
        c.iterations = std::stoi(f[11]);
        c.converged = f[12] == "1";
        c.final_residual = std::stod(f[13]);
        c.wall_ms = std::stod(f[14]);
        cells.push_back(std::move(c));
    }
    return cells;
}

} // namespace helmdd
