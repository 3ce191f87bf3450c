#include "helmdd/schwarz.hpp"

#include <algorithm>

#include "helmdd/parallel.hpp"

namespace helmdd {

SchwarzPreconditioner SchwarzPreconditioner::build(const SubdomainDecomposition& decomp,
                                                   const std::vector<LocalSystem>& systems,
                                                   const SchwarzOptions& opt) {
    if (static_cast<int>(systems.size()) != decomp.count())
        throw std::invalid_argument("SchwarzPreconditioner: need one local system per subdomain");

    SchwarzPreconditioner p;
    p.n_ = decomp.fine_node_count();
    p.workers_ = std::max(1, opt.workers);
    p.weighting_ = opt.weighting;
    p.parts_.resize(systems.size());
    p.info_.resize(systems.size());
    if (!systems.empty()) p.bc_ = systems.front().bc;

    parallel_for(static_cast<int>(systems.size()), p.workers_, [&](int s) {
        const LocalSystem& sys = systems[s];
        if (sys.subdomain != s || sys.bc != p.bc_)
            throw std::invalid_argument("SchwarzPreconditioner: local systems out of order");
        const Subdomain& sd = decomp.subdomain(s);
        Part& part = p.parts_[s];
        part.unknowns = sys.unknowns;
        part.nodes.reserve(sys.unknowns.size());
        part.weights.reserve(sys.unknowns.size());
        for (int t : sys.unknowns) {
            part.nodes.push_back(sd.nodes[t]);
            part.weights.push_back(sd.weights[t]);
        }
        try {
            part.factor = SparseLU::factorize(sys.matrix, opt.factorization);
        } catch (const StructurallySingular& e) {
            throw StructurallySingular("subdomain " + std::to_string(s) + ": " + e.what());
        }
        p.info_[s] = {s, part.factor.dimension(), part.factor.near_singular(),
                      part.factor.min_pivot()};
    });
    return p;
}

void SchwarzPreconditioner::gather(int s, std::span<const Complex> v,
                                   std::span<Complex> local) const {
    const Part& part = parts_[s];
    for (std::size_t t = 0; t < part.nodes.size(); ++t)
        local[t] = part.weights[t] * v[part.nodes[t]];
}

void SchwarzPreconditioner::scatter_add(int s, std::span<const Complex> local,
                                        std::span<Complex> out) const {
    const Part& part = parts_[s];
    for (std::size_t t = 0; t < part.nodes.size(); ++t)
        out[part.nodes[t]] += part.weights[t] * local[t];
}

namespace {

template <class Solve>
void apply_impl(const SchwarzPreconditioner& p, int workers, bool weight_in, bool weight_out,
                std::span<const Complex> v, std::span<Complex> out, const Solve& solve) {
    if (static_cast<int>(v.size()) != p.dimension() ||
        static_cast<int>(out.size()) != p.dimension())
        throw std::invalid_argument("SchwarzPreconditioner::apply: dimension mismatch");

    const int parts = p.count();
    std::vector<std::vector<Complex>> local(parts);
    parallel_for(parts, workers, [&](int s) {
        std::vector<Complex> in(p.local_dimension(s));
        const auto nodes = p.local_nodes(s);
        const auto w = p.local_weights(s);
        for (std::size_t t = 0; t < nodes.size(); ++t)
            in[t] = (weight_in ? w[t] : 1.0) * v[nodes[t]];
        local[s] = solve(s, in);
    });
    std::fill(out.begin(), out.end(), Complex{});
    for (int s = 0; s < parts; ++s) {
        const auto nodes = p.local_nodes(s);
        const auto w = p.local_weights(s);
        for (std::size_t t = 0; t < nodes.size(); ++t)
            out[nodes[t]] += (weight_out ? w[t] : 1.0) * local[s][t];
    }
}

} // namespace

void SchwarzPreconditioner::apply(std::span<const Complex> v, std::span<Complex> out) const {
    const bool sym = weighting_ == SchwarzWeighting::SymmetricHat;
    apply_impl(*this, workers_, sym, true, v, out,
               [this](int s, const std::vector<Complex>& in) {
                   return parts_[s].factor.solve(in);
               });
}

void SchwarzPreconditioner::apply_adjoint(std::span<const Complex> v,
                                          std::span<Complex> out) const {
    const bool sym = weighting_ == SchwarzWeighting::SymmetricHat;
    apply_impl(*this, workers_, true, sym, v, out,
               [this](int s, const std::vector<Complex>& in) {
                   return parts_[s].factor.solve_adjoint(in);
               });
}

} // namespace helmdd
