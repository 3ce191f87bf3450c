#pragma once

#include <span>
#include <vector>

#include "helmdd/assemble.hpp"
#include "helmdd/factorization.hpp"
#include "helmdd/grid.hpp"

namespace helmdd {

/// Placement of the partition-of-unity weights around the local solves.
/// SymmetricHat is the written form of the preconditioner (weights on both
/// gather and scatter; complex symmetric). ScatterHat gathers the plain
/// nodal values and weights only the scatter; it is the combination that
/// reproduces the reported iteration tables.
enum class SchwarzWeighting { SymmetricHat, ScatterHat };

struct SchwarzOptions {
    int workers = 1; // concurrent local factorizations / solves
    SchwarzWeighting weighting = SchwarzWeighting::SymmetricHat;
    FactorizationOptions factorization;
};

struct SubdomainSolveInfo {
    int subdomain = 0;
    int dimension = 0;
    bool near_singular = false;
    double min_pivot = 0.0;
};

/// One-level additive Schwarz preconditioner: the sum of weighted local
/// solves  sum_l R_l^T A_l^{-1} R_l, where R_l gathers nodal values with the
/// partition-of-unity weights and R_l^T scatters them back with the same
/// weights. All local matrices are factorized at build time; the object is
/// immutable afterwards and safe for concurrent applies.
class SchwarzPreconditioner {
  public:
    /// One LocalSystem per subdomain, in subdomain order. Near-singular
    /// local factorizations are reported in diagnostics() but do not abort;
    /// structural failures abort with the subdomain id.
    static SchwarzPreconditioner build(const SubdomainDecomposition& decomp,
                                       const std::vector<LocalSystem>& systems,
                                       const SchwarzOptions& opt = {});

    int dimension() const { return n_; }
    int count() const { return static_cast<int>(parts_.size()); }
    BoundaryCondition bc() const { return bc_; }
    SchwarzWeighting weighting() const { return weighting_; }
    const std::vector<SubdomainSolveInfo>& diagnostics() const { return info_; }

    /// out = sum_l (scatter) A_l^{-1} (gather) v with the configured weight
    /// placement. Local solves may run concurrently; accumulation always
    /// happens in subdomain order.
    void apply(std::span<const Complex> v, std::span<Complex> out) const;
    /// Adjoint of apply (conjugate-transposed local solves, weights swapped
    /// between gather and scatter).
    void apply_adjoint(std::span<const Complex> v, std::span<Complex> out) const;

    int local_dimension(int s) const { return static_cast<int>(parts_[s].nodes.size()); }
    const SparseLU& factor(int s) const { return parts_[s].factor; }
    std::span<const int> local_nodes(int s) const { return parts_[s].nodes; }
    std::span<const double> local_weights(int s) const { return parts_[s].weights; }
    /// Indices of the unknowns within the subdomain's full node list.
    std::span<const int> local_unknowns(int s) const { return parts_[s].unknowns; }

    /// (R_l v)_t = weight_t * v[node_t]
    void gather(int s, std::span<const Complex> v, std::span<Complex> local) const;
    /// out[node_t] += weight_t * local_t
    void scatter_add(int s, std::span<const Complex> local, std::span<Complex> out) const;

  private:
    struct Part {
        std::vector<int> nodes;      // global node of each unknown
        std::vector<double> weights; // weight of each unknown
        std::vector<int> unknowns;   // position within the subdomain node list
        SparseLU factor;
    };
    std::vector<Part> parts_;
    std::vector<SubdomainSolveInfo> info_;
    int n_ = 0;
    int workers_ = 1;
    BoundaryCondition bc_ = BoundaryCondition::Impedance;
    SchwarzWeighting weighting_ = SchwarzWeighting::SymmetricHat;
};

} // namespace helmdd
