#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "helmdd/common.hpp"

namespace helmdd {

/// Uniform square partition of the unit square into M x M cells of side 1/M.
/// Subdomains are anchored at its (M+1)^2 nodes.
struct CoarseGrid {
    int cells_per_side = 1;
    double cell_size() const { return 1.0 / cells_per_side; }
    int node_count() const { return (cells_per_side + 1) * (cells_per_side + 1); }
    int cell_count() const { return cells_per_side * cells_per_side; }
};

/// Uniform triangular mesh of the unit square: m x m squares, each split
/// along the lower-left to upper-right diagonal. Nodes sit at (i/m, j/m).
/// The whole boundary carries the impedance condition (no Dirichlet part).
class FineMesh {
  public:
    explicit FineMesh(int squares_per_side);

    int squares_per_side() const { return m_; }
    int nodes_per_side() const { return m_ + 1; }
    int node_count() const { return (m_ + 1) * (m_ + 1); }
    int node_index(int i, int j) const { return j * (m_ + 1) + i; }
    std::array<double, 2> node_coords(int p) const {
        return {static_cast<double>(p % (m_ + 1)) / m_, static_cast<double>(p / (m_ + 1)) / m_};
    }
    double diameter() const; // longest edge: the diagonal sqrt(2)/m

    int triangle_count() const { return 2 * m_ * m_; }
    /// Vertices of triangle t, counterclockwise.
    std::array<int, 3> triangle(int t) const;

    struct BoundaryEdge {
        int a, b;           // endpoint node indices
        double nx, ny;      // outward unit normal
    };
    int boundary_edge_count() const { return 4 * m_; }
    BoundaryEdge boundary_edge(int e) const;
    double edge_length() const { return 1.0 / m_; }

    bool node_on_boundary(int p) const;

    /// Plain-text node/triangle listing for debugging; not a stable format.
    void dump(std::ostream& out) const;

  private:
    int m_;
};

struct GridOptions {
    double c_fine = 1.0;                  // h = sqrt(2) / (c_fine-scaled k^{3/2} count)
    std::int64_t max_nodes = 4'000'000;   // memory guard on the fine mesh
};

struct GridPair {
    CoarseGrid coarse;
    FineMesh fine;
};

/// Coarse cells per side M = max(1, round(k^alpha)); fine squares per side
/// m = M * ceil(c_fine * k^{3/2} / M), so the fine mesh nests in the coarse
/// grid. Rejects non-finite k, alpha outside [0,1], and meshes above the
/// node cap ("problem too large").
GridPair build_grids(double k, double alpha, const GridOptions& opt = {});

/// Same fine-mesh rule with the coarse cell count pinned directly (the
/// fixed-subdomain experiments).
GridPair build_grids_fixed(double k, int coarse_cells, const GridOptions& opt = {});

/// One overlapping subdomain: the axis-aligned block of fine cells around a
/// coarse node, with its node list, partition-of-unity weights, and the
/// boundary classification of each local node.
struct Subdomain {
    int corner_x = 0, corner_y = 0; // anchoring coarse node
    int i0 = 0, i1 = 0, j0 = 0, j1 = 0; // inclusive fine-node index ranges

    std::vector<int> nodes;                       // global node ids
    std::vector<double> weights;                  // partition-of-unity values
    std::vector<std::uint8_t> on_boundary;        // local node on the subdomain boundary

    int nx() const { return i1 - i0 + 1; }
    int ny() const { return j1 - j0 + 1; }
    int node_count() const { return static_cast<int>(nodes.size()); }
    int local_index(int i, int j) const { return (j - j0) * nx() + (i - i0); }
};

/// Overlapping cover of the unit square by one subdomain per coarse node,
/// with bilinear-hat partition-of-unity weights. Immutable once built.
class SubdomainDecomposition {
  public:
    static SubdomainDecomposition build(const CoarseGrid& coarse, const FineMesh& fine);
    /// Degenerate cover: one subdomain equal to the whole domain with unit
    /// weights everywhere.
    static SubdomainDecomposition whole_domain(const FineMesh& fine);

    int count() const { return static_cast<int>(subdomains_.size()); }
    const Subdomain& subdomain(int s) const { return subdomains_[s]; }
    int fine_node_count() const { return fine_nodes_; }
    int coarse_cells_per_side() const { return coarse_cells_; }
    int refinement_ratio() const { return ratio_; }

    /// Maximum number of subdomains covering any point of the domain.
    int overlap_count() const { return overlap_count_; }
    /// Overlap width delta: one coarse cell (the whole domain side for the
    /// degenerate cover).
    double overlap_width() const;
    /// Largest subdomain extent (the diameter scale max H_l).
    double max_subdomain_extent() const;

  private:
    std::vector<Subdomain> subdomains_;
    int fine_nodes_ = 0;
    int coarse_cells_ = 0; // 0 for the whole-domain cover
    int ratio_ = 1;
    int overlap_count_ = 1;
};

/// Spec-level alias for SubdomainDecomposition::build.
SubdomainDecomposition build_decomposition(const CoarseGrid& coarse, const FineMesh& fine);

} // namespace helmdd
