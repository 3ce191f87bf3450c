#include "helmdd/grid.hpp"

#include <cmath>
#include <ostream>

namespace helmdd {

FineMesh::FineMesh(int squares_per_side) : m_(squares_per_side) {
    if (m_ < 1) throw std::invalid_argument("FineMesh: need at least one square per side");
}

double FineMesh::diameter() const { return std::sqrt(2.0) / m_; }

std::array<int, 3> FineMesh::triangle(int t) const {
    const int s = t / 2;
    const int sx = s % m_, sy = s / m_;
    const int a = node_index(sx, sy);
    const int b = node_index(sx + 1, sy);
    const int c = node_index(sx, sy + 1);
    const int d = node_index(sx + 1, sy + 1);
    // split along the lower-left to upper-right diagonal
    return (t % 2 == 0) ? std::array<int, 3>{a, b, d} : std::array<int, 3>{a, d, c};
}

FineMesh::BoundaryEdge FineMesh::boundary_edge(int e) const {
    const int side = e / m_, t = e % m_;
    switch (side) {
        case 0: return {node_index(t, 0), node_index(t + 1, 0), 0.0, -1.0};        // bottom
        case 1: return {node_index(m_, t), node_index(m_, t + 1), 1.0, 0.0};       // right
        case 2: return {node_index(t, m_), node_index(t + 1, m_), 0.0, 1.0};       // top
        default: return {node_index(0, t), node_index(0, t + 1), -1.0, 0.0};       // left
    }
}

bool FineMesh::node_on_boundary(int p) const {
    const int i = p % (m_ + 1), j = p / (m_ + 1);
    return i == 0 || i == m_ || j == 0 || j == m_;
}

void FineMesh::dump(std::ostream& out) const {
    out << "# nodes " << node_count() << '\n';
    for (int p = 0; p < node_count(); ++p) {
        const auto xy = node_coords(p);
        out << p << ' ' << xy[0] << ' ' << xy[1] << '\n';
    }
    out << "# triangles " << triangle_count() << '\n';
    for (int t = 0; t < triangle_count(); ++t) {
        const auto v = triangle(t);
        out << t << ' ' << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    }
}

namespace {

GridPair build_with_coarse(double k, int coarse, const GridOptions& opt) {
    if (!(opt.c_fine > 0.0)) throw std::invalid_argument("build_grids: c_fine must be positive");
    const double target = opt.c_fine * std::pow(k, 1.5);
    // Shield ceil against floating noise when the target is an exact multiple.
    auto blocks = static_cast<long long>(std::ceil(target / coarse - 1e-9));
    blocks = std::max<long long>(blocks, 1);
    const long long fine = blocks * coarse;
    const long long nodes = (fine + 1) * (fine + 1);
    if (nodes > opt.max_nodes)
        throw std::invalid_argument("build_grids: problem too large (" + std::to_string(nodes) +
                                    " nodes exceeds cap " + std::to_string(opt.max_nodes) + ")");
    return {CoarseGrid{coarse}, FineMesh(static_cast<int>(fine))};
}

} // namespace

GridPair build_grids(double k, double alpha, const GridOptions& opt) {
    if (!std::isfinite(k) || k < 1.0)
        throw std::invalid_argument("build_grids: wavenumber must be finite and >= 1");
    if (!std::isfinite(alpha) || alpha < 0.0 || alpha > 1.0)
        throw std::invalid_argument("build_grids: alpha must lie in [0, 1]");
    const int coarse = static_cast<int>(std::max<long long>(1, std::llround(std::pow(k, alpha))));
    return build_with_coarse(k, coarse, opt);
}

GridPair build_grids_fixed(double k, int coarse_cells, const GridOptions& opt) {
    if (!std::isfinite(k) || k < 1.0)
        throw std::invalid_argument("build_grids: wavenumber must be finite and >= 1");
    if (coarse_cells < 1) throw std::invalid_argument("build_grids: need at least one coarse cell");
    return build_with_coarse(k, coarse_cells, opt);
}

SubdomainDecomposition SubdomainDecomposition::build(const CoarseGrid& coarse,
                                                     const FineMesh& fine) {
    const int M = coarse.cells_per_side;
    const int m = fine.squares_per_side();
    if (m % M != 0)
        throw std::invalid_argument("build_decomposition: fine mesh does not nest in coarse grid");
    const int q = m / M;

    SubdomainDecomposition d;
    d.fine_nodes_ = fine.node_count();
    d.coarse_cells_ = M;
    d.ratio_ = q;
    d.overlap_count_ = 4; // four bilinear hats are positive inside every coarse cell
    d.subdomains_.reserve(static_cast<std::size_t>(M + 1) * (M + 1));

    const double qq = static_cast<double>(q) * static_cast<double>(q);
    for (int cy = 0; cy <= M; ++cy) {
        for (int cx = 0; cx <= M; ++cx) {
            Subdomain s;
            s.corner_x = cx;
            s.corner_y = cy;
            s.i0 = std::max(cx - 1, 0) * q;
            s.i1 = std::min(cx + 1, M) * q;
            s.j0 = std::max(cy - 1, 0) * q;
            s.j1 = std::min(cy + 1, M) * q;
            s.nodes.reserve(static_cast<std::size_t>(s.nx()) * s.ny());
            s.weights.reserve(s.nodes.capacity());
            s.on_boundary.reserve(s.nodes.capacity());
            for (int j = s.j0; j <= s.j1; ++j) {
                const int wy = q - std::abs(j - cy * q);
                for (int i = s.i0; i <= s.i1; ++i) {
                    const int wx = q - std::abs(i - cx * q);
                    s.nodes.push_back(fine.node_index(i, j));
                    s.weights.push_back(static_cast<double>(wx) * static_cast<double>(wy) / qq);
                    s.on_boundary.push_back(i == s.i0 || i == s.i1 || j == s.j0 || j == s.j1);
                }
            }
            d.subdomains_.push_back(std::move(s));
        }
    }
    return d;
}

SubdomainDecomposition SubdomainDecomposition::whole_domain(const FineMesh& fine) {
    const int m = fine.squares_per_side();
    SubdomainDecomposition d;
    d.fine_nodes_ = fine.node_count();
    d.coarse_cells_ = 0;
    d.ratio_ = m;
    d.overlap_count_ = 1;

    Subdomain s;
    s.i0 = s.j0 = 0;
    s.i1 = s.j1 = m;
    s.nodes.resize(fine.node_count());
    for (int p = 0; p < fine.node_count(); ++p) s.nodes[p] = p;
    s.weights.assign(fine.node_count(), 1.0);
    s.on_boundary.resize(fine.node_count());
    for (int p = 0; p < fine.node_count(); ++p) s.on_boundary[p] = fine.node_on_boundary(p);
    d.subdomains_.push_back(std::move(s));
    return d;
}

double SubdomainDecomposition::overlap_width() const {
    return coarse_cells_ > 0 ? 1.0 / coarse_cells_ : 1.0;
}

double SubdomainDecomposition::max_subdomain_extent() const {
    int widest = 1;
    int squares = 1;
    for (const auto& s : subdomains_) {
        widest = std::max(widest, std::max(s.i1 - s.i0, s.j1 - s.j0));
        squares = std::max(squares, s.i1);
    }
    return static_cast<double>(widest) / squares;
}

SubdomainDecomposition build_decomposition(const CoarseGrid& coarse, const FineMesh& fine) {
    return SubdomainDecomposition::build(coarse, fine);
}

} // namespace helmdd
