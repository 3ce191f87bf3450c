#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "helmdd/grid.hpp"

using namespace helmdd;

TEST_CASE("grid sizing follows the wavenumber rules") {
    SUBCASE("k=40 alpha=0.2") {
        const auto g = build_grids(40.0, 0.2);
        CHECK(g.coarse.cells_per_side == 2);
        CHECK(g.fine.squares_per_side() == 254);
        CHECK(g.fine.node_count() == 65025);
    }
    SUBCASE("k=100 alpha=0.5") {
        const auto g = build_grids(100.0, 0.5);
        CHECK(g.coarse.cells_per_side == 10);
        CHECK(g.coarse.cell_size() == doctest::Approx(0.1));
    }
    SUBCASE("k=4 alpha=0") {
        const auto g = build_grids(4.0, 0.0);
        CHECK(g.coarse.cells_per_side == 1);
    }
    SUBCASE("fixed coarse count") {
        const auto g = build_grids_fixed(10.0, 4);
        CHECK(g.coarse.cells_per_side == 4);
        CHECK(g.fine.squares_per_side() % 4 == 0);
    }
}

TEST_CASE("grid construction rejects bad input") {
    CHECK_THROWS_AS(build_grids(std::nan(""), 0.3), std::invalid_argument);
    CHECK_THROWS_AS(build_grids(10.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(build_grids(10.0, 1.5), std::invalid_argument);
    GridOptions tiny;
    tiny.max_nodes = 100;
    try {
        build_grids(40.0, 0.2, tiny);
        FAIL("expected a size rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("problem too large") != std::string::npos);
    }
}

TEST_CASE("fine mesh counts and shape regularity") {
    const FineMesh mesh(6);
    CHECK(mesh.node_count() == 49);
    CHECK(mesh.triangle_count() == 72);
    CHECK(mesh.diameter() == doctest::Approx(std::sqrt(2.0) / 6.0));

    const double leg = 1.0 / 6.0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto v = mesh.triangle(t);
        double side[3];
        for (int e = 0; e < 3; ++e) {
            const auto a = mesh.node_coords(v[e]);
            const auto b = mesh.node_coords(v[(e + 1) % 3]);
            side[e] = std::hypot(a[0] - b[0], a[1] - b[1]);
        }
        std::sort(side, side + 3);
        CHECK(side[0] == doctest::Approx(leg));
        CHECK(side[1] == doctest::Approx(leg));
        CHECK(side[2] == doctest::Approx(leg * std::sqrt(2.0)));
    }
}

TEST_CASE("fine mesh is conforming") {
    const FineMesh mesh(5);
    std::map<std::pair<int, int>, int> edge_count;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        const auto v = mesh.triangle(t);
        for (int e = 0; e < 3; ++e) {
            const int a = std::min(v[e], v[(e + 1) % 3]);
            const int b = std::max(v[e], v[(e + 1) % 3]);
            ++edge_count[{a, b}];
        }
    }
    for (const auto& [edge, count] : edge_count) {
        const bool boundary = mesh.node_on_boundary(edge.first) &&
                              mesh.node_on_boundary(edge.second) && count == 1;
        CHECK((count == 2 || boundary));
    }
}

TEST_CASE("every fine triangle nests in one coarse cell") {
    const auto g = build_grids_fixed(8.0, 3, GridOptions{0.5, 4000000});
    const double H = g.coarse.cell_size();
    for (int t = 0; t < g.fine.triangle_count(); ++t) {
        const auto v = g.fine.triangle(t);
        double xmin = 1.0, xmax = 0.0, ymin = 1.0, ymax = 0.0;
        for (int i = 0; i < 3; ++i) {
            const auto xy = g.fine.node_coords(v[i]);
            xmin = std::min(xmin, xy[0]);
            xmax = std::max(xmax, xy[0]);
            ymin = std::min(ymin, xy[1]);
            ymax = std::max(ymax, xy[1]);
        }
        const int cx = static_cast<int>(std::floor(xmin / H + 1e-12));
        const int cy = static_cast<int>(std::floor(ymin / H + 1e-12));
        CHECK(xmax <= (cx + 1) * H + 1e-12);
        CHECK(ymax <= (cy + 1) * H + 1e-12);
    }
}

TEST_CASE("M=1 decomposition: four copies of the domain with corner hats") {
    const FineMesh mesh(4);
    const auto d = build_decomposition(CoarseGrid{1}, mesh);
    REQUIRE(d.count() == 4);
    for (int s = 0; s < 4; ++s) CHECK(d.subdomain(s).node_count() == mesh.node_count());

    // subdomain anchored at coarse node (0,0): weight (1-x)(1-y)
    const Subdomain& s00 = d.subdomain(0);
    REQUIRE(s00.corner_x == 0);
    REQUIRE(s00.corner_y == 0);
    for (int t = 0; t < s00.node_count(); ++t) {
        const auto xy = mesh.node_coords(s00.nodes[t]);
        CHECK(s00.weights[t] == doctest::Approx((1.0 - xy[0]) * (1.0 - xy[1])).epsilon(1e-14));
    }
}

TEST_CASE("M=2 decomposition geometry") {
    const FineMesh mesh(4);
    const auto d = build_decomposition(CoarseGrid{2}, mesh);
    REQUIRE(d.count() == 9);
    CHECK(d.overlap_count() == 4);

    // center subdomain covers everything and peaks at the midpoint
    const Subdomain* center = nullptr;
    for (int s = 0; s < 9; ++s)
        if (d.subdomain(s).corner_x == 1 && d.subdomain(s).corner_y == 1)
            center = &d.subdomain(s);
    REQUIRE(center != nullptr);
    CHECK(center->node_count() == mesh.node_count());
    const int mid = mesh.node_index(2, 2);
    for (int t = 0; t < center->node_count(); ++t)
        if (center->nodes[t] == mid) CHECK(center->weights[t] == 1.0);

    // corner subdomains span one coarse cell, edges two, the center four
    std::multiset<int> sizes;
    for (int s = 0; s < 9; ++s) sizes.insert(d.subdomain(s).node_count());
    CHECK(sizes.count(9) == 4);  // (q+1)^2, q=2
    CHECK(sizes.count(15) == 4); // (q+1)(2q+1)
    CHECK(sizes.count(25) == 1); // (2q+1)^2
}

TEST_CASE("partition of unity sums to one at every node") {
    for (auto [M, m] : std::initializer_list<std::pair<int, int>>{{1, 3}, {2, 4}, {3, 12}, {5, 20}}) {
        const FineMesh mesh(m);
        const auto d = build_decomposition(CoarseGrid{M}, mesh);
        std::vector<double> sum(mesh.node_count(), 0.0);
        std::vector<int> support_count(mesh.node_count(), 0);
        std::vector<int> member_count(mesh.node_count(), 0);
        for (int s = 0; s < d.count(); ++s) {
            const Subdomain& sd = d.subdomain(s);
            for (int t = 0; t < sd.node_count(); ++t) {
                sum[sd.nodes[t]] += sd.weights[t];
                ++member_count[sd.nodes[t]];
                if (sd.weights[t] > 0.0) ++support_count[sd.nodes[t]];
                CHECK(sd.weights[t] >= 0.0);
                CHECK(sd.weights[t] <= 1.0);
            }
        }
        for (int p = 0; p < mesh.node_count(); ++p) {
            CHECK(std::abs(sum[p] - 1.0) <=
                  8.0 * std::numeric_limits<double>::epsilon());
            CHECK(member_count[p] >= 1);
            CHECK(support_count[p] <= d.overlap_count());
        }
    }
}

TEST_CASE("hat weights vanish exactly at foreign coarse nodes") {
    const FineMesh mesh(8);
    const auto d = build_decomposition(CoarseGrid{2}, mesh);
    for (int s = 0; s < d.count(); ++s) {
        const Subdomain& sd = d.subdomain(s);
        for (int cy = 0; cy <= 2; ++cy)
            for (int cx = 0; cx <= 2; ++cx) {
                const int node = mesh.node_index(4 * cx, 4 * cy);
                for (int t = 0; t < sd.node_count(); ++t)
                    if (sd.nodes[t] == node)
                        CHECK(sd.weights[t] ==
                              (cx == sd.corner_x && cy == sd.corner_y ? 1.0 : 0.0));
            }
    }
}

TEST_CASE("boundary classification marks the subdomain rim") {
    const FineMesh mesh(6);
    const auto d = build_decomposition(CoarseGrid{3}, mesh);
    for (int s = 0; s < d.count(); ++s) {
        const Subdomain& sd = d.subdomain(s);
        for (int j = sd.j0; j <= sd.j1; ++j)
            for (int i = sd.i0; i <= sd.i1; ++i) {
                const bool rim = i == sd.i0 || i == sd.i1 || j == sd.j0 || j == sd.j1;
                CHECK(static_cast<bool>(sd.on_boundary[sd.local_index(i, j)]) == rim);
            }
    }
}

TEST_CASE("non-nesting meshes are rejected") {
    const FineMesh mesh(4);
    CHECK_THROWS_AS(build_decomposition(CoarseGrid{3}, mesh), std::invalid_argument);
}

TEST_CASE("decomposition construction is deterministic") {
    const FineMesh mesh(12);
    const auto a = build_decomposition(CoarseGrid{3}, mesh);
    const auto b = build_decomposition(CoarseGrid{3}, mesh);
    REQUIRE(a.count() == b.count());
    for (int s = 0; s < a.count(); ++s) {
        CHECK(a.subdomain(s).nodes == b.subdomain(s).nodes);
        CHECK(a.subdomain(s).weights == b.subdomain(s).weights);
    }
}

TEST_CASE("whole-domain cover has unit weights") {
    const FineMesh mesh(5);
    const auto d = SubdomainDecomposition::whole_domain(mesh);
    REQUIRE(d.count() == 1);
    CHECK(d.overlap_count() == 1);
    const Subdomain& s = d.subdomain(0);
    CHECK(s.node_count() == mesh.node_count());
    for (double w : s.weights) CHECK(w == 1.0);
}

TEST_CASE("mesh dump lists nodes and triangles") {
    const FineMesh mesh(2);
    std::ostringstream out;
    mesh.dump(out);
    const std::string text = out.str();
    CHECK(text.find("# nodes 9") != std::string::npos);
    CHECK(text.find("# triangles 8") != std::string::npos);
}
