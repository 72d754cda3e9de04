#pragma once

// Brute-force persistent homology oracle over Z/2 for tiny point clouds.
// Independent of the production reduction: it enumerates every simplex,
// computes persistent Betti numbers from ranks of boundary matrices at all
// critical scales and converts the rank function into a feature multiset
// by inclusion-exclusion. Intended for clouds of at most ~10 points.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "delaykit/series.hpp"

namespace delaykit::oracle {

struct OracleFeature {
    int dim = 0;
    double birth = 0.0;
    double death = 0.0;  // +inf for essential features

    bool operator<(const OracleFeature& o) const {
        if (dim != o.dim) return dim < o.dim;
        if (birth != o.birth) return birth < o.birth;
        return death < o.death;
    }
};

namespace detail {

// Rank of a GF(2) matrix given as column bitmasks: eliminate each column
// against the stored basis by the basis columns' lowest set bits.
inline int gf2_rank(const std::vector<std::uint64_t>& cols) {
    int rank = 0;
    std::vector<std::uint64_t> basis;
    for (std::uint64_t col : cols) {
        for (const std::uint64_t b : basis) {
            const std::uint64_t low = b & (~b + 1);
            if (col & low) col ^= b;
        }
        if (col != 0) {
            basis.push_back(col);
            ++rank;
        }
    }
    return rank;
}

// Kernel basis of a GF(2) matrix (columns as bitmasks over row space).
inline std::vector<std::uint64_t> gf2_kernel(const std::vector<std::uint64_t>& cols) {
    const std::size_t n = cols.size();
    // Augment each column with an identity tag in high bits is not possible
    // beyond 64 rows total; track combinations explicitly instead.
    std::vector<std::uint64_t> value(cols.begin(), cols.end());
    std::vector<std::uint64_t> combo(n);
    for (std::size_t i = 0; i < n; ++i) combo[i] = std::uint64_t{1} << i;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> basis;  // (value, combo)
    std::vector<std::uint64_t> kernel;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t v = value[i];
        std::uint64_t c = combo[i];
        for (const auto& [bv, bc] : basis) {
            const std::uint64_t low = bv & (~bv + 1);
            if (v & low) {
                v ^= bv;
                c ^= bc;
            }
        }
        if (v == 0)
            kernel.push_back(c);
        else
            basis.emplace_back(v, c);
    }
    return kernel;
}

}  // namespace detail

inline std::vector<OracleFeature> oracle_diagram(const PointCloud& cloud,
                                                 double max_scale) {
    const int n = static_cast<int>(cloud.n_pts());
    if (n > 10) throw std::invalid_argument("oracle supports at most 10 points");
    const double inf = std::numeric_limits<double>::infinity();

    struct Edge {
        int a, b;
        double len;
    };
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            const double len = point_dist(cloud, static_cast<std::size_t>(a),
                                          static_cast<std::size_t>(b));
            if (len <= max_scale) edges.push_back({a, b, len});
        }
    struct Tri {
        int a, b, c;
        double len;
    };
    std::vector<Tri> tris;
    for (std::size_t i = 0; i < edges.size(); ++i)
        for (std::size_t j = i + 1; j < edges.size(); ++j) {
            const Edge& e = edges[i];
            const Edge& f = edges[j];
            int shared = -1, u = -1, v = -1;
            if (e.a == f.a) { shared = e.a; u = e.b; v = f.b; }
            else if (e.a == f.b) { shared = e.a; u = e.b; v = f.a; }
            else if (e.b == f.a) { shared = e.b; u = e.a; v = f.b; }
            else if (e.b == f.b) { shared = e.b; u = e.a; v = f.a; }
            if (shared < 0 || u >= v) continue;
            // Third edge (u, v) must exist too.
            for (const Edge& g : edges) {
                if (g.a == u && g.b == v) {
                    tris.push_back({std::min({shared, u, v}),
                                    shared + u + v - std::min({shared, u, v}) -
                                        std::max({shared, u, v}),
                                    std::max({shared, u, v}),
                                    std::max(e.len, std::max(f.len, g.len))});
                    break;
                }
            }
        }
    // Deduplicate triangles (each is found three times, once per edge pair).
    std::sort(tris.begin(), tris.end(), [](const Tri& x, const Tri& y) {
        if (x.a != y.a) return x.a < y.a;
        if (x.b != y.b) return x.b < y.b;
        return x.c < y.c;
    });
    tris.erase(std::unique(tris.begin(), tris.end(),
                           [](const Tri& x, const Tri& y) {
                               return x.a == y.a && x.b == y.b && x.c == y.c;
                           }),
               tris.end());

    std::vector<double> scales{0.0};
    for (const Edge& e : edges) scales.push_back(e.len);
    std::sort(scales.begin(), scales.end());
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
    const std::size_t ns = scales.size();

    auto edge_index = [&](int a, int b) {
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (edges[i].a == a && edges[i].b == b) return i;
        return edges.size();
    };

    // dim0: Z_0(b) = span of vertices (all born at 0); B_0(d) = boundaries
    // of edges at d. dim1: Z_1(b) = kernel of d1 at b; B_1(d) = boundaries
    // of triangles at d.
    auto z0_dim = [&](std::size_t) { return n; };
    auto b0_cols = [&](std::size_t si) {
        std::vector<std::uint64_t> cols;
        for (const Edge& e : edges)
            if (e.len <= scales[si])
                cols.push_back((std::uint64_t{1} << e.a) | (std::uint64_t{1} << e.b));
        return cols;
    };
    auto z1_basis = [&](std::size_t si) {
        // d1 restricted to edges at scale si; kernel combos index into the
        // restricted edge list, re-expanded to global edge bit positions.
        std::vector<std::uint64_t> cols;
        std::vector<std::size_t> which;
        for (std::size_t i = 0; i < edges.size(); ++i) {
            if (edges[i].len <= scales[si]) {
                cols.push_back((std::uint64_t{1} << edges[i].a) |
                               (std::uint64_t{1} << edges[i].b));
                which.push_back(i);
            }
        }
        std::vector<std::uint64_t> kernel = detail::gf2_kernel(cols);
        for (auto& k : kernel) {
            std::uint64_t global = 0;
            for (std::size_t bit = 0; bit < which.size(); ++bit)
                if (k & (std::uint64_t{1} << bit))
                    global |= std::uint64_t{1} << which[bit];
            k = global;
        }
        return kernel;
    };
    auto b1_cols = [&](std::size_t si) {
        std::vector<std::uint64_t> cols;
        for (const Tri& t : tris) {
            if (t.len > scales[si]) continue;
            const std::uint64_t col = (std::uint64_t{1} << edge_index(t.a, t.b)) |
                                      (std::uint64_t{1} << edge_index(t.a, t.c)) |
                                      (std::uint64_t{1} << edge_index(t.b, t.c));
            cols.push_back(col);
        }
        return cols;
    };

    // Persistent Betti beta_p(b_i, d_j) = dim Z_p(b) - dim(Z_p(b) ∩ B_p(d)).
    auto beta = [&](int p, std::ptrdiff_t bi, std::size_t dj) -> int {
        if (bi < 0) return 0;
        const std::size_t b = static_cast<std::size_t>(bi);
        if (p == 0) {
            const int z = z0_dim(b);
            // B_0(d) ⊆ Z_0 always, so the intersection is just rank of B_0(d)
            // intersected with the ambient space: rank(B_0(d)) counts merges,
            // but only merges of components alive at b matter. Use the
            // general formula with explicit bases.
            std::vector<std::uint64_t> zbasis(static_cast<std::size_t>(n));
            for (int v = 0; v < n; ++v) zbasis[static_cast<std::size_t>(v)] =
                std::uint64_t{1} << v;
            const auto bcols = b0_cols(dj);
            const int dim_b = detail::gf2_rank(bcols);
            std::vector<std::uint64_t> joint = zbasis;
            joint.insert(joint.end(), bcols.begin(), bcols.end());
            const int dim_joint = detail::gf2_rank(joint);
            const int dim_inter = z + dim_b - dim_joint;
            return z - dim_inter;
        }
        const auto zbasis = z1_basis(b);
        const auto bcols = b1_cols(dj);
        const int z = static_cast<int>(zbasis.size());
        const int dim_b = detail::gf2_rank(bcols);
        std::vector<std::uint64_t> joint = zbasis;
        joint.insert(joint.end(), bcols.begin(), bcols.end());
        const int dim_joint = detail::gf2_rank(joint);
        const int dim_inter = z + dim_b - dim_joint;
        return z - dim_inter;
    };

    std::vector<OracleFeature> features;
    for (int p = 0; p <= 1; ++p) {
        for (std::size_t i = 0; i < ns; ++i) {
            // finite deaths
            for (std::size_t j = i + 1; j < ns; ++j) {
                const int mult = beta(p, static_cast<std::ptrdiff_t>(i), j - 1) -
                                 beta(p, static_cast<std::ptrdiff_t>(i), j) -
                                 beta(p, static_cast<std::ptrdiff_t>(i) - 1, j - 1) +
                                 beta(p, static_cast<std::ptrdiff_t>(i) - 1, j);
                for (int k = 0; k < mult; ++k)
                    features.push_back({p, scales[i], scales[j]});
            }
            // essential features alive at the truncation scale
            const int mult_inf = beta(p, static_cast<std::ptrdiff_t>(i), ns - 1) -
                                 beta(p, static_cast<std::ptrdiff_t>(i) - 1, ns - 1);
            for (int k = 0; k < mult_inf; ++k) features.push_back({p, scales[i], inf});
        }
    }
    std::sort(features.begin(), features.end());
    return features;
}

}  // namespace delaykit::oracle
