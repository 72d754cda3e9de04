#include "delaykit/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "delaykit/kernels.hpp"

namespace delaykit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxVertices = 1u << 21;  // triangle keys pack 3x21 bits

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    // Elder rule with all vertices born at scale zero: the lower root
    // survives, which keeps results deterministic.
    bool merge(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (a > b) std::swap(a, b);
        parent[static_cast<std::size_t>(b)] = a;
        return true;
    }
};

struct Tri {
    double filt;
    std::uint64_t key;

    bool operator==(const Tri& o) const { return key == o.key; }
    bool operator<(const Tri& o) const {
        if (filt != o.filt) return filt < o.filt;
        return key < o.key;
    }
};

inline std::uint64_t tri_key(int a, int b, int c) {
    // Sort the triple; inputs are distinct.
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 42) |
           (static_cast<std::uint64_t>(b) << 21) | static_cast<std::uint64_t>(c);
}

struct TriGreater {
    bool operator()(const Tri& a, const Tri& b) const {
        if (a.filt != b.filt) return a.filt > b.filt;
        return a.key > b.key;
    }
};

using TriHeap = std::priority_queue<Tri, std::vector<Tri>, TriGreater>;

// Lowest surviving entry after mod-2 cancellation of equal pairs. The
// returned entry is conceptually removed from the column.
inline std::optional<Tri> pop_pivot(TriHeap& heap) {
    while (!heap.empty()) {
        Tri t = heap.top();
        heap.pop();
        std::size_t count = 1;
        while (!heap.empty() && heap.top() == t) {
            heap.pop();
            ++count;
        }
        if (count % 2 == 1) return t;
    }
    return std::nullopt;
}

}  // namespace

namespace {

// Threshold on squared distances: the diameter default must not lose its
// own edge to sqrt rounding.
Filtration build_rips_sq(const PointCloud& points, double max2, double max_scale) {
    const int n = static_cast<int>(points.n_pts());
    Filtration filt;
    filt.n_vertices = n;
    filt.max_scale = max_scale;
    filt.coord_dim = points.dim;
    filt.coords = points.data;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double d2 = point_dist2(points, static_cast<std::size_t>(i),
                                          static_cast<std::size_t>(j));
            if (d2 <= max2)
                filt.edges.push_back({i, j, std::sqrt(d2)});
        }
    }
    std::sort(filt.edges.begin(), filt.edges.end(),
              [](const FiltEdge& a, const FiltEdge& b) {
                  if (a.length != b.length) return a.length < b.length;
                  if (a.i != b.i) return a.i < b.i;
                  return a.j < b.j;
              });
    return filt;
}

}  // namespace

Filtration build_rips(const PointCloud& points, double max_scale) {
    if (points.n_pts() < 1) throw std::invalid_argument("empty point cloud");
    if (!(max_scale >= 0.0)) throw std::invalid_argument("max_scale must be >= 0");
    if (points.n_pts() >= kMaxVertices)
        throw std::invalid_argument("point cloud too large for Rips filtration");
    return build_rips_sq(points, max_scale * max_scale, max_scale);
}

Filtration build_rips(const PointCloud& points) {
    if (points.n_pts() < 1) throw std::invalid_argument("empty point cloud");
    if (points.n_pts() >= kMaxVertices)
        throw std::invalid_argument("point cloud too large for Rips filtration");
    double diameter2 = 0.0;
    for (std::size_t i = 0; i < points.n_pts(); ++i)
        for (std::size_t j = i + 1; j < points.n_pts(); ++j)
            diameter2 = std::max(diameter2, point_dist2(points, i, j));
    return build_rips_sq(points, diameter2, std::sqrt(diameter2));
}

namespace {

// Open-addressing pivot table: one POD slot per claimed pivot. Columns are
// a single owner edge on the fast path; collided columns keep their addend
// edge list in a side pool.
struct PivotTable {
    static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};
    struct Slot {
        std::uint64_t key = kEmpty;
        std::uint32_t owner = 0;
        std::int32_t addends = -1;  // index into the pool, -1 = just owner
    };
    std::vector<Slot> slots;
    std::uint64_t mask = 0;

    explicit PivotTable(std::size_t expected) {
        std::size_t cap = 16;
        while (cap < 2 * expected + 2) cap <<= 1;
        slots.assign(cap, Slot{});
        mask = cap - 1;
    }
    static std::uint64_t hash(std::uint64_t k) {
        k ^= k >> 33;
        k *= 0xff51afd7ed558ccdULL;
        k ^= k >> 29;
        return k;
    }
    Slot* find(std::uint64_t key) {
        for (std::uint64_t i = hash(key) & mask;; i = (i + 1) & mask) {
            if (slots[i].key == key) return &slots[i];
            if (slots[i].key == kEmpty) return nullptr;
        }
    }
    Slot& insert(std::uint64_t key) {
        for (std::uint64_t i = hash(key) & mask;; i = (i + 1) & mask) {
            if (slots[i].key == kEmpty) {
                slots[i].key = key;
                return slots[i];
            }
        }
    }
};

struct ReductionState {
    int n = 0;
    const std::vector<FiltEdge>* edges = nullptr;
    std::vector<double> len_mat;  // +inf where no edge
    PivotTable pivots;
    std::vector<std::vector<std::uint32_t>> column_pool;
    // Raw coboundary cache for edges that chains expand repeatedly.
    std::unordered_map<std::uint32_t, std::vector<Tri>> cofacet_cache;

    ReductionState(int n_vertices, const std::vector<FiltEdge>& edge_list)
        : n(n_vertices), edges(&edge_list), pivots(edge_list.size()) {}

    const std::vector<Tri>& cofacets(std::uint32_t edge_idx) {
        auto it = cofacet_cache.find(edge_idx);
        if (it != cofacet_cache.end()) return it->second;
        const FiltEdge& e = (*edges)[edge_idx];
        const double* row_a =
            len_mat.data() + static_cast<std::size_t>(e.i) * static_cast<std::size_t>(n);
        const double* row_b =
            len_mat.data() + static_cast<std::size_t>(e.j) * static_cast<std::size_t>(n);
        std::vector<Tri> out;
        for (int c = 0; c < n; ++c) {
            const double la = row_a[c];
            const double lb = row_b[c];
            if (la == kInf || lb == kInf) continue;
            const double filt = std::max(e.length, std::max(la, lb));
            out.push_back({filt, tri_key(e.i, e.j, c)});
        }
        return cofacet_cache.emplace(edge_idx, std::move(out)).first->second;
    }
};

}  // namespace

PersistenceDiagram compute_persistence(const Filtration& filt) {
    const int n = filt.n_vertices;
    if (n < 1) throw std::invalid_argument("empty filtration");
    if (static_cast<std::size_t>(n) >= kMaxVertices)
        throw std::invalid_argument("filtration too large");
    const auto& edges = filt.edges;
    for (std::size_t k = 1; k < edges.size(); ++k) {
        const FiltEdge& p = edges[k - 1];
        const FiltEdge& q = edges[k];
        const bool ordered = p.length < q.length ||
                             (p.length == q.length &&
                              (p.i < q.i || (p.i == q.i && p.j < q.j)));
        if (!ordered) throw std::invalid_argument("filtration edges not sorted");
    }

    PersistenceDiagram diagram;

    // H0 by Kruskal union-find; tree edges also form the forest used for
    // representative paths.
    UnionFind uf(n);
    std::vector<std::uint8_t> is_tree(edges.size(), 0);
    std::vector<std::vector<std::pair<int, std::uint32_t>>> forest(
        static_cast<std::size_t>(n));
    for (std::uint32_t k = 0; k < edges.size(); ++k) {
        const FiltEdge& e = edges[k];
        if (uf.merge(e.i, e.j)) {
            is_tree[k] = 1;
            forest[static_cast<std::size_t>(e.i)].push_back({e.j, k});
            forest[static_cast<std::size_t>(e.j)].push_back({e.i, k});
            if (e.length > 0.0)
                diagram.features.push_back({0, 0.0, e.length, {}});
        }
    }
    for (int v = 0; v < n; ++v) {
        if (uf.find(v) == v) diagram.features.push_back({0, 0.0, kInf, {}});
    }

    // Representative of the class born at creator edge (a, b): the edge
    // plus the forest path between its endpoints using only tree edges
    // inserted earlier. This is the surviving column of the standard
    // boundary reduction.
    auto birth_loop = [&](std::uint32_t edge_idx) {
        const FiltEdge& e = edges[edge_idx];
        std::vector<int> parent(static_cast<std::size_t>(n), -2);
        std::queue<int> fifo;
        parent[static_cast<std::size_t>(e.i)] = -1;
        fifo.push(e.i);
        while (!fifo.empty()) {
            const int v = fifo.front();
            fifo.pop();
            if (v == e.j) break;
            for (const auto& [w, k] : forest[static_cast<std::size_t>(v)]) {
                if (k >= edge_idx) continue;
                if (parent[static_cast<std::size_t>(w)] != -2) continue;
                parent[static_cast<std::size_t>(w)] = v;
                fifo.push(w);
            }
        }
        std::vector<int> path;
        for (int v = e.j; v != -1; v = parent[static_cast<std::size_t>(v)]) {
            if (v == -2) throw std::logic_error("creator edge endpoints not connected");
            path.push_back(v);
        }
        // path runs e.j ... e.i; as a loop the closing edge is (e.i, e.j).
        std::reverse(path.begin(), path.end());
        return path;
    };

    // H1 pairs by coboundary reduction over creator edges in reverse
    // filtration order. The pivot of a column is its earliest cofacet; an
    // unclaimed pivot pairs immediately, collisions fall back to a lazy
    // heap column.
    ReductionState st(n, edges);
    st.len_mat.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), kInf);
    for (const FiltEdge& e : edges) {
        st.len_mat[static_cast<std::size_t>(e.i) * n + static_cast<std::size_t>(e.j)] =
            e.length;
        st.len_mat[static_cast<std::size_t>(e.j) * n + static_cast<std::size_t>(e.i)] =
            e.length;
    }

    auto emit_h1 = [&](std::uint32_t edge_idx, double death) {
        const FiltEdge& e = edges[edge_idx];
        if (death <= e.length) return;  // zero persistence
        PersistenceFeature f;
        f.dim = 1;
        f.birth = e.length;
        f.death = death;
        f.representative = birth_loop(edge_idx);
        diagram.features.push_back(std::move(f));
    };

    for (std::uint32_t k = static_cast<std::uint32_t>(edges.size()); k-- > 0;) {
        if (is_tree[k]) continue;
        const FiltEdge& e = edges[k];
        const double* row_a =
            st.len_mat.data() + static_cast<std::size_t>(e.i) * static_cast<std::size_t>(n);
        const double* row_b =
            st.len_mat.data() + static_cast<std::size_t>(e.j) * static_cast<std::size_t>(n);
        // The triple key grows with the third vertex, so the first index
        // attaining the minimal filtration value is the lexicographically
        // smallest cofacet: the column pivot before any reduction.
        double min_filt = kInf;
        const std::size_t min_c = knl::argmin_pairwise_max(
            row_a, row_b, e.length, static_cast<std::size_t>(n), min_filt);
        if (min_c >= static_cast<std::size_t>(n)) {
            emit_h1(k, kInf);  // no cofacets inside the filtration
            continue;
        }
        const Tri first_pivot{min_filt, tri_key(e.i, e.j, static_cast<int>(min_c))};
        PivotTable::Slot* taken = st.pivots.find(first_pivot.key);
        if (taken == nullptr) {
            st.pivots.insert(first_pivot.key).owner = k;
            emit_h1(k, first_pivot.filt);
            continue;
        }
        // Collision: reduce the column lazily on a heap, stopping at the
        // first surviving unclaimed pivot. An added group sums to a column
        // whose lowest entry is the current pivot, so group entries at or
        // below the pivot cancel against our popped copy or within the
        // group and never enter the heap.
        TriHeap heap;
        for (const Tri& t : st.cofacets(k)) {
            if (first_pivot < t) heap.push(t);
        }
        std::vector<std::uint32_t> addends{k};
        auto expand = [&](const PivotTable::Slot& slot, const Tri& below) {
            auto push_edge = [&](std::uint32_t g) {
                for (const Tri& t : st.cofacets(g)) {
                    if (below < t) heap.push(t);
                }
                addends.push_back(g);
            };
            if (slot.addends < 0) {
                push_edge(slot.owner);
                return;
            }
            for (const std::uint32_t g :
                 st.column_pool[static_cast<std::size_t>(slot.addends)])
                push_edge(g);
        };
        expand(*taken, first_pivot);
        for (;;) {
            const auto pivot = pop_pivot(heap);
            if (!pivot) {
                emit_h1(k, kInf);
                break;
            }
            PivotTable::Slot* it = st.pivots.find(pivot->key);
            if (it == nullptr) {
                auto& slot = st.pivots.insert(pivot->key);
                slot.owner = k;
                slot.addends = static_cast<std::int32_t>(st.column_pool.size());
                st.column_pool.push_back(std::move(addends));
                emit_h1(k, pivot->filt);
                break;
            }
            expand(*it, *pivot);
        }
    }

    const double* coords =
        filt.coords.size() ==
                static_cast<std::size_t>(n) * static_cast<std::size_t>(filt.coord_dim)
            ? filt.coords.data()
            : nullptr;
    for (auto& f : diagram.features) {
        if (f.dim == 1)
            f.representative = canonicalize_loop(std::move(f.representative), coords,
                                                 filt.coord_dim);
    }

    std::sort(diagram.features.begin(), diagram.features.end(),
              [](const PersistenceFeature& a, const PersistenceFeature& b) {
                  if (a.dim != b.dim) return a.dim < b.dim;
                  if (a.birth != b.birth) return a.birth < b.birth;
                  if (a.death != b.death) return a.death < b.death;
                  return a.representative < b.representative;
              });
    return diagram;
}

std::pair<double, std::optional<PersistenceFeature>> max_persistence(
    const PersistenceDiagram& diagram, int dim) {
    if (dim != 0 && dim != 1) throw std::invalid_argument("dim must be 0 or 1");
    const PersistenceFeature* best = nullptr;
    for (const auto& f : diagram.features) {
        if (f.dim != dim || !std::isfinite(f.death)) continue;
        if (best == nullptr || f.persistence() > best->persistence() ||
            (f.persistence() == best->persistence() && f.birth < best->birth)) {
            best = &f;
        }
    }
    if (best == nullptr) return {0.0, std::nullopt};
    return {best->persistence(), *best};
}

std::vector<int> canonicalize_loop(std::vector<int> loop, const double* coords,
                                   int dim) {
    if (loop.size() < 3) return loop;
    const auto min_it = std::min_element(loop.begin(), loop.end());
    std::rotate(loop.begin(), min_it, loop.end());
    bool reverse = false;
    if (coords != nullptr && dim >= 2) {
        double area2 = 0.0;
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const double* p = coords + static_cast<std::size_t>(loop[i]) * dim;
            const double* q =
                coords + static_cast<std::size_t>(loop[(i + 1) % loop.size()]) * dim;
            area2 += p[0] * q[1] - q[0] * p[1];
        }
        if (area2 < 0.0) reverse = true;
        if (area2 == 0.0) reverse = loop[1] > loop.back();
    } else {
        reverse = loop[1] > loop.back();
    }
    if (reverse) std::reverse(loop.begin() + 1, loop.end());
    return loop;
}

std::vector<int> representative_cycle(const Filtration& filt,
                                      const PersistenceFeature& feature) {
    if (feature.dim != 1)
        throw std::invalid_argument("representative cycles exist for dim 1 only");
    const PersistenceDiagram diagram = compute_persistence(filt);
    for (const auto& f : diagram.features) {
        if (f.dim == 1 && f.birth == feature.birth && f.death == feature.death)
            return f.representative;
    }
    throw std::runtime_error("feature not found in filtration");
}

}  // namespace delaykit
