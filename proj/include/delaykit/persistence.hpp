#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "delaykit/series.hpp"

namespace delaykit {

struct FiltEdge {
    int i = 0;  // i < j
    int j = 0;
    double length = 0.0;
};

/// Vietoris-Rips filtration of a point cloud: all edges up to max_scale,
/// sorted ascending by (length, i, j). Triangles are implicit; a triangle
/// enters at its maximal edge length. Vertex coordinates are retained so
/// representative cycles can be oriented geometrically.
struct Filtration {
    int n_vertices = 0;
    double max_scale = 0.0;
    std::vector<FiltEdge> edges;
    std::vector<double> coords;  // row-major, n_vertices x coord_dim
    int coord_dim = 0;
};

Filtration build_rips(const PointCloud& points, double max_scale);
/// max_scale = cloud diameter: the resulting diagram is exact (every
/// feature dies within the filtration).
Filtration build_rips(const PointCloud& points);

struct PersistenceFeature {
    int dim = 0;                     // 0 or 1
    double birth = 0.0;
    double death = 0.0;              // +inf for essential features
    std::vector<int> representative; // ordered vertex loop, dim 1 only

    double persistence() const { return death - birth; }
};

struct PersistenceDiagram {
    std::vector<PersistenceFeature> features;
};

/// Persistence pairs of the filtration over Z/2. H0 via union-find
/// (elder rule), H1 via coboundary reduction with lazy columns. Zero
/// persistence pairs are dropped; every H1 feature carries its birth-time
/// representative cycle. Features are sorted by (dim, birth, death).
PersistenceDiagram compute_persistence(const Filtration& filt);

/// Longest finite bar of the given dimension: (persistence, feature);
/// (0, nullopt) when none exists. Ties resolve to the earlier birth.
std::pair<double, std::optional<PersistenceFeature>> max_persistence(
    const PersistenceDiagram& diagram, int dim);

/// Ordered vertex loop of a dim-1 feature of this filtration, lowest
/// vertex first, oriented so the signed area of the first two coordinates
/// is positive. Throws when the feature does not belong to the filtration.
std::vector<int> representative_cycle(const Filtration& filt,
                                      const PersistenceFeature& feature);

/// Canonical loop form used for stored representatives (exposed for reuse).
std::vector<int> canonicalize_loop(std::vector<int> loop, const double* coords,
                                   int dim);

}  // namespace delaykit
