#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "delaykit/series.hpp"

namespace delaykit {

inline constexpr std::size_t kNoNeighbor = std::numeric_limits<std::size_t>::max();

/// Structure-of-arrays copy of a point cloud (optionally only the first
/// dim_limit coordinates) for vectorized distance sweeps.
struct SoaCloud {
    std::vector<std::vector<double>> cols;
    std::vector<std::int64_t> time_index;

    explicit SoaCloud(const PointCloud& cloud, int dim_limit = 0);
    std::size_t n_pts() const { return time_index.size(); }
    int dim() const { return static_cast<int>(cols.size()); }

    /// Squared distances from an arbitrary query point to every point.
    void dist2_all(const double* q, std::vector<double>& out) const;
    /// Squared distances from the stored point at `query`.
    void dist2_from(std::size_t query, std::vector<double>& out) const;

    double dist2(std::size_t a, std::size_t b) const;

    /// k nearest neighbors of stored point `query` with Theiler exclusion,
    /// ascending by (distance, index). May return fewer than k.
    std::vector<std::size_t> knn(std::size_t query, std::size_t k,
                                 std::int64_t theiler,
                                 std::vector<double>& scratch) const;
};

/// Median-split KD-tree for repeated exact nearest-neighbor queries on the
/// same cloud. Ties resolve to the lower original index, matching the
/// brute-force neighbor_search contract.
class KdTree {
  public:
    /// dim_limit > 0 indexes only the first dim_limit coordinates.
    explicit KdTree(const PointCloud& cloud, int dim_limit = 0);

    /// Index of the nearest point to stored point `query` with
    /// |time difference| > theiler, or kNoNeighbor if none exists.
    std::size_t nearest(std::size_t query, std::int64_t theiler) const;

    /// k nearest neighbors (may return fewer), ascending by (distance, index).
    std::vector<std::size_t> knn(std::size_t query, std::size_t k,
                                 std::int64_t theiler) const;

  private:
    struct Node {
        double split = 0.0;
        std::int32_t axis = -1;  // -1 marks a leaf
        std::uint32_t left = 0, right = 0;
        std::uint32_t begin = 0, end = 0;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::uint32_t node, const double* q, std::int64_t t_query,
                std::size_t self, std::int64_t theiler, std::size_t k,
                std::vector<std::pair<double, std::size_t>>& heap) const;

    int dim_ = 0;
    std::vector<double> pts_;             // row-major, permuted
    std::vector<std::size_t> orig_;       // permuted slot -> original index
    std::vector<std::size_t> slot_of_;    // original index -> permuted slot
    std::vector<std::int64_t> tidx_;      // permuted time indices
    std::vector<Node> nodes_;
    std::uint32_t root_ = 0;
};

}  // namespace delaykit
