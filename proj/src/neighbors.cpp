#include "delaykit/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "delaykit/kernels.hpp"

namespace delaykit {

SoaCloud::SoaCloud(const PointCloud& cloud, int dim_limit) {
    const int d = dim_limit > 0 ? dim_limit : cloud.dim;
    if (d > cloud.dim) throw std::invalid_argument("dim_limit exceeds cloud dimension");
    const std::size_t n = cloud.n_pts();
    cols.assign(static_cast<std::size_t>(d), std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = cloud.row(i);
        for (int j = 0; j < d; ++j) cols[static_cast<std::size_t>(j)][i] = row[j];
    }
    time_index = cloud.time_index;
}

void SoaCloud::dist2_all(const double* q, std::vector<double>& out) const {
    const std::size_t n = n_pts();
    out.resize(n);
    for (std::size_t j = 0; j < cols.size(); ++j)
        knl::sq_diff_accum(cols[j].data(), q[j], out.data(), n, j == 0);
}

void SoaCloud::dist2_from(std::size_t query, std::vector<double>& out) const {
    const std::size_t n = n_pts();
    out.resize(n);
    for (std::size_t j = 0; j < cols.size(); ++j)
        knl::sq_diff_accum(cols[j].data(), cols[j][query], out.data(), n, j == 0);
}

double SoaCloud::dist2(std::size_t a, std::size_t b) const {
    double acc = 0.0;
    for (const auto& col : cols) {
        const double d = col[a] - col[b];
        acc += d * d;
    }
    return acc;
}

std::vector<std::size_t> SoaCloud::knn(std::size_t query, std::size_t k,
                                       std::int64_t theiler,
                                       std::vector<double>& scratch) const {
    dist2_from(query, scratch);
    const std::int64_t tq = time_index[query];
    std::vector<std::pair<double, std::size_t>> candidates;
    candidates.reserve(n_pts());
    for (std::size_t i = 0; i < n_pts(); ++i) {
        if (std::llabs(time_index[i] - tq) <= theiler) continue;
        candidates.emplace_back(scratch[i], i);
    }
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(),
                      candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end());
    std::vector<std::size_t> out(take);
    for (std::size_t i = 0; i < take; ++i) out[i] = candidates[i].second;
    return out;
}

namespace {
constexpr std::uint32_t kLeafSize = 24;
}

KdTree::KdTree(const PointCloud& cloud, int dim_limit) {
    dim_ = dim_limit > 0 ? dim_limit : cloud.dim;
    if (dim_ > cloud.dim) throw std::invalid_argument("dim_limit exceeds cloud dimension");
    const std::size_t n = cloud.n_pts();
    orig_.resize(n);
    for (std::size_t i = 0; i < n; ++i) orig_[i] = i;
    pts_.resize(n * static_cast<std::size_t>(dim_));
    tidx_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = cloud.row(i);
        for (int j = 0; j < dim_; ++j)
            pts_[i * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(j)] = row[j];
        tidx_[i] = cloud.time_index[i];
    }
    nodes_.reserve(2 * n / kLeafSize + 2);
    root_ = build(0, static_cast<std::uint32_t>(n));
    slot_of_.resize(n);
    for (std::size_t i = 0; i < n; ++i) slot_of_[orig_[i]] = i;
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
    const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= kLeafSize) return id;

    // Split on the widest axis at the median.
    int axis = 0;
    double best_spread = -1.0;
    for (int j = 0; j < dim_; ++j) {
        double lo = pts_[static_cast<std::size_t>(begin) * dim_ + j];
        double hi = lo;
        for (std::uint32_t i = begin + 1; i < end; ++i) {
            const double v = pts_[static_cast<std::size_t>(i) * dim_ + j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            axis = j;
        }
    }
    if (best_spread <= 0.0) return id;  // all points identical: keep as leaf

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::vector<std::uint32_t> perm(end - begin);
    for (std::uint32_t i = 0; i < end - begin; ++i) perm[i] = begin + i;
    std::nth_element(perm.begin(), perm.begin() + (mid - begin), perm.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                         return pts_[static_cast<std::size_t>(a) * dim_ + axis] <
                                pts_[static_cast<std::size_t>(b) * dim_ + axis];
                     });
    // Apply the permutation to the packed arrays.
    {
        std::vector<double> tmp_pts((end - begin) * static_cast<std::size_t>(dim_));
        std::vector<std::size_t> tmp_orig(end - begin);
        std::vector<std::int64_t> tmp_tidx(end - begin);
        for (std::uint32_t i = 0; i < end - begin; ++i) {
            const std::uint32_t src = perm[i];
            for (int j = 0; j < dim_; ++j)
                tmp_pts[static_cast<std::size_t>(i) * dim_ + j] =
                    pts_[static_cast<std::size_t>(src) * dim_ + j];
            tmp_orig[i] = orig_[src];
            tmp_tidx[i] = tidx_[src];
        }
        std::copy(tmp_pts.begin(), tmp_pts.end(),
                  pts_.begin() + static_cast<std::size_t>(begin) * dim_);
        std::copy(tmp_orig.begin(), tmp_orig.end(), orig_.begin() + begin);
        std::copy(tmp_tidx.begin(), tmp_tidx.end(), tidx_.begin() + begin);
    }

    nodes_[id].axis = axis;
    nodes_[id].split = pts_[static_cast<std::size_t>(mid) * dim_ + axis];
    const std::uint32_t left = build(begin, mid);
    const std::uint32_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(std::uint32_t node_id, const double* q, std::int64_t t_query,
                    std::size_t self, std::int64_t theiler, std::size_t k,
                    std::vector<std::pair<double, std::size_t>>& heap) const {
    const Node& node = nodes_[node_id];
    // Heap entries are (dist2, orig index); worst element on top, ties
    // treated as worse for larger index so equal-distance cutoffs keep the
    // lower index.
    auto worse = [](const std::pair<double, std::size_t>& a,
                    const std::pair<double, std::size_t>& b) {
        return a.first < b.first || (a.first == b.first && a.second < b.second);
    };
    if (node.axis < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            if (orig_[i] == self) continue;
            if (std::llabs(tidx_[i] - t_query) <= theiler) continue;
            const double d2 =
                knl::dist2(pts_.data() + static_cast<std::size_t>(i) * dim_, q,
                           static_cast<std::size_t>(dim_));
            const std::pair<double, std::size_t> cand{d2, orig_[i]};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), worse);
            } else if (worse(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), worse);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), worse);
            }
        }
        return;
    }
    const double delta = q[node.axis] - node.split;
    const std::uint32_t near = delta < 0.0 ? node.left : node.right;
    const std::uint32_t far = delta < 0.0 ? node.right : node.left;
    search(near, q, t_query, self, theiler, k, heap);
    if (heap.size() < k || delta * delta <= heap.front().first)
        search(far, q, t_query, self, theiler, k, heap);
}

std::vector<std::size_t> KdTree::knn(std::size_t query, std::size_t k,
                                     std::int64_t theiler) const {
    if (query >= slot_of_.size()) throw std::invalid_argument("query out of range");
    const std::size_t slot = slot_of_[query];
    const double* q = pts_.data() + slot * static_cast<std::size_t>(dim_);
    const std::int64_t tq = tidx_[slot];
    std::vector<std::pair<double, std::size_t>> heap;
    heap.reserve(k + 1);
    search(root_, q, tq, query, theiler, k, heap);
    std::sort(heap.begin(), heap.end());
    std::vector<std::size_t> out(heap.size());
    for (std::size_t i = 0; i < heap.size(); ++i) out[i] = heap[i].second;
    return out;
}

std::size_t KdTree::nearest(std::size_t query, std::int64_t theiler) const {
    const auto nn = knn(query, 1, theiler);
    return nn.empty() ? kNoNeighbor : nn.front();
}

}  // namespace delaykit
