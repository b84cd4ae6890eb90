#include "cobig/neighbor_index.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace cobig {

namespace {
constexpr std::uint32_t kLeafSize = 8;
}

NeighborIndex::NeighborIndex(std::span<const Vec3> points)
    : points_(points.begin(), points.end())
{
    if (points_.empty()) {
        throw std::invalid_argument("empty point cloud");
    }
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t NeighborIndex::build(std::uint32_t begin, std::uint32_t end)
{
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{-1, -1, begin, end, 0, 0.0});
    if (end - begin <= kLeafSize) {
        return id;
    }

    Vec3 lo = points_[order_[begin]];
    Vec3 hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    if (hi[axis] == lo[axis]) {
        // All points coincide; keep them in one leaf.
        return id;
    }

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         return points_[a][axis] < points_[b][axis];
                     });
    const double split = points_[order_[mid]][axis];

    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    Node& node = nodes_[id];
    node.left = left;
    node.right = right;
    node.axis = axis;
    node.split = split;
    return id;
}

void NeighborIndex::search(std::int32_t id, const Vec3& query, std::size_t k,
                           std::vector<Neighbor>& best) const
{
    const Node& node = nodes_[id];
    if (node.left < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const Neighbor cand{order_[i], (points_[order_[i]] - query).squaredNorm()};
            if (best.size() < k) {
                best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
            } else if (cand < best.back()) {
                best.pop_back();
                best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
            }
        }
        return;
    }

    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    search(near, query, k, best);
    // Equal distances must still be visited: a tie may carry a lower index.
    if (best.size() < k || diff * diff <= best.back().squared_distance) {
        search(far, query, k, best);
    }
}

Neighbor NeighborIndex::nearest(const Vec3& query) const
{
    std::vector<Neighbor> best;
    best.reserve(2);
    search(0, query, 1, best);
    return best.front();
}

std::vector<Neighbor> NeighborIndex::knn(const Vec3& query, std::size_t k) const
{
    std::vector<Neighbor> best;
    k = std::min(k, points_.size());
    if (k == 0) {
        return best;
    }
    best.reserve(k + 1);
    search(0, query, k, best);
    return best;
}

} // namespace cobig
