#pragma once

#include "cobig/se3.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cobig {

struct Neighbor {
    std::size_t index = 0;
    double squared_distance = 0.0;

    friend bool operator<(const Neighbor& a, const Neighbor& b)
    {
        return a.squared_distance < b.squared_distance ||
               (a.squared_distance == b.squared_distance && a.index < b.index);
    }
    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact kd-tree over a fixed point set.
///
/// Results are ordered by (squared distance, point index), so they match an
/// exhaustive scan bit for bit, ties included. The index keeps its own copy
/// of the points and is immutable after construction; concurrent queries are
/// safe.
class NeighborIndex {
public:
    /// Throws std::invalid_argument("empty point cloud") when points is empty.
    explicit NeighborIndex(std::span<const Vec3> points);

    std::size_t size() const { return points_.size(); }
    const Vec3& point(std::size_t i) const { return points_[i]; }

    Neighbor nearest(const Vec3& query) const;

    /// min(k, size()) nearest points in ascending (distance, index) order.
    std::vector<Neighbor> knn(const Vec3& query, std::size_t k) const;

private:
    struct Node {
        // Leaf when left < 0: [begin, end) indexes into order_.
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
        int axis = 0;
        double split = 0.0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::int32_t node, const Vec3& query, std::size_t k,
                std::vector<Neighbor>& best) const;

    std::vector<Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

} // namespace cobig
