#include "cobig/correspond.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cobig {

std::vector<ForwardMatch> forward_search(const PointCloud& target,
                                         const NeighborIndex& transformed_source_index,
                                         Execution exec)
{
    if (target.empty()) {
        throw std::invalid_argument("empty point cloud");
    }
    const auto n = static_cast<std::ptrdiff_t>(target.size());
    std::vector<ForwardMatch> out(target.size());
    auto body = [&](std::ptrdiff_t i) {
        const Neighbor nb = transformed_source_index.nearest(target.points[i]);
        out[i] = {static_cast<std::size_t>(i), nb.index, std::sqrt(nb.squared_distance)};
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            body(i);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            body(i);
        }
    }
    return out;
}

std::vector<std::size_t> backward_search(const NeighborIndex& target_index,
                                         const NeighborIndex& transformed_source_index,
                                         const std::vector<ForwardMatch>& forward,
                                         Execution exec)
{
    const auto n = static_cast<std::ptrdiff_t>(forward.size());
    std::vector<std::size_t> out(forward.size());
    auto body = [&](std::ptrdiff_t i) {
        const Vec3& moved = transformed_source_index.point(forward[i].source_index);
        out[i] = target_index.nearest(moved).index;
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            body(i);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            body(i);
        }
    }
    return out;
}

CorrespondenceSet bidirectional_filter(const std::vector<ForwardMatch>& forward,
                                       const std::vector<std::size_t>& backward,
                                       const PointCloud& target, double eps_gate)
{
    if (forward.size() != backward.size()) {
        throw std::invalid_argument("forward and backward matches are not aligned");
    }
    CorrespondenceSet set;
    set.pairs.reserve(forward.size());
    for (std::size_t i = 0; i < forward.size(); ++i) {
        const ForwardMatch& f = forward[i];
        const double gate =
            (target.points[backward[i]] - target.points[f.target_index]).norm();
        if (gate < eps_gate) {
            set.pairs.push_back({f.target_index, f.source_index, f.distance, gate});
        } else {
            ++set.rejected_count;
        }
    }
    return set;
}

CorrespondenceSet accept_all(const std::vector<ForwardMatch>& forward)
{
    CorrespondenceSet set;
    set.pairs.reserve(forward.size());
    for (const ForwardMatch& f : forward) {
        set.pairs.push_back({f.target_index, f.source_index, f.distance, 0.0});
    }
    return set;
}

double median(std::vector<double> values)
{
    if (values.empty()) {
        throw std::invalid_argument("median of an empty set");
    }
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + mid, values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + mid);
    return 0.5 * (lower + upper);
}

double adaptive_gate(const std::vector<ForwardMatch>& forward)
{
    std::vector<double> d;
    d.reserve(forward.size());
    for (const ForwardMatch& f : forward) {
        d.push_back(f.distance);
    }
    return std::max(kAdaptiveGateFactor * median(std::move(d)), kAdaptiveGateFloor);
}

} // namespace cobig
