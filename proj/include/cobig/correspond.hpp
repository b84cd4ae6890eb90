#pragma once

#include "cobig/execution.hpp"
#include "cobig/neighbor_index.hpp"
#include "cobig/surface.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace cobig {

/// Nearest transformed-source point for one target point.
struct ForwardMatch {
    std::size_t target_index = 0;
    std::size_t source_index = 0;
    double distance = 0.0; ///< ||a_i - T b_j||, meters
};

struct CorrespondencePair {
    std::size_t target_index = 0;
    std::size_t source_index = 0;
    double forward_distance = 0.0;
    /// Distance between the target point and the target point found by the
    /// backward search. Zero for mutually nearest pairs.
    double gate_distance = 0.0;

    friend bool operator==(const CorrespondencePair&, const CorrespondencePair&) = default;
};

struct CorrespondenceSet {
    std::vector<CorrespondencePair> pairs; ///< ascending target_index
    std::size_t rejected_count = 0;

    bool empty() const { return pairs.empty(); }
    std::size_t size() const { return pairs.size(); }
};

/// For every target point, the exact nearest point of the transformed source.
/// `transformed_source_index` must be built over T * source. The result is
/// ordered by target index.
std::vector<ForwardMatch> forward_search(const PointCloud& target,
                                         const NeighborIndex& transformed_source_index,
                                         Execution exec = Execution::Parallel);

/// For every forward match, the index of the target point nearest to the
/// matched transformed source point. Aligned with `forward`.
std::vector<std::size_t> backward_search(const NeighborIndex& target_index,
                                         const NeighborIndex& transformed_source_index,
                                         const std::vector<ForwardMatch>& forward,
                                         Execution exec = Execution::Parallel);

/// Keeps forward matches whose round trip lands strictly within eps_gate of
/// the starting target point.
CorrespondenceSet bidirectional_filter(const std::vector<ForwardMatch>& forward,
                                       const std::vector<std::size_t>& backward,
                                       const PointCloud& target, double eps_gate);

/// Every forward match accepted, gate distance zero. Used by the
/// forward-only baselines.
CorrespondenceSet accept_all(const std::vector<ForwardMatch>& forward);

inline constexpr double kAdaptiveGateFactor = 2.5;
inline constexpr double kAdaptiveGateFloor = 1e-4;

/// max(2.5 * median forward distance, 1e-4 m).
double adaptive_gate(const std::vector<ForwardMatch>& forward);

double median(std::vector<double> values);

} // namespace cobig
