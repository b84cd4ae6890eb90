#pragma once

#include "cobig/se3.hpp"
#include "cobig/surface.hpp"

#include <cstdint>
#include <string_view>

namespace cobig {

enum class SceneKind {
    PlaneCorner,    ///< three orthogonal faces of a 2 m cube meeting at a corner
    Corridor,       ///< floor, ceiling and two walls; translation along the axis is unobservable
    RandomSurfaces, ///< four randomly oriented square patches and a sphere
};

SceneKind parse_scene_kind(std::string_view name);
std::string_view scene_kind_name(SceneKind kind);

struct SceneParams {
    SceneKind kind = SceneKind::PlaneCorner;
    std::size_t n_points = 2000;
    double noise_sigma = 0.0;      ///< per-axis Gaussian noise on the source, m
    double outlier_fraction = 0.0; ///< floor(fraction * n_points) outliers appended to the source
    std::uint64_t seed = 0;
    double rotation_deg = 5.0;  ///< ground-truth rotation angle, random axis
    double translation_m = 0.1; ///< ground-truth translation norm, random direction
};

struct SyntheticScene {
    PointCloud source; ///< inliers first, then outliers
    PointCloud target;
    RigidTransform ground_truth; ///< maps source into the target frame
    std::size_t outlier_count = 0;
};

/// Samples the target on the scene surfaces; the source is the same sample
/// mapped by ground_truth^-1 with noise added, followed by outliers drawn
/// uniformly from the inlier bounding box inflated 2x about its center.
SyntheticScene make_synthetic_scene(const SceneParams& params);

/// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

} // namespace cobig
