#pragma once

#include "cobig/execution.hpp"
#include "cobig/neighbor_index.hpp"
#include "cobig/se3.hpp"

#include <optional>
#include <vector>

namespace cobig {

/// Local Gaussian model of the surface around one point.
struct SurfaceStat {
    Mat3 covariance = Mat3::Identity();  ///< regularized, m^2
    Mat3 information = Mat3::Identity(); ///< inverse of covariance, m^-2
    Vec3 normal = Vec3::UnitZ();
    int neighbor_count = 0;
};

struct PointCloud {
    std::vector<Vec3> points;
    /// Either empty or one entry per point.
    std::vector<SurfaceStat> stats;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_stats() const { return !stats.empty() && stats.size() == points.size(); }
};

/// Points mapped by t. Stats are not carried over.
PointCloud transformed(const PointCloud& cloud, const RigidTransform& t);

/// Eigenvalue floor applied when a neighborhood has collapsed to a point (m^2).
inline constexpr double kMinCovarianceScale = 1e-12;

/// Plane regularization of a covariance estimate.
///
/// The smallest eigenvalue is replaced by eps_plane * lambda_max and the middle
/// one is clamped to at least that value, so the condition number is at most
/// 1 / eps_plane. The normal is the eigenvector of the smallest eigenvalue with
/// its first non-negligible component made positive.
SurfaceStat regularize_covariance(const Mat3& covariance, double eps_plane);

/// Fills cloud.stats from the k nearest neighbors of every point (the point
/// itself included). Throws std::invalid_argument when k < 4, eps_plane is
/// outside (0, 1], or the cloud has fewer than k points.
void estimate_stats(PointCloud& cloud, int k, double eps_plane,
                    Execution exec = Execution::Parallel);

/// Same as above, reusing an index already built over cloud.points.
void estimate_stats(PointCloud& cloud, const NeighborIndex& index, int k, double eps_plane,
                    Execution exec = Execution::Parallel);

/// Bidirectional information matrix omega_a + R omega_b R^T. No inversion.
/// Throws std::invalid_argument("asymmetric information matrix") when either
/// input is asymmetric beyond 1e-9 relative to its largest entry.
Mat3 combine_information(const Mat3& omega_a, const Mat3& omega_b, const Mat3& r);

/// GICP information (sigma_a + R sigma_b R^T)^-1 via the cofactor inverse.
/// Throws std::domain_error("singular combined covariance") when the
/// determinant is below 1e-18 relative to the cube of the largest entry.
Mat3 gicp_information(const Mat3& sigma_a, const Mat3& sigma_b, const Mat3& r);

} // namespace cobig
