#include "cobig/surface.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cobig {

PointCloud transformed(const PointCloud& cloud, const RigidTransform& t)
{
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const Vec3& p : cloud.points) {
        out.points.push_back(t.apply(p));
    }
    return out;
}

SurfaceStat regularize_covariance(const Mat3& covariance, double eps_plane)
{
    Eigen::SelfAdjointEigenSolver<Mat3> es(covariance);
    const Mat3& v = es.eigenvectors();
    const Vec3& raw = es.eigenvalues(); // ascending

    const double top = std::max(raw[2], kMinCovarianceScale);
    const double floor = eps_plane * top;
    const Vec3 lambda(floor, std::max(raw[1], floor), top);

    SurfaceStat stat;
    stat.covariance = v * lambda.asDiagonal() * v.transpose();
    stat.covariance = 0.5 * (stat.covariance + stat.covariance.transpose()).eval();
    stat.information = v * lambda.cwiseInverse().asDiagonal() * v.transpose();
    stat.information = 0.5 * (stat.information + stat.information.transpose()).eval();

    Vec3 n = v.col(0).normalized();
    for (int i = 0; i < 3; ++i) {
        if (std::abs(n[i]) > 1e-12) {
            if (n[i] < 0.0) {
                n = -n;
            }
            break;
        }
    }
    stat.normal = n;
    return stat;
}

namespace {

SurfaceStat stat_for_point(const PointCloud& cloud, const NeighborIndex& index,
                           std::size_t i, int k, double eps_plane)
{
    const auto neighbors = index.knn(cloud.points[i], static_cast<std::size_t>(k));
    Vec3 mean = Vec3::Zero();
    for (const Neighbor& nb : neighbors) {
        mean += cloud.points[nb.index];
    }
    mean /= static_cast<double>(neighbors.size());
    Mat3 cov = Mat3::Zero();
    for (const Neighbor& nb : neighbors) {
        const Vec3 d = cloud.points[nb.index] - mean;
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(neighbors.size());

    SurfaceStat stat = regularize_covariance(cov, eps_plane);
    stat.neighbor_count = static_cast<int>(neighbors.size());
    return stat;
}

void check_stats_args(const PointCloud& cloud, int k, double eps_plane)
{
    if (k < 4) {
        throw std::invalid_argument("k_neighbors must be at least 4");
    }
    if (!(eps_plane > 0.0 && eps_plane <= 1.0)) {
        throw std::invalid_argument("eps_plane must lie in (0, 1]");
    }
    if (cloud.size() < static_cast<std::size_t>(k)) {
        throw std::invalid_argument("insufficient points for statistics");
    }
}

} // namespace

void estimate_stats(PointCloud& cloud, int k, double eps_plane, Execution exec)
{
    check_stats_args(cloud, k, eps_plane);
    const NeighborIndex index(cloud.points);
    estimate_stats(cloud, index, k, eps_plane, exec);
}

void estimate_stats(PointCloud& cloud, const NeighborIndex& index, int k, double eps_plane,
                    Execution exec)
{
    check_stats_args(cloud, k, eps_plane);
    if (index.size() != cloud.size()) {
        throw std::invalid_argument("neighbor index does not match the cloud");
    }
    const auto n = static_cast<std::ptrdiff_t>(cloud.size());
    std::vector<SurfaceStat> stats(cloud.size());
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            stats[i] = stat_for_point(cloud, index, static_cast<std::size_t>(i), k, eps_plane);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            stats[i] = stat_for_point(cloud, index, static_cast<std::size_t>(i), k, eps_plane);
        }
    }
    cloud.stats = std::move(stats);
}

namespace {

void require_symmetric(const Mat3& m)
{
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw std::invalid_argument("asymmetric information matrix");
    }
}

} // namespace

Mat3 combine_information(const Mat3& omega_a, const Mat3& omega_b, const Mat3& r)
{
    require_symmetric(omega_a);
    require_symmetric(omega_b);
    Mat3 out = omega_a + r * omega_b * r.transpose();
    return 0.5 * (out + out.transpose());
}

Mat3 gicp_information(const Mat3& sigma_a, const Mat3& sigma_b, const Mat3& r)
{
    const Mat3 s = sigma_a + r * sigma_b * r.transpose();
    Mat3 cof;
    cof(0, 0) = s(1, 1) * s(2, 2) - s(1, 2) * s(2, 1);
    cof(0, 1) = s(1, 2) * s(2, 0) - s(1, 0) * s(2, 2);
    cof(0, 2) = s(1, 0) * s(2, 1) - s(1, 1) * s(2, 0);
    cof(1, 0) = s(0, 2) * s(2, 1) - s(0, 1) * s(2, 2);
    cof(1, 1) = s(0, 0) * s(2, 2) - s(0, 2) * s(2, 0);
    cof(1, 2) = s(0, 1) * s(2, 0) - s(0, 0) * s(2, 1);
    cof(2, 0) = s(0, 1) * s(1, 2) - s(0, 2) * s(1, 1);
    cof(2, 1) = s(0, 2) * s(1, 0) - s(0, 0) * s(1, 2);
    cof(2, 2) = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    const double det = s(0, 0) * cof(0, 0) + s(0, 1) * cof(0, 1) + s(0, 2) * cof(0, 2);
    const double scale = s.cwiseAbs().maxCoeff();
    if (!(std::abs(det) > 1e-18 * scale * scale * scale) || !std::isfinite(det)) {
        throw std::domain_error("singular combined covariance");
    }
    const Mat3 inv = cof.transpose() / det;
    return 0.5 * (inv + inv.transpose());
}

} // namespace cobig
