#pragma once

// Independent reference computations for the unit and acceptance tests.
// Nothing here calls into the library code under test except plain data types.

#include "cobig/correspond.hpp"
#include "cobig/se3.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using cobig::Mat3;
using cobig::Mat6;
using cobig::Vec3;
using cobig::Vec6;

inline constexpr double kPi = 3.14159265358979323846;

struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0)
    {
        return std::uniform_real_distribution<double>(lo, hi)(engine);
    }
    double normal(double s = 1.0) { return std::normal_distribution<double>(0.0, s)(engine); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }

    Vec3 vec(double lo = -1.0, double hi = 1.0)
    {
        return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
    }
    Vec3 unit()
    {
        Vec3 v;
        do {
            v = Vec3(normal(), normal(), normal());
        } while (v.norm() < 1e-6);
        return v.normalized();
    }
};

// Rotation about a unit axis, written out element by element.
inline Mat3 axis_angle(const Vec3& axis, double angle)
{
    const Vec3 u = axis.normalized();
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double C = 1.0 - c;
    const double x = u.x(), y = u.y(), z = u.z();
    Mat3 r;
    r << c + x * x * C, x * y * C - z * s, x * z * C + y * s,
        y * x * C + z * s, c + y * y * C, y * z * C - x * s,
        z * x * C - y * s, z * y * C + x * s, c + z * z * C;
    return r;
}

inline Mat3 random_rotation(Rng& rng)
{
    return axis_angle(rng.unit(), rng.uniform(0.0, kPi));
}

inline cobig::RigidTransform random_transform(Rng& rng, double t_scale = 1.0)
{
    return {random_rotation(rng), rng.vec(-t_scale, t_scale)};
}

inline Mat3 cross_matrix(const Vec3& a)
{
    // Columns are a x e_k.
    Mat3 m;
    for (int k = 0; k < 3; ++k) {
        m.col(k) = a.cross(Vec3::Unit(k));
    }
    return m;
}

inline Mat3 random_spd(Rng& rng, double min_eig = 0.05)
{
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            m(i, j) = rng.normal();
        }
    }
    return m * m.transpose() + min_eig * Mat3::Identity();
}

inline std::vector<Vec3> random_cloud(Rng& rng, std::size_t n, double extent = 1.0)
{
    std::vector<Vec3> pts(n);
    for (auto& p : pts) {
        p = rng.vec(-extent, extent);
    }
    return pts;
}

// Points on a small integer lattice, so exact distance ties are common.
inline std::vector<Vec3> lattice_cloud(Rng& rng, std::size_t n, int cells = 4)
{
    std::vector<Vec3> pts(n);
    for (auto& p : pts) {
        p = Vec3(rng.integer(0, cells), rng.integer(0, cells), rng.integer(0, cells));
    }
    return pts;
}

struct Hit {
    std::size_t index;
    double d2;
};

inline double sq(const Vec3& a, const Vec3& b)
{
    const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

// Exhaustive k nearest with ties broken by the lower index.
inline std::vector<Hit> brute_knn(const std::vector<Vec3>& pts, const Vec3& q, std::size_t k)
{
    std::vector<Hit> all;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        all.push_back({i, sq(pts[i], q)});
    }
    std::stable_sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) { return a.d2 < b.d2; });
    all.resize(std::min(k, all.size()));
    return all;
}

inline std::size_t brute_argmin(const std::vector<Vec3>& pts, const Vec3& q)
{
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d = sq(pts[i], q);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

struct BrutePair {
    std::size_t target;
    std::size_t source;
};

// Double argmin: a_i -> nearest T b_j -> nearest a_k, kept when |a_k - a_i| < gate.
inline std::vector<BrutePair> brute_bidirectional(const std::vector<Vec3>& target,
                                                  const std::vector<Vec3>& moved_source,
                                                  double gate)
{
    std::vector<BrutePair> out;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const std::size_t j = brute_argmin(moved_source, target[i]);
        const std::size_t k = brute_argmin(target, moved_source[j]);
        if (std::sqrt(sq(target[k], target[i])) < gate) {
            out.push_back({i, j});
        }
    }
    return out;
}

// Moore-Penrose inverse from a full SVD, relative cutoff on singular values.
inline Mat6 pinv(const Mat6& a, double tol)
{
    Eigen::JacobiSVD<Mat6> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = tol * s.maxCoeff();
    Vec6 inv = Vec6::Zero();
    for (int i = 0; i < 6; ++i) {
        if (s(i) > cut && s(i) > 0.0) {
            inv(i) = 1.0 / s(i);
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// Adjugate over determinant, cofactors written out explicitly.
inline Mat3 adjugate_inverse(const Mat3& m)
{
    Mat3 c;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int r0 = (i + 1) % 3, r1 = (i + 2) % 3;
            const int c0 = (j + 1) % 3, c1 = (j + 2) % 3;
            c(i, j) = m(r0, c0) * m(r1, c1) - m(r0, c1) * m(r1, c0);
        }
    }
    const double det = m.row(0).dot(c.row(0));
    return c.transpose() / det;
}

// Residual a - T' b with T' written in matrix form: exp(xi) from the
// axis-angle oracle, then (exp R, exp t + dt).
inline Vec3 perturbed_residual(const Vec3& a, const Vec3& b, const cobig::RigidTransform& t,
                               const Vec6& dx)
{
    const Vec3 xi = dx.head<3>();
    const double angle = xi.norm();
    const Mat3 e = angle > 0.0 ? axis_angle(xi / angle, angle) : Mat3::Identity();
    const Mat3 r = e * t.rotation;
    const Vec3 tt = e * t.translation + dx.tail<3>();
    return a - (r * b + tt);
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("cobig_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline double median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace oracle
