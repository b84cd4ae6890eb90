#include "cobig/se3.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cobig {

Eigen::Matrix4d RigidTransform::matrix() const
{
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
}

Mat3 hat(const Vec3& phi)
{
    Mat3 m;
    m << 0.0, -phi.z(), phi.y(),
         phi.z(), 0.0, -phi.x(),
         -phi.y(), phi.x(), 0.0;
    return m;
}

Mat3 exp_so3(const Vec3& phi)
{
    const double angle = phi.norm();
    const Mat3 k = hat(phi);
    if (angle < 1e-8) {
        return Mat3::Identity() + k;
    }
    const double a = std::sin(angle) / angle;
    const double b = (1.0 - std::cos(angle)) / (angle * angle);
    return Mat3::Identity() + a * k + b * k * k;
}

Vec3 log_so3(const Mat3& r)
{
    const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
    const double angle = std::acos(c);
    const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    if (angle < 1e-8) {
        return 0.5 * w;
    }
    if (M_PI - angle < 1e-6) {
        // Near pi the antisymmetric part vanishes; recover the axis from the
        // symmetric part R = 2 n n^T - I.
        const Mat3 s = 0.5 * (r + Mat3::Identity());
        Eigen::Index col = 0;
        s.diagonal().maxCoeff(&col);
        Vec3 axis = s.col(col) / std::sqrt(std::max(s(col, col), 1e-300));
        if (axis.dot(w) < 0.0) {
            axis = -axis;
        }
        return angle * axis.normalized();
    }
    return angle / (2.0 * std::sin(angle)) * w;
}

double orthogonality_defect(const Mat3& r)
{
    return (r.transpose() * r - Mat3::Identity()).norm() + std::abs(r.determinant() - 1.0);
}

Mat3 orthonormalize(const Mat3& r)
{
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    const Mat3& v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) {
        u.col(2) = -u.col(2);
    }
    return u * v.transpose();
}

RigidTransform retract(const RigidTransform& t, const TangentVector& dx)
{
    const Mat3 q = exp_so3(dx.xi);
    RigidTransform out;
    out.rotation = q * t.rotation;
    out.translation = q * t.translation + dx.dt;
    if (orthogonality_defect(out.rotation) > kReorthonormalizeThreshold) {
        out.rotation = orthonormalize(out.rotation);
    }
    return out;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b)
{
    return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

RigidTransform invert(const RigidTransform& t)
{
    const Mat3 rt = t.rotation.transpose();
    return {rt, -(rt * t.translation)};
}

PoseError pose_error(const RigidTransform& estimate, const RigidTransform& ground_truth)
{
    const RigidTransform delta = compose(estimate, invert(ground_truth));
    const double c = std::clamp((delta.rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
    return {delta.translation.norm(), std::acos(c)};
}

std::string format_transform(const RigidTransform& t)
{
    std::string out;
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (!out.empty()) {
            out += ' ';
        }
        out += buf;
    };
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            put(t.rotation(r, c));
        }
    }
    for (int i = 0; i < 3; ++i) {
        put(t.translation(i));
    }
    return out;
}

RigidTransform parse_transform(const std::string& line)
{
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream in(cleaned);
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("transform: non-numeric token '" + token + "'");
        }
        if (used != token.size() || !std::isfinite(v)) {
            throw std::invalid_argument("transform: invalid number '" + token + "'");
        }
        values.push_back(v);
    }
    if (values.size() != 12) {
        throw std::invalid_argument("transform: expected 12 numbers, got " +
                                    std::to_string(values.size()));
    }
    RigidTransform t;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            t.rotation(r, c) = values[3 * r + c];
        }
    }
    t.translation = Vec3(values[9], values[10], values[11]);
    if (orthogonality_defect(t.rotation) > 1e-6) {
        throw std::invalid_argument("transform: rotation block is not orthonormal");
    }
    return t;
}

RigidTransform read_transform_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open transform file: " + path);
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') {
            continue;
        }
        return parse_transform(line);
    }
    throw std::runtime_error("transform file is empty: " + path);
}

void write_transform_file(const std::string& path, const RigidTransform& t)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write transform file: " + path);
    }
    out << format_transform(t) << '\n';
}

} // namespace cobig
