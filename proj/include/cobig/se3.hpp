#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace cobig {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Tangent-space increment on SE(3), stacked as [xi; dt].
/// xi is an axis-angle rotation increment (radians), dt a translation
/// increment (meters).
struct TangentVector {
    Vec3 xi = Vec3::Zero();
    Vec3 dt = Vec3::Zero();

    static TangentVector from_vector(const Vec6& v)
    {
        return {v.head<3>(), v.tail<3>()};
    }
    Vec6 to_vector() const
    {
        Vec6 v;
        v << xi, dt;
        return v;
    }
    double norm() const { return to_vector().norm(); }
};

/// Rigid transform x -> R x + t. The rotation is kept on SO(3); see
/// orthogonality_defect() for the tolerance the library maintains.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Eigen::Matrix4d matrix() const;
};

/// Skew-symmetric cross-product matrix: hat(a) * b == a.cross(b).
Mat3 hat(const Vec3& phi);

/// Rodrigues closed form; falls back to I + hat(phi) below 1e-8 rad.
Mat3 exp_so3(const Vec3& phi);

/// Rotation vector of R (inverse of exp_so3 on angles in [0, pi]).
Vec3 log_so3(const Mat3& r);

/// ||R^T R - I||_F + |det R - 1|.
double orthogonality_defect(const Mat3& r);

/// Nearest rotation in the Frobenius sense (polar factor via SVD).
Mat3 orthonormalize(const Mat3& r);

/// (exp(xi^) R, exp(xi^) t + dt). The rotation is re-projected onto SO(3)
/// when its defect exceeds kReorthonormalizeThreshold.
RigidTransform retract(const RigidTransform& t, const TangentVector& dx);

inline constexpr double kReorthonormalizeThreshold = 1e-7;

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

struct PoseError {
    double translation = 0.0; ///< meters
    double rotation = 0.0;    ///< radians, in [0, pi]
};

/// Relative pose error of dT = estimate * ground_truth^-1.
PoseError pose_error(const RigidTransform& estimate, const RigidTransform& ground_truth);

/// 12 numbers, row-major rotation then translation, full round-trip precision.
std::string format_transform(const RigidTransform& t);

/// Parses 12 whitespace- or comma-separated numbers. Throws std::invalid_argument
/// on malformed input or a rotation that is not orthonormal within 1e-6.
RigidTransform parse_transform(const std::string& line);

RigidTransform read_transform_file(const std::string& path);
void write_transform_file(const std::string& path, const RigidTransform& t);

} // namespace cobig
