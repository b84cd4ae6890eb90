#pragma once

#include "cobig/correspond.hpp"
#include "cobig/execution.hpp"
#include "cobig/se3.hpp"
#include "cobig/surface.hpp"

#include <optional>
#include <vector>

namespace cobig {

struct SolverConfig {
    /// Kernel bandwidth in Mahalanobis units. Unset means "auto": the square
    /// root of the median r^2 of the first gated set, floored at kMinAutoSigma.
    std::optional<double> sigma0;
    double sigma_decay = 0.97;
    int max_iterations = 100;
    double translation_tol = 1e-6; ///< meters
    double rotation_tol = 1e-6;    ///< radians
    int k_neighbors = 20;
    double eps_plane = 1e-3;
    /// Bidirectional gate in meters. Unset means adaptive (see adaptive_gate()).
    std::optional<double> fixed_gate;
    double pinv_tolerance = 1e-8;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

inline constexpr double kMinAutoSigma = 1e-3;
inline constexpr double kSigmaFloorRatio = 0.05;

/// max(sigma0 * decay^n, kSigmaFloorRatio * sigma0): the bandwidth used at
/// iteration n (zero based).
double sigma_at(double sigma0, double decay, int n);

struct IterationTrace {
    int iteration = 0;
    double sigma = 0.0;
    std::size_t pair_count = 0;
    std::size_t rejected_count = 0;
    /// Sum of G_sigma(r_i^2) for correntropy weighting, sum of r_i^2 otherwise.
    double objective = 0.0;
    double mean_mahalanobis = 0.0; ///< mean of r_i
    double step_norm = 0.0;
    int rank = 0; ///< numerical rank of the normal matrix
};

struct RegistrationResult {
    RigidTransform transform;
    bool converged = false;
    int iterations = 0;
    std::vector<IterationTrace> trace;
    std::size_t final_pairs = 0;
};

// --- per-pair model -------------------------------------------------------

/// Gaussian kernel (1 / (sqrt(2 pi) sigma)) exp(-r^2 / (2 sigma^2)).
/// Throws std::invalid_argument("nonpositive bandwidth") for sigma <= 0.
double correntropy_weight(double r_squared, double sigma);

struct Residual {
    double r_squared = 0.0;
    Vec3 e = Vec3::Zero(); ///< a - T b
};

Residual mahalanobis_residual(const Vec3& a, const Vec3& b, const RigidTransform& t,
                              const Mat3& omega);

using Jacobian = Eigen::Matrix<double, 3, 6>;

/// First-order model of a - T' b around T, with T' = retract(T, dx):
/// a - T' b ~ v + H dx, v = a - R b - t, H = [ (R b + t)^  -I ].
struct Linearization {
    Vec3 v = Vec3::Zero();
    Jacobian h = Jacobian::Zero();
};

Linearization linearize(const Vec3& a, const Vec3& b, const RigidTransform& t);

// --- objective variants ---------------------------------------------------

enum class Matching { ForwardOnly, Bidirectional };

enum class InformationModel {
    Identity,      ///< point-to-point
    PointToPlane,  ///< n n^T of the target normal
    Gicp,          ///< (Sigma_a + R Sigma_b R^T)^-1
    Bidirectional, ///< Omega_a + R Omega_b R^T
};

enum class Weighting { Unit, Correntropy };

struct ObjectiveModel {
    Matching matching = Matching::Bidirectional;
    InformationModel information = InformationModel::Bidirectional;
    Weighting weighting = Weighting::Correntropy;
};

inline constexpr ObjectiveModel kCoBigIcpModel{Matching::Bidirectional,
                                               InformationModel::Bidirectional,
                                               Weighting::Correntropy};

bool requires_target_stats(InformationModel m);
bool requires_source_stats(InformationModel m);

Mat3 pair_information(InformationModel model, const PointCloud& target, std::size_t target_index,
                      const PointCloud& source, std::size_t source_index, const Mat3& r);

/// r_i^2 of every pair under the current transform.
std::vector<double> squared_residuals(const CorrespondenceSet& pairs, const PointCloud& target,
                                      const PointCloud& source, const RigidTransform& t,
                                      InformationModel model);

// --- normal equations -----------------------------------------------------

struct NormalEquations {
    Mat6 a = Mat6::Zero();
    Vec6 b = Vec6::Zero();
    double objective = 0.0;
    double sum_mahalanobis = 0.0;
    std::size_t pair_count = 0;
};

struct AccumulateOptions {
    InformationModel information = InformationModel::Bidirectional;
    Weighting weighting = Weighting::Correntropy;
    /// Multiplies every weight; the step is invariant to it.
    double weight_scale = 1.0;
    Execution exec = Execution::Parallel;
};

/// A = sum w H^T Omega H, b = sum w H^T Omega v. The parallel path reduces
/// fixed-size blocks in a fixed order, so its result does not depend on the
/// thread count. Throws std::invalid_argument("no correspondences") on an
/// empty pair set.
NormalEquations accumulate_normal_equations(const CorrespondenceSet& pairs,
                                            const PointCloud& target, const PointCloud& source,
                                            const RigidTransform& t, double sigma,
                                            const AccumulateOptions& opts = {});

struct StepSolution {
    TangentVector dx;
    int rank = 0;
};

/// dx = -A^+ b. Singular values below pinv_tolerance * sigma_max are dropped;
/// an all-zero A gives a zero step with rank 0.
StepSolution solve_step(const Mat6& a, const Vec6& b, double pinv_tolerance);

// --- outer loop -----------------------------------------------------------

/// Alternates correspondence search, weight fixing and the closed-form step
/// until the step falls below both tolerances or max_iterations is reached.
///
/// Throws std::runtime_error("correspondence collapse") after three
/// consecutive iterations without accepted pairs and
/// std::runtime_error("numerical divergence") on a non-finite objective.
RegistrationResult run_registration(const PointCloud& source, const PointCloud& target,
                                    const RigidTransform& initial, const SolverConfig& cfg,
                                    const ObjectiveModel& model,
                                    Execution exec = Execution::Parallel);

/// CoBigICP: bidirectional matching, bidirectional information, correntropy
/// weights. Both clouds must carry stats.
RegistrationResult register_cobig(const PointCloud& source, const PointCloud& target,
                                  const RigidTransform& initial, const SolverConfig& cfg,
                                  Execution exec = Execution::Parallel);

// --- Gaussian + uniform mixture --------------------------------------------

/// Constants of p_mix(e) = c1 exp(-r^2 / 2) + c2 p0 and of its approximation
/// -log p_mix ~ d1 exp(-d2 r^2 / 2) + d3, where r^2 = e^T Omega e.
struct MixtureConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double p0 = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;

    double negative_log_likelihood(double r_squared) const;
    double approximation(double r_squared) const;
    /// Kernel bandwidth playing the role of d2: 1 / sqrt(d2).
    double equivalent_sigma() const;
};

/// c1 is the inlier Gaussian normalization scaled by (1 - outlier_ratio),
/// c2 the outlier ratio and p0 the uniform density. d1..d3 match -log p_mix at
/// r = 0, at r = 1 and as r -> infinity. Throws std::invalid_argument when
/// outlier_ratio is outside (0, 1) or uniform_density is not positive.
MixtureConstants fit_mixture_constants(double outlier_ratio, const Mat3& omega,
                                       double uniform_density = 1.0);

} // namespace cobig
