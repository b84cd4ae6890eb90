#include "cobig/solver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cobig {

void SolverConfig::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
    if (sigma0 && !(*sigma0 > 0.0)) {
        fail("sigma0 must be positive");
    }
    if (!(sigma_decay > 0.0 && sigma_decay <= 1.0)) {
        fail("sigma_decay must lie in (0, 1]");
    }
    if (max_iterations < 1) {
        fail("max_iterations must be at least 1");
    }
    if (!(translation_tol > 0.0) || !(rotation_tol > 0.0)) {
        fail("tolerances must be positive");
    }
    if (k_neighbors < 4) {
        fail("k_neighbors must be at least 4");
    }
    if (!(eps_plane > 0.0 && eps_plane <= 1.0)) {
        fail("eps_plane must lie in (0, 1]");
    }
    if (fixed_gate && !(*fixed_gate > 0.0)) {
        fail("gate must be positive");
    }
    if (!(pinv_tolerance >= 0.0 && pinv_tolerance < 1.0)) {
        fail("pinv_tolerance must lie in [0, 1)");
    }
}

double sigma_at(double sigma0, double decay, int n)
{
    return std::max(sigma0 * std::pow(decay, n), kSigmaFloorRatio * sigma0);
}

double correntropy_weight(double r_squared, double sigma)
{
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("nonpositive bandwidth");
    }
    return std::exp(-r_squared / (2.0 * sigma * sigma)) /
           (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

Residual mahalanobis_residual(const Vec3& a, const Vec3& b, const RigidTransform& t,
                              const Mat3& omega)
{
    Residual r;
    r.e = a - t.apply(b);
    r.r_squared = std::max(0.0, r.e.dot(omega * r.e));
    return r;
}

Linearization linearize(const Vec3& a, const Vec3& b, const RigidTransform& t)
{
    const Vec3 moved = t.apply(b);
    Linearization lin;
    lin.v = a - moved;
    lin.h.leftCols<3>() = hat(moved);
    lin.h.rightCols<3>() = -Mat3::Identity();
    return lin;
}

bool requires_target_stats(InformationModel m)
{
    return m != InformationModel::Identity;
}

bool requires_source_stats(InformationModel m)
{
    return m == InformationModel::Gicp || m == InformationModel::Bidirectional;
}

Mat3 pair_information(InformationModel model, const PointCloud& target, std::size_t target_index,
                      const PointCloud& source, std::size_t source_index, const Mat3& r)
{
    switch (model) {
    case InformationModel::Identity:
        return Mat3::Identity();
    case InformationModel::PointToPlane: {
        const Vec3& n = target.stats[target_index].normal;
        return n * n.transpose();
    }
    case InformationModel::Gicp:
        return gicp_information(target.stats[target_index].covariance,
                                source.stats[source_index].covariance, r);
    case InformationModel::Bidirectional:
        return combine_information(target.stats[target_index].information,
                                   source.stats[source_index].information, r);
    }
    throw std::logic_error("unknown information model");
}

namespace {

void require_stats(InformationModel model, const PointCloud& target, const PointCloud& source)
{
    if (requires_target_stats(model) && !target.has_stats()) {
        throw std::invalid_argument("target cloud is missing surface statistics");
    }
    if (requires_source_stats(model) && !source.has_stats()) {
        throw std::invalid_argument("source cloud is missing surface statistics");
    }
}

struct PairTerm {
    Mat6 a;
    Vec6 b;
    double objective;
    double mahalanobis;
};

PairTerm pair_term(const CorrespondencePair& p, const PointCloud& target,
                   const PointCloud& source, const RigidTransform& t, double sigma,
                   const AccumulateOptions& opts)
{
    const Vec3& a = target.points[p.target_index];
    const Vec3& b = source.points[p.source_index];
    const Mat3 omega = pair_information(opts.information, target, p.target_index, source,
                                        p.source_index, t.rotation);
    const Linearization lin = linearize(a, b, t);
    const double r2 = std::max(0.0, lin.v.dot(omega * lin.v));

    double w = opts.weight_scale;
    double objective = r2;
    if (opts.weighting == Weighting::Correntropy) {
        const double g = correntropy_weight(r2, sigma);
        w *= g;
        objective = g;
    }
    const Eigen::Matrix<double, 6, 3> hto = lin.h.transpose() * omega;
    return {w * hto * lin.h, w * hto * lin.v, objective, std::sqrt(r2)};
}

constexpr std::ptrdiff_t kReductionBlock = 256;

} // namespace

std::vector<double> squared_residuals(const CorrespondenceSet& pairs, const PointCloud& target,
                                      const PointCloud& source, const RigidTransform& t,
                                      InformationModel model)
{
    require_stats(model, target, source);
    std::vector<double> out;
    out.reserve(pairs.size());
    for (const CorrespondencePair& p : pairs.pairs) {
        const Mat3 omega =
            pair_information(model, target, p.target_index, source, p.source_index, t.rotation);
        out.push_back(mahalanobis_residual(target.points[p.target_index],
                                           source.points[p.source_index], t, omega)
                          .r_squared);
    }
    return out;
}

NormalEquations accumulate_normal_equations(const CorrespondenceSet& pairs,
                                            const PointCloud& target, const PointCloud& source,
                                            const RigidTransform& t, double sigma,
                                            const AccumulateOptions& opts)
{
    if (pairs.empty()) {
        throw std::invalid_argument("no correspondences");
    }
    require_stats(opts.information, target, source);
    if (opts.weighting == Weighting::Correntropy && !(sigma > 0.0)) {
        throw std::invalid_argument("nonpositive bandwidth");
    }

    const auto n = static_cast<std::ptrdiff_t>(pairs.size());
    NormalEquations ne;
    ne.pair_count = pairs.size();

    if (opts.exec == Execution::Serial) {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const PairTerm term = pair_term(pairs.pairs[i], target, source, t, sigma, opts);
            ne.a += term.a;
            ne.b += term.b;
            ne.objective += term.objective;
            ne.sum_mahalanobis += term.mahalanobis;
        }
        return ne;
    }

    // Blocks are summed serially inside, then combined in block order.
    const std::ptrdiff_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<NormalEquations> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
        NormalEquations& acc = partial[blk];
        const std::ptrdiff_t end = std::min(n, (blk + 1) * kReductionBlock);
        for (std::ptrdiff_t i = blk * kReductionBlock; i < end; ++i) {
            const PairTerm term = pair_term(pairs.pairs[i], target, source, t, sigma, opts);
            acc.a += term.a;
            acc.b += term.b;
            acc.objective += term.objective;
            acc.sum_mahalanobis += term.mahalanobis;
        }
    }
    for (const NormalEquations& acc : partial) {
        ne.a += acc.a;
        ne.b += acc.b;
        ne.objective += acc.objective;
        ne.sum_mahalanobis += acc.sum_mahalanobis;
    }
    return ne;
}

StepSolution solve_step(const Mat6& a, const Vec6& b, double pinv_tolerance)
{
    StepSolution out;
    const Mat6 sym = 0.5 * (a + a.transpose());
    if (sym.cwiseAbs().maxCoeff() == 0.0) {
        return out;
    }
    // For a symmetric matrix the singular values are the absolute eigenvalues.
    Eigen::SelfAdjointEigenSolver<Mat6> es(sym);
    const Vec6& lambda = es.eigenvalues();
    const Mat6& v = es.eigenvectors();
    const double cutoff = pinv_tolerance * lambda.cwiseAbs().maxCoeff();

    Vec6 coeffs = v.transpose() * b;
    for (int i = 0; i < 6; ++i) {
        if (std::abs(lambda[i]) > cutoff) {
            coeffs[i] /= lambda[i];
            ++out.rank;
        } else {
            coeffs[i] = 0.0;
        }
    }
    out.dx = TangentVector::from_vector(-(v * coeffs));
    return out;
}

RegistrationResult run_registration(const PointCloud& source, const PointCloud& target,
                                    const RigidTransform& initial, const SolverConfig& cfg,
                                    const ObjectiveModel& model, Execution exec)
{
    cfg.validate();
    if (source.empty() || target.empty()) {
        throw std::invalid_argument("empty point cloud");
    }
    require_stats(model.information, target, source);

    const NeighborIndex target_index(target.points);
    const AccumulateOptions opts{model.information, model.weighting, 1.0, exec};

    RegistrationResult result;
    result.transform = initial;
    std::optional<double> sigma0 = cfg.sigma0;
    int empty_streak = 0;

    for (int it = 0; it < cfg.max_iterations; ++it) {
        const NeighborIndex moved(transformed(source, result.transform).points);
        const auto forward = forward_search(target, moved, exec);
        CorrespondenceSet pairs;
        if (model.matching == Matching::Bidirectional) {
            const auto backward = backward_search(target_index, moved, forward, exec);
            const double gate = cfg.fixed_gate ? *cfg.fixed_gate : adaptive_gate(forward);
            pairs = bidirectional_filter(forward, backward, target, gate);
        } else {
            pairs = accept_all(forward);
        }

        IterationTrace tr;
        tr.iteration = it;
        tr.pair_count = pairs.size();
        tr.rejected_count = pairs.rejected_count;
        result.iterations = it + 1;

        if (pairs.empty()) {
            result.trace.push_back(tr);
            if (++empty_streak >= 3) {
                throw std::runtime_error("correspondence collapse");
            }
            continue;
        }
        empty_streak = 0;

        double sigma = 0.0;
        if (model.weighting == Weighting::Correntropy) {
            if (!sigma0) {
                const auto r2 = squared_residuals(pairs, target, source, result.transform,
                                                  model.information);
                sigma0 = std::max(std::sqrt(median(r2)), kMinAutoSigma);
            }
            sigma = sigma_at(*sigma0, cfg.sigma_decay, it);
        }

        const NormalEquations ne =
            accumulate_normal_equations(pairs, target, source, result.transform, sigma, opts);
        if (!std::isfinite(ne.objective) || !ne.a.allFinite() || !ne.b.allFinite()) {
            throw std::runtime_error("numerical divergence");
        }
        const StepSolution step = solve_step(ne.a, ne.b, cfg.pinv_tolerance);
        if (!step.dx.to_vector().allFinite()) {
            throw std::runtime_error("numerical divergence");
        }
        result.transform = retract(result.transform, step.dx);

        tr.sigma = sigma;
        tr.objective = ne.objective;
        tr.mean_mahalanobis = ne.sum_mahalanobis / static_cast<double>(ne.pair_count);
        tr.step_norm = step.dx.norm();
        tr.rank = step.rank;
        result.trace.push_back(tr);
        result.final_pairs = pairs.size();

        if (step.rank > 0 && step.dx.dt.norm() < cfg.translation_tol &&
            step.dx.xi.norm() < cfg.rotation_tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

RegistrationResult register_cobig(const PointCloud& source, const PointCloud& target,
                                  const RigidTransform& initial, const SolverConfig& cfg,
                                  Execution exec)
{
    return run_registration(source, target, initial, cfg, kCoBigIcpModel, exec);
}

double MixtureConstants::negative_log_likelihood(double r_squared) const
{
    return -std::log(c1 * std::exp(-0.5 * r_squared) + c2 * p0);
}

double MixtureConstants::approximation(double r_squared) const
{
    return d1 * std::exp(-0.5 * d2 * r_squared) + d3;
}

double MixtureConstants::equivalent_sigma() const
{
    return 1.0 / std::sqrt(d2);
}

MixtureConstants fit_mixture_constants(double outlier_ratio, const Mat3& omega,
                                       double uniform_density)
{
    if (!(outlier_ratio > 0.0 && outlier_ratio < 1.0)) {
        throw std::invalid_argument("outlier ratio must lie in (0, 1)");
    }
    if (!(uniform_density > 0.0)) {
        throw std::invalid_argument("uniform density must be positive");
    }
    const double det = omega.determinant();
    if (!(det > 0.0)) {
        throw std::invalid_argument("information matrix must be positive definite");
    }
    MixtureConstants m;
    m.c1 = (1.0 - outlier_ratio) * std::sqrt(det) / std::pow(2.0 * std::numbers::pi, 1.5);
    m.c2 = outlier_ratio;
    m.p0 = uniform_density;
    const double floor = m.c2 * m.p0;
    m.d3 = -std::log(floor);
    m.d1 = -std::log(m.c1 + floor) - m.d3;
    m.d2 = -2.0 * std::log((-std::log(m.c1 * std::exp(-0.5) + floor) - m.d3) / m.d1);
    return m;
}

} // namespace cobig
