// Acceptance suite: one PASS / FAIL / SKIP line per criterion, nonzero exit on any FAIL.
//
// Criterion 10 reads a scan directory (scans plus "<stem>.pose" sidecars) from
// COBIG_ETH_DIR and is skipped when the variable is unset.

#include "oracles.hpp"

#include "cobig/baselines.hpp"
#include "cobig/experiment.hpp"
#include "cobig/scene.hpp"
#include "cobig/solver.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>

using namespace cobig;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

Outcome check(bool ok, std::string detail)
{
    return {ok ? Verdict::Pass : Verdict::Fail, std::move(detail)};
}

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SyntheticScene scene_with_stats(const SceneParams& p, const SolverConfig& cfg = {})
{
    SyntheticScene s = make_synthetic_scene(p);
    estimate_stats(s.source, cfg.k_neighbors, cfg.eps_plane);
    estimate_stats(s.target, cfg.k_neighbors, cfg.eps_plane);
    return s;
}

Outcome manifold_suite()
{
    const auto t0 = std::chrono::steady_clock::now();
    oracle::Rng rng(101);
    double worst_orth = 0.0, worst_det = 0.0, worst_first = 0.0;
    bool retract_exact = true;
    for (int i = 0; i < 1000; ++i) {
        const Vec3 axis = rng.unit();
        const Mat3 r = exp_so3(rng.uniform(0.0, oracle::kPi) * axis);
        worst_orth = std::max(worst_orth, (r.transpose() * r - Mat3::Identity()).norm());
        worst_det = std::max(worst_det, std::abs(r.determinant() - 1.0));

        const RigidTransform t{r, rng.vec(-10, 10)};
        const RigidTransform same = retract(t, TangentVector{});
        retract_exact = retract_exact && same.rotation == t.rotation && same.translation == t.translation;

        const Vec3 phi = 1e-3 * axis;
        worst_first = std::max(worst_first, (exp_so3(phi) - (Mat3::Identity() + hat(phi))).norm());
    }
    const double dt = seconds_since(t0);
    return check(worst_orth < 1e-9 && worst_det < 1e-9 && retract_exact && worst_first <= 1e-6 && dt < 1.0,
                 fmt("orthogonality %.2e, det %.2e, first-order %.2e, retract(T,0) %s, %.3f s",
                     worst_orth, worst_det, worst_first, retract_exact ? "exact" : "inexact", dt));
}

Outcome oracle_equivalence()
{
    const auto t0 = std::chrono::steady_clock::now();
    oracle::Rng rng(202);
    int knn_bad = 0, corr_bad = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = static_cast<std::size_t>(rng.integer(1, 200));
        const bool lattice = trial % 2 == 1;
        const auto target = lattice ? oracle::lattice_cloud(rng, n, 3) : oracle::random_cloud(rng, n);

        const NeighborIndex index(target);
        const std::size_t k = static_cast<std::size_t>(rng.integer(1, 20));
        const Vec3 q = lattice ? Vec3(rng.integer(0, 3), rng.integer(0, 3), rng.integer(0, 3))
                               : rng.vec(-1.2, 1.2);
        const auto got = index.knn(q, k);
        const auto want = oracle::brute_knn(target, q, k);
        bool same = got.size() == want.size();
        for (std::size_t i = 0; same && i < got.size(); ++i) {
            same = got[i].index == want[i].index && got[i].squared_distance == want[i].d2;
        }
        knn_bad += same ? 0 : 1;

        const std::size_t m = std::min<std::size_t>(200, static_cast<std::size_t>(rng.integer(1, 200)));
        const auto source = lattice ? oracle::lattice_cloud(rng, m, 3) : oracle::random_cloud(rng, m);
        const RigidTransform t = lattice ? RigidTransform::identity() : oracle::random_transform(rng, 0.1);
        std::vector<Vec3> moved;
        for (const Vec3& p : source) {
            moved.push_back(t.apply(p));
        }
        PointCloud tgt;
        tgt.points = target;
        const NeighborIndex moved_index(moved);
        const auto fwd = forward_search(tgt, moved_index);
        const auto bwd = backward_search(index, moved_index, fwd);
        const double gate = rng.uniform(0.0, 1.0);
        const CorrespondenceSet set = bidirectional_filter(fwd, bwd, tgt, gate);
        const auto expected = oracle::brute_bidirectional(target, moved, gate);
        bool match = set.size() == expected.size();
        for (std::size_t i = 0; match && i < expected.size(); ++i) {
            match = set.pairs[i].target_index == expected[i].target &&
                    set.pairs[i].source_index == expected[i].source;
        }
        corr_bad += match ? 0 : 1;
    }
    const double dt = seconds_since(t0);
    return check(knn_bad == 0 && corr_bad == 0 && dt < 10.0,
                 fmt("knn mismatches %d/1000, correspondence mismatches %d/1000, %.2f s", knn_bad,
                     corr_bad, dt));
}

Outcome jacobian_check()
{
    oracle::Rng rng(303);
    const double h = 1e-6;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const RigidTransform t = oracle::random_transform(rng, 2.0);
        const Vec3 a = rng.vec(-3, 3), b = rng.vec(-3, 3);
        const Linearization lin = linearize(a, b, t);
        Jacobian fd;
        for (int k = 0; k < 6; ++k) {
            const Vec6 d = h * Vec6::Unit(k);
            fd.col(k) = (oracle::perturbed_residual(a, b, t, d) - oracle::perturbed_residual(a, b, t, -d)) / (2 * h);
        }
        worst = std::max(worst, (lin.h - fd).norm() / fd.norm());
    }
    return check(worst < 1e-5, fmt("worst relative error %.2e over 100 samples", worst));
}

Outcome closed_form_step()
{
    oracle::Rng rng(404);
    double worst_full = 0.0, worst_pinv = 0.0, worst_null = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Mat6 m;
        Vec6 b;
        for (int r = 0; r < 6; ++r) {
            b(r) = rng.normal();
            for (int c = 0; c < 6; ++c) {
                m(r, c) = rng.normal();
            }
        }
        const Mat6 full = m.transpose() * m + 0.5 * Mat6::Identity();
        worst_full = std::max(worst_full, (full * solve_step(full, b, 1e-8).dx.to_vector() + b).norm());

        const Mat6 q = Eigen::HouseholderQR<Mat6>(m).householderQ();
        Vec6 d = Vec6::Zero();
        d.head<3>() << rng.uniform(0.5, 5), rng.uniform(0.5, 5), rng.uniform(0.5, 5);
        const Mat6 deficient = q * d.asDiagonal() * q.transpose();
        const Vec6 dx = solve_step(deficient, b, 1e-8).dx.to_vector();
        worst_pinv = std::max(worst_pinv, (dx + oracle::pinv(deficient, 1e-8) * b).norm());
        worst_null = std::max(worst_null, (q.rightCols<3>().transpose() * dx).norm());
    }
    return check(worst_full < 1e-9 && worst_pinv < 1e-9 && worst_null < 1e-9,
                 fmt("full rank |A dx + b| %.2e, rank 3 vs SVD %.2e, null-space part %.2e",
                     worst_full, worst_pinv, worst_null));
}

Outcome noise_free_recovery()
{
    const auto t0 = std::chrono::steady_clock::now();
    const SyntheticScene s = scene_with_stats({});
    const RegistrationResult r = register_cobig(s.source, s.target, RigidTransform::identity(), {});
    const double dt = seconds_since(t0);
    const PoseError e = pose_error(r.transform, s.ground_truth);
    return check(r.converged && e.translation < 1e-6 && e.rotation < 1e-6 && r.iterations <= 50 && dt < 5.0,
                 fmt("e_trans %.2e m, e_rot %.2e rad, %d iterations, %.2f s", e.translation,
                     e.rotation, r.iterations, dt));
}

Outcome robustness_ordering()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> ct, cr, gt, gr;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SceneParams p;
        p.noise_sigma = 0.005;
        p.outlier_fraction = 0.2;
        p.seed = seed;
        const SyntheticScene s = scene_with_stats(p);
        const PoseError c = pose_error(register_cobig(s.source, s.target, {}, {}).transform, s.ground_truth);
        const PoseError g = pose_error(
            register_baseline(BaselineKind::Gicp, s.source, s.target, {}, {}).transform, s.ground_truth);
        ct.push_back(c.translation);
        cr.push_back(c.rotation);
        gt.push_back(g.translation);
        gr.push_back(g.rotation);
    }
    const double dt = seconds_since(t0);
    const double mct = oracle::median_of(ct), mcr = oracle::median_of(cr);
    const double mgt = oracle::median_of(gt), mgr = oracle::median_of(gr);
    const double deg = 180.0 / oracle::kPi;
    const bool ordered = mct < mgt && mcr < mgr;
    const bool bounded = mct < 0.01 && mcr * deg < 0.5;
    return check(ordered && bounded && dt < 120.0,
                 fmt("median cobig (%.3e m, %.4f deg) vs gicp (%.3e m, %.4f deg), %.1f s",
                     mct, mcr * deg, mgt, mgr * deg, dt));
}

Outcome convergence_basin()
{
    const SyntheticScene s = scene_with_stats({});
    int counts[2][2] = {};
    const PerturbationLevel levels[2] = {PerturbationLevel::Easy, PerturbationLevel::Medium};
    for (int l = 0; l < 2; ++l) {
        for (std::uint64_t i = 0; i < 50; ++i) {
            const RigidTransform init = perturb(s.ground_truth, levels[l], mix_seed(7000 + l, i));
            const RigidTransform c = register_cobig(s.source, s.target, init, {}).transform;
            const RigidTransform p =
                register_baseline(BaselineKind::PointToPoint, s.source, s.target, init, {}).transform;
            counts[l][0] += pose_error(c, s.ground_truth).translation < 0.05 ? 1 : 0;
            counts[l][1] += pose_error(p, s.ground_truth).translation < 0.05 ? 1 : 0;
        }
    }
    return check(counts[0][0] >= counts[0][1] && counts[1][0] >= counts[1][1],
                 fmt("easy cobig %d/50 vs p2pt %d/50, medium cobig %d/50 vs p2pt %d/50",
                     counts[0][0], counts[0][1], counts[1][0], counts[1][1]));
}

Outcome mixture_equivalence()
{
    oracle::Rng rng(808);
    double worst = 0.0;
    for (double rho : {0.1, 0.3, 0.5}) {
        const Mat3 om = oracle::random_spd(rng, 0.5);
        const double p0 = 0.02;
        const MixtureConstants m = fit_mixture_constants(rho, om, p0);
        const double c1 = (1 - rho) * std::sqrt(om.determinant()) / std::pow(2 * oracle::kPi, 1.5);
        const double at_zero = -std::log(c1 + rho * p0);
        const double at_inf = -std::log(rho * p0);
        worst = std::max(worst, std::abs(m.approximation(0.0) - at_zero));
        worst = std::max(worst, std::abs(m.approximation(1e8) - at_inf));
    }
    return check(worst < 1e-9, fmt("worst mismatch %.2e at r = 0 and r -> inf", worst));
}

Outcome argmin_invariance()
{
    SceneParams p;
    p.noise_sigma = 0.005;
    p.outlier_fraction = 0.2;
    p.seed = 5;
    const SyntheticScene s = scene_with_stats(p);
    const SolverConfig cfg;
    const NeighborIndex target_index(s.target.points);
    RigidTransform t = RigidTransform::identity();
    double sigma0 = 0.0;
    double worst = 0.0;
    int iterations = 0;
    for (int it = 0; it < 30; ++it) {
        const NeighborIndex moved(transformed(s.source, t).points);
        const auto fwd = forward_search(s.target, moved);
        const auto set = bidirectional_filter(fwd, backward_search(target_index, moved, fwd), s.target,
                                              adaptive_gate(fwd));
        if (it == 0) {
            sigma0 = std::max(std::sqrt(median(squared_residuals(set, s.target, s.source, t,
                                                                 InformationModel::Bidirectional))),
                              kMinAutoSigma);
        }
        const double sigma = sigma_at(sigma0, cfg.sigma_decay, it);
        AccumulateOptions scaled;
        scaled.weight_scale = 7.0;
        const NormalEquations a = accumulate_normal_equations(set, s.target, s.source, t, sigma);
        const NormalEquations b = accumulate_normal_equations(set, s.target, s.source, t, sigma, scaled);
        const StepSolution sa = solve_step(a.a, a.b, cfg.pinv_tolerance);
        const StepSolution sb = solve_step(b.a, b.b, cfg.pinv_tolerance);
        worst = std::max(worst, (sa.dx.to_vector() - sb.dx.to_vector()).norm());
        t = retract(t, sa.dx);
        ++iterations;
    }
    return check(worst < 1e-10, fmt("worst step change %.2e over %d iterations", worst, iterations));
}

Outcome dataset_check()
{
    const char* dir = std::getenv("COBIG_ETH_DIR");
    if (dir == nullptr || *dir == '\0') {
        return {Verdict::Skip, "COBIG_ETH_DIR not set"};
    }
    ExperimentSpec spec;
    spec.dataset_dir = dir;
    spec.downsample_fraction = 0.1;
    spec.rng_seed = 1;
    const auto rows = run_sequence(spec);
    const Summary sum = summarize(rows);
    const double deg = to_degrees(sum.mean_e_rot);
    return check(sum.mean_e_trans <= 0.02 && deg <= 0.5,
                 fmt("%zu pairs, mean e_trans %.4f m, mean e_rot %.3f deg", sum.pairs,
                     sum.mean_e_trans, deg));
}

} // namespace

int main()
{
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"manifold suite", manifold_suite},
        {"oracle equivalence", oracle_equivalence},
        {"Jacobian check", jacobian_check},
        {"closed-form step", closed_form_step},
        {"noise-free recovery", noise_free_recovery},
        {"robustness ordering", robustness_ordering},
        {"convergence basin", convergence_basin},
        {"correntropy-NDT equivalence", mixture_equivalence},
        {"argmin invariance", argmin_invariance},
        {"dataset accuracy", dataset_check},
    };
    int failures = 0;
    int n = 0;
    for (const auto& [name, run] : criteria) {
        ++n;
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {Verdict::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
        std::printf("criterion %2d %-28s %s  %s\n", n, name, tag, o.detail.c_str());
        std::fflush(stdout);
        failures += o.verdict == Verdict::Fail ? 1 : 0;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
