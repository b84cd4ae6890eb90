#pragma once

#include "cobig/baselines.hpp"
#include "cobig/config.hpp"
#include "cobig/scene.hpp"
#include "cobig/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cobig {

// --- preprocessing ----------------------------------------------------------

/// Uniform random subset of ceil(fraction * N) points without replacement,
/// original order preserved. Deterministic for a given seed.
PointCloud downsample(const PointCloud& cloud, double fraction, std::uint64_t seed);

/// One centroid per occupied voxel, in order of first occurrence.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

// --- initial pose perturbation ----------------------------------------------

enum class PerturbationLevel { None, Easy, Medium, Hard };

PerturbationLevel parse_perturbation_level(std::string_view name);
std::string_view perturbation_level_name(PerturbationLevel level);

struct PerturbationBounds {
    double translation = 0.0; ///< m
    double rotation = 0.0;    ///< rad
};

/// easy: 0.1 m / 5 deg, medium: 0.5 m / 20 deg, hard: 1.0 m / 45 deg.
PerturbationBounds perturbation_bounds(PerturbationLevel level);

/// retract(ground_truth, dx) with the translation and rotation parts of dx
/// drawn uniformly from balls of the level's radii.
RigidTransform perturb(const RigidTransform& ground_truth, PerturbationLevel level,
                       std::uint64_t seed);

// --- experiments -------------------------------------------------------------

enum class DownsampleMode { Random, Voxel };
enum class StartPose { Perturbed, Identity };

struct ExperimentSpec {
    Algorithm algorithm = Algorithm::cobig();
    /// Directory of scans with "<stem>.pose" sidecars. Empty selects the
    /// synthetic scene below.
    std::string dataset_dir;
    SceneParams synthetic;
    DownsampleMode downsample_mode = DownsampleMode::Random;
    double downsample_fraction = 1.0;
    double voxel_size = 0.1;
    std::uint64_t rng_seed = 0;
    PerturbationLevel perturbation = PerturbationLevel::None;
    StartPose start = StartPose::Perturbed;
    int repetitions = 1;
    /// When false the time column is written as 0 so reports are byte-stable.
    bool record_timing = true;
    SolverConfig config;

    void validate() const;
};

/// Parses a key = value spec file. Experiment keys: algorithm, dataset_dir,
/// scene, n_points, noise, outliers, scene_seed, rotation_deg, translation_m,
/// downsample (random|voxel), downsample_fraction, voxel_size, seed,
/// perturbation, start (perturbed|identity), repetitions, timing (on|off).
/// Any SolverConfig key is accepted as well.
ExperimentSpec read_experiment_spec(const std::string& path);
ExperimentSpec experiment_spec_from(const KeyValues& kv);

struct PairResult {
    std::string pair_id;
    double e_trans = 0.0;   ///< m
    double e_rot = 0.0;     ///< rad
    double wall_time = 0.0; ///< s
    int iterations = 0;
    bool converged = false;
};

/// Scans in a dataset directory, sorted by file name.
std::vector<std::string> list_scans(const std::string& dataset_dir);

/// Registers every consecutive scan pair (scan k+1 onto scan k) or, in
/// synthetic mode, every repetition. Throws std::runtime_error naming the
/// expected sidecar when a ground-truth pose file is missing.
std::vector<PairResult> run_sequence(const ExperimentSpec& spec,
                                     Execution exec = Execution::Parallel);

struct Summary {
    std::size_t pairs = 0;
    double mean_e_trans = 0.0; ///< m
    double mean_e_rot = 0.0;   ///< rad
    double mean_time = 0.0;
    double converged_fraction = 0.0;
};

Summary summarize(const std::vector<PairResult>& results);

/// (value, i / N) for the sorted values, i = 1..N.
std::vector<std::pair<double, double>> ecdf(std::vector<double> values);

inline double to_degrees(double rad) { return rad * (180.0 / 3.14159265358979323846); }

/// Writes pairs.csv, summary.csv, ecdf_translation.csv and
/// ecdf_rotation.csv into out_dir (created if needed). Rotation columns are
/// in degrees.
void emit_report(const std::vector<PairResult>& results, const std::string& out_dir);

} // namespace cobig
