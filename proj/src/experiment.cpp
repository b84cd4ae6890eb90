#include "cobig/experiment.hpp"

#include "cobig/cloud_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace cobig {

namespace fs = std::filesystem;

PointCloud downsample(const PointCloud& cloud, double fraction, std::uint64_t seed)
{
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("downsample fraction must lie in (0, 1]");
    }
    const auto n = cloud.size();
    // The small slack keeps e.g. 0.1 * 100 from rounding up to 11.
    const auto keep = std::min<std::size_t>(
        n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
    if (keep == n) {
        return cloud;
    }
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) {
        all[i] = i;
    }
    std::vector<std::size_t> chosen;
    chosen.reserve(keep);
    std::mt19937_64 rng(seed);
    std::sample(all.begin(), all.end(), std::back_inserter(chosen), keep, rng);

    PointCloud out;
    out.points.reserve(keep);
    for (std::size_t i : chosen) {
        out.points.push_back(cloud.points[i]);
    }
    if (cloud.has_stats()) {
        out.stats.reserve(keep);
        for (std::size_t i : chosen) {
            out.stats.push_back(cloud.stats[i]);
        }
    }
    return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size)
{
    if (!(voxel_size > 0.0)) {
        throw std::invalid_argument("voxel size must be positive");
    }
    struct Cell {
        Vec3 sum = Vec3::Zero();
        std::size_t count = 0;
    };
    struct KeyHash {
        std::size_t operator()(const std::array<long long, 3>& k) const
        {
            return static_cast<std::size_t>(
                mix_seed(static_cast<std::uint64_t>(k[0]),
                         mix_seed(static_cast<std::uint64_t>(k[1]),
                                  static_cast<std::uint64_t>(k[2]))));
        }
    };
    std::unordered_map<std::array<long long, 3>, std::size_t, KeyHash> slot;
    std::vector<Cell> cells;
    for (const Vec3& p : cloud.points) {
        const std::array<long long, 3> key{static_cast<long long>(std::floor(p.x() / voxel_size)),
                                           static_cast<long long>(std::floor(p.y() / voxel_size)),
                                           static_cast<long long>(std::floor(p.z() / voxel_size))};
        auto [it, inserted] = slot.emplace(key, cells.size());
        if (inserted) {
            cells.emplace_back();
        }
        cells[it->second].sum += p;
        ++cells[it->second].count;
    }
    PointCloud out;
    out.points.reserve(cells.size());
    for (const Cell& c : cells) {
        out.points.push_back(c.sum / static_cast<double>(c.count));
    }
    return out;
}

PerturbationLevel parse_perturbation_level(std::string_view name)
{
    if (name == "none") {
        return PerturbationLevel::None;
    }
    if (name == "easy") {
        return PerturbationLevel::Easy;
    }
    if (name == "medium") {
        return PerturbationLevel::Medium;
    }
    if (name == "hard") {
        return PerturbationLevel::Hard;
    }
    throw std::invalid_argument("unknown perturbation level '" + std::string(name) +
                                "' (expected none, easy, medium or hard)");
}

std::string_view perturbation_level_name(PerturbationLevel level)
{
    switch (level) {
    case PerturbationLevel::None:
        return "none";
    case PerturbationLevel::Easy:
        return "easy";
    case PerturbationLevel::Medium:
        return "medium";
    case PerturbationLevel::Hard:
        return "hard";
    }
    return "?";
}

PerturbationBounds perturbation_bounds(PerturbationLevel level)
{
    constexpr double deg = std::numbers::pi / 180.0;
    switch (level) {
    case PerturbationLevel::None:
        return {0.0, 0.0};
    case PerturbationLevel::Easy:
        return {0.1, 5.0 * deg};
    case PerturbationLevel::Medium:
        return {0.5, 20.0 * deg};
    case PerturbationLevel::Hard:
        return {1.0, 45.0 * deg};
    }
    return {};
}

namespace {

Vec3 uniform_in_ball(std::mt19937_64& rng, double radius)
{
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    for (;;) {
        const Vec3 v(sym(rng), sym(rng), sym(rng));
        if (v.squaredNorm() <= 1.0) {
            return radius * v;
        }
    }
}

} // namespace

RigidTransform perturb(const RigidTransform& ground_truth, PerturbationLevel level,
                       std::uint64_t seed)
{
    if (level == PerturbationLevel::None) {
        return ground_truth;
    }
    const PerturbationBounds bounds = perturbation_bounds(level);
    std::mt19937_64 rng(seed);
    TangentVector dx;
    dx.xi = uniform_in_ball(rng, bounds.rotation);
    dx.dt = uniform_in_ball(rng, bounds.translation);
    return retract(ground_truth, dx);
}

// --- spec --------------------------------------------------------------------

void ExperimentSpec::validate() const
{
    if (!(downsample_fraction > 0.0 && downsample_fraction <= 1.0)) {
        throw std::invalid_argument("downsample_fraction must lie in (0, 1]");
    }
    if (!(voxel_size > 0.0)) {
        throw std::invalid_argument("voxel_size must be positive");
    }
    if (repetitions < 1) {
        throw std::invalid_argument("repetitions must be at least 1");
    }
    config.validate();
}

ExperimentSpec experiment_spec_from(const KeyValues& kv)
{
    ExperimentSpec spec;
    auto on_off = [](const std::string& key, const std::string& v) {
        if (v == "on" || v == "true" || v == "1") {
            return true;
        }
        if (v == "off" || v == "false" || v == "0") {
            return false;
        }
        throw std::invalid_argument(key + ": expected on or off, got '" + v + "'");
    };
    auto non_negative = [](const std::string& key, long long v) {
        if (v < 0) {
            throw std::invalid_argument(key + " must be non-negative");
        }
        return v;
    };
    for (const auto& [key, value] : kv) {
        if (apply_solver_key(spec.config, key, value)) {
            continue;
        }
        if (key == "algorithm") {
            spec.algorithm = parse_algorithm(value);
        } else if (key == "dataset_dir") {
            spec.dataset_dir = value;
        } else if (key == "scene") {
            spec.synthetic.kind = parse_scene_kind(value);
        } else if (key == "n_points") {
            spec.synthetic.n_points =
                static_cast<std::size_t>(non_negative(key, parse_integer(key, value)));
        } else if (key == "noise") {
            spec.synthetic.noise_sigma = parse_double(key, value);
        } else if (key == "outliers") {
            spec.synthetic.outlier_fraction = parse_double(key, value);
        } else if (key == "scene_seed") {
            spec.synthetic.seed =
                static_cast<std::uint64_t>(non_negative(key, parse_integer(key, value)));
        } else if (key == "rotation_deg") {
            spec.synthetic.rotation_deg = parse_double(key, value);
        } else if (key == "translation_m") {
            spec.synthetic.translation_m = parse_double(key, value);
        } else if (key == "downsample") {
            if (value == "random") {
                spec.downsample_mode = DownsampleMode::Random;
            } else if (value == "voxel") {
                spec.downsample_mode = DownsampleMode::Voxel;
            } else {
                throw std::invalid_argument("downsample: expected random or voxel");
            }
        } else if (key == "downsample_fraction") {
            spec.downsample_fraction = parse_double(key, value);
        } else if (key == "voxel_size") {
            spec.voxel_size = parse_double(key, value);
        } else if (key == "seed") {
            spec.rng_seed = static_cast<std::uint64_t>(non_negative(key, parse_integer(key, value)));
        } else if (key == "perturbation") {
            spec.perturbation = parse_perturbation_level(value);
        } else if (key == "start") {
            if (value == "perturbed") {
                spec.start = StartPose::Perturbed;
            } else if (value == "identity") {
                spec.start = StartPose::Identity;
            } else {
                throw std::invalid_argument("start: expected perturbed or identity");
            }
        } else if (key == "repetitions") {
            spec.repetitions = static_cast<int>(parse_integer(key, value));
        } else if (key == "timing") {
            spec.record_timing = on_off(key, value);
        } else {
            throw std::invalid_argument("unknown experiment key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

ExperimentSpec read_experiment_spec(const std::string& path)
{
    return experiment_spec_from(read_key_values(path));
}

// --- running -------------------------------------------------------------------

std::vector<std::string> list_scans(const std::string& dataset_dir)
{
    if (!fs::is_directory(dataset_dir)) {
        throw std::runtime_error("dataset directory not found: " + dataset_dir);
    }
    std::vector<std::string> scans;
    for (const auto& entry : fs::directory_iterator(dataset_dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const std::string ext = entry.path().extension().string();
        if (ext == ".ply" || ext == ".xyz" || ext == ".txt" || ext == ".csv" || ext == ".pts") {
            scans.push_back(entry.path().string());
        }
    }
    std::sort(scans.begin(), scans.end());
    return scans;
}

namespace {

PointCloud preprocess(PointCloud cloud, const ExperimentSpec& spec, std::uint64_t seed,
                      bool need_stats)
{
    if (spec.downsample_mode == DownsampleMode::Voxel) {
        cloud = voxel_downsample(cloud, spec.voxel_size);
    } else if (spec.downsample_fraction < 1.0) {
        cloud = downsample(cloud, spec.downsample_fraction, seed);
    }
    cloud.stats.clear();
    if (need_stats || cloud.size() >= static_cast<std::size_t>(spec.config.k_neighbors)) {
        estimate_stats(cloud, spec.config.k_neighbors, spec.config.eps_plane);
    }
    return cloud;
}

PairResult register_pair(const std::string& id, const PointCloud& source,
                         const PointCloud& target, const RigidTransform& gt,
                         const RigidTransform& init, const ExperimentSpec& spec, Execution exec)
{
    const auto start = std::chrono::steady_clock::now();
    const RegistrationResult r =
        register_with(spec.algorithm, source, target, init, spec.config, exec);
    const auto stop = std::chrono::steady_clock::now();
    const PoseError err = pose_error(r.transform, gt);
    PairResult out;
    out.pair_id = id;
    out.e_trans = err.translation;
    out.e_rot = err.rotation;
    out.wall_time =
        spec.record_timing ? std::chrono::duration<double>(stop - start).count() : 0.0;
    out.iterations = r.iterations;
    out.converged = r.converged;
    return out;
}

RigidTransform start_pose(const ExperimentSpec& spec, const RigidTransform& gt,
                          std::uint64_t seed)
{
    if (spec.start == StartPose::Identity) {
        return RigidTransform::identity();
    }
    return perturb(gt, spec.perturbation, seed);
}

std::string rep_suffix(const ExperimentSpec& spec, int rep)
{
    if (spec.repetitions == 1) {
        return {};
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%03d", rep);
    return buf;
}

} // namespace

std::vector<PairResult> run_sequence(const ExperimentSpec& spec, Execution exec)
{
    spec.validate();
    const ObjectiveModel model = spec.algorithm.model();
    const bool need_stats = requires_target_stats(model.information);
    std::vector<PairResult> results;

    if (spec.dataset_dir.empty()) {
        for (int rep = 0; rep < spec.repetitions; ++rep) {
            SceneParams params = spec.synthetic;
            params.seed = spec.synthetic.seed + static_cast<std::uint64_t>(rep);
            SyntheticScene scene = make_synthetic_scene(params);
            const std::uint64_t base = mix_seed(spec.rng_seed, static_cast<std::uint64_t>(rep));
            const PointCloud target =
                preprocess(std::move(scene.target), spec, mix_seed(base, 1), need_stats);
            const PointCloud source =
                preprocess(std::move(scene.source), spec, mix_seed(base, 2), need_stats);
            const RigidTransform init = start_pose(spec, scene.ground_truth, mix_seed(base, 3));
            char id[32];
            std::snprintf(id, sizeof id, "rep_%03d", rep);
            results.push_back(
                register_pair(id, source, target, scene.ground_truth, init, spec, exec));
        }
        return results;
    }

    const auto scans = list_scans(spec.dataset_dir);
    if (scans.size() < 2) {
        throw std::runtime_error("dataset needs at least two scans: " + spec.dataset_dir);
    }
    std::vector<RigidTransform> poses;
    std::vector<PointCloud> clouds;
    for (std::size_t k = 0; k < scans.size(); ++k) {
        const fs::path scan(scans[k]);
        const fs::path pose = scan.parent_path() / (scan.stem().string() + ".pose");
        if (!fs::exists(pose)) {
            throw std::runtime_error("missing ground-truth file for " + scan.filename().string() +
                                     ": expected " + pose.filename().string());
        }
        poses.push_back(read_transform_file(pose.string()));
        clouds.push_back(preprocess(load_cloud(scans[k]).cloud, spec,
                                    mix_seed(spec.rng_seed, 1000 + k), need_stats));
    }
    for (std::size_t k = 0; k + 1 < scans.size(); ++k) {
        const RigidTransform gt = compose(invert(poses[k]), poses[k + 1]);
        const std::string base_id =
            fs::path(scans[k]).stem().string() + "-" + fs::path(scans[k + 1]).stem().string();
        for (int rep = 0; rep < spec.repetitions; ++rep) {
            const RigidTransform init =
                start_pose(spec, gt, mix_seed(spec.rng_seed, (k << 20) + static_cast<std::size_t>(rep)));
            results.push_back(register_pair(base_id + rep_suffix(spec, rep), clouds[k + 1],
                                            clouds[k], gt, init, spec, exec));
        }
    }
    return results;
}

Summary summarize(const std::vector<PairResult>& results)
{
    Summary s;
    s.pairs = results.size();
    if (results.empty()) {
        return s;
    }
    std::size_t converged = 0;
    for (const PairResult& r : results) {
        s.mean_e_trans += r.e_trans;
        s.mean_e_rot += r.e_rot;
        s.mean_time += r.wall_time;
        converged += r.converged ? 1 : 0;
    }
    const double n = static_cast<double>(results.size());
    s.mean_e_trans /= n;
    s.mean_e_rot /= n;
    s.mean_time /= n;
    s.converged_fraction = static_cast<double>(converged) / n;
    return s;
}

std::vector<std::pair<double, double>> ecdf(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(values.size());
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.emplace_back(values[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

namespace {

class CsvFile {
public:
    explicit CsvFile(const fs::path& path) : path_(path.string()), f_(std::fopen(path_.c_str(), "w"))
    {
        if (f_ == nullptr) {
            throw std::runtime_error("cannot write report file: " + path_);
        }
    }
    ~CsvFile()
    {
        if (f_ != nullptr) {
            std::fclose(f_);
        }
    }
    CsvFile(const CsvFile&) = delete;
    CsvFile& operator=(const CsvFile&) = delete;

    std::FILE* get() { return f_; }
    void close()
    {
        const int rc = std::fclose(f_);
        f_ = nullptr;
        if (rc != 0) {
            throw std::runtime_error("error writing report file: " + path_);
        }
    }

private:
    std::string path_;
    std::FILE* f_;
};

void write_ecdf(const fs::path& path, const std::vector<double>& values)
{
    CsvFile f(path);
    std::fprintf(f.get(), "error,probability\n");
    for (const auto& [x, p] : ecdf(values)) {
        std::fprintf(f.get(), "%.17g,%.17g\n", x, p);
    }
    f.close();
}

} // namespace

void emit_report(const std::vector<PairResult>& results, const std::string& out_dir)
{
    fs::create_directories(out_dir);
    const fs::path dir(out_dir);

    std::vector<double> trans;
    std::vector<double> rot_deg;
    for (const PairResult& r : results) {
        trans.push_back(r.e_trans);
        rot_deg.push_back(to_degrees(r.e_rot));
    }

    {
        CsvFile f(dir / "pairs.csv");
        std::fprintf(f.get(), "pair_id,e_trans,e_rot,time,iterations,converged\n");
        for (std::size_t i = 0; i < results.size(); ++i) {
            const PairResult& r = results[i];
            std::fprintf(f.get(), "%s,%.17g,%.17g,%.6f,%d,%d\n", r.pair_id.c_str(), trans[i],
                         rot_deg[i], r.wall_time, r.iterations, r.converged ? 1 : 0);
        }
        f.close();
    }
    {
        // Means are taken over the same values written to pairs.csv.
        double sum_t = 0.0;
        double sum_r = 0.0;
        for (std::size_t i = 0; i < results.size(); ++i) {
            sum_t += trans[i];
            sum_r += rot_deg[i];
        }
        const Summary s = summarize(results);
        const double n = results.empty() ? 1.0 : static_cast<double>(results.size());
        CsvFile f(dir / "summary.csv");
        std::fprintf(f.get(), "pairs,mean_e_trans,mean_e_rot,mean_time,converged_fraction\n");
        std::fprintf(f.get(), "%zu,%.17g,%.17g,%.6f,%.17g\n", s.pairs, sum_t / n, sum_r / n,
                     s.mean_time, s.converged_fraction);
        f.close();
    }
    write_ecdf(dir / "ecdf_translation.csv", trans);
    write_ecdf(dir / "ecdf_rotation.csv", rot_deg);
}

} // namespace cobig
