#include "cobig/scene.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace cobig {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

SceneKind parse_scene_kind(std::string_view name)
{
    if (name == "plane_corner") {
        return SceneKind::PlaneCorner;
    }
    if (name == "corridor") {
        return SceneKind::Corridor;
    }
    if (name == "random_surfaces") {
        return SceneKind::RandomSurfaces;
    }
    throw std::invalid_argument("unknown scene kind '" + std::string(name) +
                                "' (expected plane_corner, corridor or random_surfaces)");
}

std::string_view scene_kind_name(SceneKind kind)
{
    switch (kind) {
    case SceneKind::PlaneCorner:
        return "plane_corner";
    case SceneKind::Corridor:
        return "corridor";
    case SceneKind::RandomSurfaces:
        return "random_surfaces";
    }
    return "?";
}

namespace {

using Rng = std::mt19937_64;

Vec3 random_unit(Rng& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    for (;;) {
        const Vec3 v(g(rng), g(rng), g(rng));
        const double n = v.norm();
        if (n > 1e-9) {
            return v / n;
        }
    }
}

// Rectangle spanned by origin + s*u + t*v, s in [0, su], t in [0, sv].
struct Patch {
    Vec3 origin;
    Vec3 u;
    Vec3 v;
    double su;
    double sv;
    double area() const { return su * sv; }
};

struct Sphere {
    Vec3 center;
    double radius;
    double area() const { return 4.0 * std::numbers::pi * radius * radius; }
};

// Splits n samples across surfaces proportionally to area; the remainder goes
// to the first surfaces.
std::vector<std::size_t> allocate(const std::vector<double>& areas, std::size_t n)
{
    double total = 0.0;
    for (double a : areas) {
        total += a;
    }
    std::vector<std::size_t> counts(areas.size());
    std::size_t used = 0;
    for (std::size_t i = 0; i < areas.size(); ++i) {
        counts[i] = static_cast<std::size_t>(std::floor(static_cast<double>(n) * areas[i] / total));
        used += counts[i];
    }
    for (std::size_t i = 0; used < n; i = (i + 1) % counts.size(), ++used) {
        ++counts[i];
    }
    return counts;
}

std::vector<Vec3> sample_scene(SceneKind kind, std::size_t n, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Patch> patches;
    std::vector<Sphere> spheres;

    switch (kind) {
    case SceneKind::PlaneCorner: {
        const Vec3 c(-1.0, -1.0, -1.0);
        patches.push_back({c, Vec3::UnitY(), Vec3::UnitZ(), 2.0, 2.0}); // x = -1
        patches.push_back({c, Vec3::UnitX(), Vec3::UnitZ(), 2.0, 2.0}); // y = -1
        patches.push_back({c, Vec3::UnitX(), Vec3::UnitY(), 2.0, 2.0}); // z = -1
        break;
    }
    case SceneKind::Corridor: {
        patches.push_back({Vec3(-4, -1, 0), Vec3::UnitX(), Vec3::UnitY(), 8.0, 2.0});   // floor
        patches.push_back({Vec3(-4, -1, 2.5), Vec3::UnitX(), Vec3::UnitY(), 8.0, 2.0}); // ceiling
        patches.push_back({Vec3(-4, -1, 0), Vec3::UnitX(), Vec3::UnitZ(), 8.0, 2.5});   // wall y = -1
        patches.push_back({Vec3(-4, 1, 0), Vec3::UnitX(), Vec3::UnitZ(), 8.0, 2.5});    // wall y = 1
        break;
    }
    case SceneKind::RandomSurfaces: {
        std::uniform_real_distribution<double> box(-1.0, 1.0);
        for (int i = 0; i < 4; ++i) {
            const Vec3 normal = random_unit(rng);
            Vec3 u = normal.unitOrthogonal();
            Vec3 v = normal.cross(u);
            const Vec3 center(box(rng), box(rng), box(rng));
            patches.push_back({center - 0.75 * (u + v), u, v, 1.5, 1.5});
        }
        spheres.push_back({Vec3(box(rng), box(rng), box(rng)) * 0.5, 0.6});
        break;
    }
    }

    std::vector<double> areas;
    for (const Patch& p : patches) {
        areas.push_back(p.area());
    }
    for (const Sphere& s : spheres) {
        areas.push_back(s.area());
    }
    const auto counts = allocate(areas, n);

    std::vector<Vec3> points;
    points.reserve(n);
    std::size_t surface = 0;
    for (const Patch& p : patches) {
        for (std::size_t i = 0; i < counts[surface]; ++i) {
            const double s = unit(rng) * p.su;
            const double t = unit(rng) * p.sv;
            points.push_back(p.origin + s * p.u + t * p.v);
        }
        ++surface;
    }
    for (const Sphere& s : spheres) {
        for (std::size_t i = 0; i < counts[surface]; ++i) {
            points.push_back(s.center + s.radius * random_unit(rng));
        }
        ++surface;
    }
    return points;
}

} // namespace

SyntheticScene make_synthetic_scene(const SceneParams& params)
{
    if (!(params.outlier_fraction >= 0.0 && params.outlier_fraction < 1.0)) {
        throw std::invalid_argument("outlier fraction must lie in [0, 1)");
    }
    if (params.n_points == 0) {
        throw std::invalid_argument("scene needs at least one point");
    }
    if (!(params.noise_sigma >= 0.0)) {
        throw std::invalid_argument("noise sigma must be non-negative");
    }

    // Independent streams so that changing the noise level does not move the
    // sample positions.
    Rng geometry(mix_seed(params.seed, 1));
    Rng pose_rng(mix_seed(params.seed, 2));
    Rng noise_rng(mix_seed(params.seed, 3));
    Rng outlier_rng(mix_seed(params.seed, 4));

    SyntheticScene scene;
    scene.target.points = sample_scene(params.kind, params.n_points, geometry);

    const double angle = params.rotation_deg * std::numbers::pi / 180.0;
    scene.ground_truth.rotation = exp_so3(angle * random_unit(pose_rng));
    scene.ground_truth.translation = params.translation_m * random_unit(pose_rng);

    const RigidTransform inverse = invert(scene.ground_truth);
    std::normal_distribution<double> noise(0.0, 1.0);
    scene.source.points.reserve(params.n_points);
    for (const Vec3& a : scene.target.points) {
        Vec3 b = inverse.apply(a);
        if (params.noise_sigma > 0.0) {
            b += params.noise_sigma * Vec3(noise(noise_rng), noise(noise_rng), noise(noise_rng));
        }
        scene.source.points.push_back(b);
    }

    scene.outlier_count = static_cast<std::size_t>(
        std::floor(params.outlier_fraction * static_cast<double>(params.n_points)));
    if (scene.outlier_count > 0) {
        Vec3 lo = scene.source.points.front();
        Vec3 hi = lo;
        for (const Vec3& p : scene.source.points) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Vec3 center = 0.5 * (lo + hi);
        const Vec3 half = hi - lo; // 2x the inlier half-extent
        std::uniform_real_distribution<double> sym(-1.0, 1.0);
        for (std::size_t i = 0; i < scene.outlier_count; ++i) {
            const Vec3 r(sym(outlier_rng), sym(outlier_rng), sym(outlier_rng));
            scene.source.points.push_back(center + half.cwiseProduct(r));
        }
    }
    return scene;
}

} // namespace cobig
