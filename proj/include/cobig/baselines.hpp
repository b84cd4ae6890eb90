#pragma once

#include "cobig/solver.hpp"

#include <optional>
#include <string_view>

namespace cobig {

/// Reference registrars sharing the CoBigICP outer loop, correspondence
/// search and stopping rule. All of them match forward only.
enum class BaselineKind {
    PointToPoint, ///< Omega = I, unit weights
    PointToPlane, ///< Omega = n n^T of the target normal, unit weights
    Gicp,         ///< Omega = (Sigma_a + R Sigma_b R^T)^-1, unit weights
    CoGicp,       ///< GICP information with correntropy weights
};

ObjectiveModel objective_model(BaselineKind kind);

/// Throws std::invalid_argument when a required cloud lacks stats.
RegistrationResult register_baseline(BaselineKind kind, const PointCloud& source,
                                     const PointCloud& target, const RigidTransform& initial,
                                     const SolverConfig& cfg,
                                     Execution exec = Execution::Parallel);

/// Algorithm selector used by the CLI and experiment specs: CoBigICP or one
/// of the baselines. Names: cobig, cogicp, gicp, p2pt, p2pl.
struct Algorithm {
    std::optional<BaselineKind> baseline; ///< unset selects CoBigICP

    static Algorithm cobig() { return {}; }
    static Algorithm from(BaselineKind k) { return {k}; }
    std::string_view name() const;
    ObjectiveModel model() const;
};

/// Throws std::invalid_argument on an unknown name.
Algorithm parse_algorithm(std::string_view name);

RegistrationResult register_with(const Algorithm& algo, const PointCloud& source,
                                 const PointCloud& target, const RigidTransform& initial,
                                 const SolverConfig& cfg, Execution exec = Execution::Parallel);

} // namespace cobig
