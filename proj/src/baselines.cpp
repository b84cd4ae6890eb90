#include "cobig/baselines.hpp"

#include <stdexcept>
#include <string>

namespace cobig {

ObjectiveModel objective_model(BaselineKind kind)
{
    switch (kind) {
    case BaselineKind::PointToPoint:
        return {Matching::ForwardOnly, InformationModel::Identity, Weighting::Unit};
    case BaselineKind::PointToPlane:
        return {Matching::ForwardOnly, InformationModel::PointToPlane, Weighting::Unit};
    case BaselineKind::Gicp:
        return {Matching::ForwardOnly, InformationModel::Gicp, Weighting::Unit};
    case BaselineKind::CoGicp:
        return {Matching::ForwardOnly, InformationModel::Gicp, Weighting::Correntropy};
    }
    throw std::logic_error("unknown baseline kind");
}

RegistrationResult register_baseline(BaselineKind kind, const PointCloud& source,
                                     const PointCloud& target, const RigidTransform& initial,
                                     const SolverConfig& cfg, Execution exec)
{
    return run_registration(source, target, initial, cfg, objective_model(kind), exec);
}

std::string_view Algorithm::name() const
{
    if (!baseline) {
        return "cobig";
    }
    switch (*baseline) {
    case BaselineKind::PointToPoint:
        return "p2pt";
    case BaselineKind::PointToPlane:
        return "p2pl";
    case BaselineKind::Gicp:
        return "gicp";
    case BaselineKind::CoGicp:
        return "cogicp";
    }
    return "?";
}

ObjectiveModel Algorithm::model() const
{
    return baseline ? objective_model(*baseline) : kCoBigIcpModel;
}

Algorithm parse_algorithm(std::string_view name)
{
    if (name == "cobig") {
        return Algorithm::cobig();
    }
    if (name == "cogicp") {
        return Algorithm::from(BaselineKind::CoGicp);
    }
    if (name == "gicp") {
        return Algorithm::from(BaselineKind::Gicp);
    }
    if (name == "p2pt") {
        return Algorithm::from(BaselineKind::PointToPoint);
    }
    if (name == "p2pl") {
        return Algorithm::from(BaselineKind::PointToPlane);
    }
    throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                                "' (expected cobig, cogicp, gicp, p2pt or p2pl)");
}

RegistrationResult register_with(const Algorithm& algo, const PointCloud& source,
                                 const PointCloud& target, const RigidTransform& initial,
                                 const SolverConfig& cfg, Execution exec)
{
    return run_registration(source, target, initial, cfg, algo.model(), exec);
}

} // namespace cobig
