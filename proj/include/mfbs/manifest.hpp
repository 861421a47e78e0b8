#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "mfbs/hurst.hpp"
#include "mfbs/simulate.hpp"

namespace mfbs {

enum class ExperimentKind {
    ValidateHurst,
    Covariance,
    Simulate,
    Lnd,
    Increments,
    LocalTime,
    LevelSet,
    DimensionMap,
    VerifyLemmas,
};

std::string experiment_kind_name(ExperimentKind kind);
ExperimentKind experiment_kind_from_name(const std::string& name);

/// One experiment per manifest; the manifest plus the artifact version fully
/// determines a run. Experiments read their specific parameters from the
/// validated JSON tree.
struct Manifest {
    ExperimentKind kind = ExperimentKind::Simulate;
    nlohmann::json root;

    static Manifest load(const std::string& path);
    static Manifest parse(const nlohmann::json& j);

    HurstFunctional hurst() const;
    Eigen::VectorXd interval_lo() const;
    Eigen::VectorXd interval_hi() const;
    Eigen::VectorXi resolution() const;
    int d() const;
    std::uint64_t seed() const;
    std::string output_dir(const std::string& fallback) const;

    bool sampler_is_whitenoise() const;
    NoiseSpec noise_spec() const;  // zeros where unspecified; callers fill defaults
    long cholesky_cap() const;

    const nlohmann::json& params() const { return root; }
};

}  // namespace mfbs
