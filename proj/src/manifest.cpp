#include "mfbs/manifest.hpp"

#include <fstream>

#include "mfbs/errors.hpp"

namespace mfbs {

std::string experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::ValidateHurst: return "validate-hurst";
        case ExperimentKind::Covariance: return "covariance";
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::Lnd: return "lnd";
        case ExperimentKind::Increments: return "increments";
        case ExperimentKind::LocalTime: return "localtime";
        case ExperimentKind::LevelSet: return "levelset";
        case ExperimentKind::DimensionMap: return "dimension-map";
        case ExperimentKind::VerifyLemmas: return "verify-lemmas";
    }
    return "?";
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
    for (ExperimentKind k :
         {ExperimentKind::ValidateHurst, ExperimentKind::Covariance, ExperimentKind::Simulate,
          ExperimentKind::Lnd, ExperimentKind::Increments, ExperimentKind::LocalTime,
          ExperimentKind::LevelSet, ExperimentKind::DimensionMap, ExperimentKind::VerifyLemmas}) {
        if (experiment_kind_name(k) == name) return k;
    }
    throw FormatError("unknown experiment kind '" + name + "'");
}

namespace {

Eigen::VectorXd vec_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw FormatError("manifest: " + what + " must be a non-empty array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw FormatError("manifest: " + what + " must contain numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Eigen::VectorXi ivec_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw FormatError("manifest: " + what + " must be a non-empty array");
    Eigen::VectorXi v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer()) throw FormatError("manifest: " + what + " must contain integers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<int>();
    }
    return v;
}

const nlohmann::json& require(const nlohmann::json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) throw FormatError("manifest: missing required key '" + key + "'");
    return *it;
}

}  // namespace

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("manifest: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest: JSON parse error in " + path + ": " + e.what());
    }
    return parse(j);
}

Manifest Manifest::parse(const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("manifest: top level must be an object");
    Manifest m;
    m.root = j;
    m.kind = experiment_kind_from_name(require(j, "experiment").get<std::string>());
    // Validate the shared sections eagerly so failures happen before any work.
    m.hurst();
    if (j.contains("interval")) {
        const Eigen::VectorXd lo = m.interval_lo();
        const Eigen::VectorXd hi = m.interval_hi();
        if (lo.size() != hi.size()) throw FormatError("manifest: interval lo/hi length mismatch");
        for (Eigen::Index l = 0; l < lo.size(); ++l) {
            if (!(lo[l] > 0.0)) throw FormatError("manifest: interval must lie in (0,inf)^N");
            if (!(hi[l] >= lo[l])) throw FormatError("manifest: interval needs hi >= lo");
        }
    }
    if (j.contains("d") && m.d() < 1) throw FormatError("manifest: d must be >= 1");
    return m;
}

HurstFunctional Manifest::hurst() const {
    const nlohmann::json& h = require(root, "hurst");
    const std::string family = require(h, "family").get<std::string>();
    HurstFunctional out = [&]() {
        if (family == "constant") return HurstFunctional::constant(vec_from_json(require(h, "H"), "hurst.H"));
        if (family == "affine-clamped") {
            const Eigen::VectorXd intercept = vec_from_json(require(h, "intercept"), "hurst.intercept");
            const int n = static_cast<int>(intercept.size());
            const nlohmann::json& sj = require(h, "slope");
            Eigen::MatrixXd slope(n, n);
            if (!sj.is_array() || static_cast<int>(sj.size()) != n)
                throw FormatError("manifest: hurst.slope must be an N x N array of arrays");
            for (int r = 0; r < n; ++r) {
                const Eigen::VectorXd row = vec_from_json(sj[static_cast<size_t>(r)], "hurst.slope row");
                if (row.size() != n) throw FormatError("manifest: hurst.slope must be N x N");
                slope.row(r) = row;
            }
            const double clamp_lo = h.value("clamp_lo", 0.05);
            const double clamp_hi = h.value("clamp_hi", 0.95);
            return HurstFunctional::affine_clamped(intercept, slope, clamp_lo, clamp_hi);
        }
        if (family == "smooth-sigmoid") {
            return HurstFunctional::smooth_sigmoid(vec_from_json(require(h, "lo"), "hurst.lo"),
                                                   vec_from_json(require(h, "hi"), "hurst.hi"),
                                                   vec_from_json(require(h, "gain"), "hurst.gain"),
                                                   vec_from_json(require(h, "center"), "hurst.center"));
        }
        if (family == "user-supplied") {
            const nlohmann::json& ej = require(h, "expressions");
            if (!ej.is_array() || ej.empty())
                throw FormatError("manifest: hurst.expressions must be a non-empty array");
            std::vector<std::string> exprs;
            for (const auto& e : ej) exprs.push_back(e.get<std::string>());
            Eigen::VectorXd plo, phi;
            if (root.contains("interval")) {
                plo = interval_lo();
                phi = interval_hi();
            } else {
                plo = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(exprs.size()), 0.01);
                phi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(exprs.size()), 2.0);
            }
            return HurstFunctional::user_supplied(exprs, plo, phi);
        }
        throw FormatError("manifest: unknown hurst family '" + family + "'");
    }();
    if (h.contains("alpha") || h.contains("K") || h.contains("lipschitz")) {
        const double alpha = h.value("alpha", out.alpha());
        Eigen::VectorXd K = h.contains("K") ? vec_from_json(h["K"], "hurst.K") : out.upper_bounds();
        Eigen::VectorXd c = h.contains("lipschitz") ? vec_from_json(h["lipschitz"], "hurst.lipschitz")
                                                    : out.lipschitz();
        out.declare_envelope(alpha, K, c);
    }
    return out;
}

Eigen::VectorXd Manifest::interval_lo() const {
    return vec_from_json(require(require(root, "interval"), "lo"), "interval.lo");
}

Eigen::VectorXd Manifest::interval_hi() const {
    return vec_from_json(require(require(root, "interval"), "hi"), "interval.hi");
}

Eigen::VectorXi Manifest::resolution() const {
    return ivec_from_json(require(root, "resolution"), "resolution");
}

int Manifest::d() const { return root.value("d", 1); }

std::uint64_t Manifest::seed() const { return root.value("seed", std::uint64_t{1}); }

std::string Manifest::output_dir(const std::string& fallback) const {
    return root.value("output", fallback);
}

bool Manifest::sampler_is_whitenoise() const {
    if (!root.contains("sampler")) return false;
    const std::string kind = root["sampler"].value("kind", "cholesky");
    if (kind == "white-noise") return true;
    if (kind == "cholesky") return false;
    throw FormatError("manifest: sampler.kind must be 'cholesky' or 'white-noise'");
}

NoiseSpec Manifest::noise_spec() const {
    NoiseSpec spec;
    if (root.contains("sampler")) {
        spec.spacing = root["sampler"].value("noise_spacing", 0.0);
        spec.window = root["sampler"].value("window", 0.0);
    }
    return spec;
}

long Manifest::cholesky_cap() const {
    if (!root.contains("sampler")) return 4096;
    return root["sampler"].value("cap", 4096L);
}

}  // namespace mfbs
