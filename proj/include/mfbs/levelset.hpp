#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mfbs/hurst.hpp"
#include "mfbs/scaling.hpp"
#include "mfbs/simulate.hpp"

namespace mfbs {

struct ExtractionRule {
    enum class Kind { SignChange, Threshold };
    Kind kind = Kind::SignChange;
    double c_thr = 1.0;

    static ExtractionRule sign_change() { return {Kind::SignChange, 0.0}; }
    static ExtractionRule threshold(double c_thr) { return {Kind::Threshold, c_thr}; }
};

/// Grid cells touching the level set {B = x}. Cells are identified by packed
/// per-axis indices (at most 4 axes, 16 bits each).
struct LevelSetCells {
    Eigen::VectorXd level;
    Eigen::VectorXi cell_counts;  // cells per axis = points per axis - 1
    std::vector<std::uint64_t> cells;
    ExtractionRule rule;
    int n_axes = 0;

    static std::uint64_t pack(const Eigen::VectorXi& idx);
    static LevelSetCells synthetic(const Eigen::VectorXi& cell_counts,
                                   const std::vector<Eigen::VectorXi>& indices);
};

/// sign-change (d = 1 only): a cell is kept when B - x changes sign over its
/// 2^N corners (or a corner hits x exactly). threshold (any d): a cell is
/// kept when |B(t_min_corner) - x| <= c_thr * diam(cell)^{min_l H_l(t)},
/// the field's local oscillation scale; the Hurst functional supplies the
/// exponent and is required for that rule.
LevelSetCells extract_level_set(const FieldSample& field, const Eigen::VectorXd& x,
                                const ExtractionRule& rule, const HurstFunctional* h = nullptr);

struct DimensionReport {
    Eigen::VectorXd scale_factors;  // box sizes in units of one grid cell
    Eigen::VectorXd counts;         // occupied boxes per scale
    double slope = 0.0;
    double ci_halfwidth = 0.0;
    double r2 = 0.0;
    double theoretical = 0.0;
    Regime regime = Regime::Exists;
    bool slope_defined = false;
};

/// Box counts by dyadic coarsening of the cell set; slope of log(count)
/// against log(1/size). Requires >= 4 scales spanning >= 2 octaves; scale 1
/// (the grid cell itself) is the finest.
DimensionReport box_counting(const LevelSetCells& cells, const std::vector<int>& scale_factors);

struct DimensionExperimentConfig {
    int d = 1;
    int ensemble = 30;
    std::uint64_t seed = 1;
    Eigen::VectorXi resolution;
    bool use_whitenoise = true;
    NoiseSpec noise;
    double cov_tol = 1e-8;
    std::vector<int> scale_factors = {1, 2, 4, 8, 16};
    ExtractionRule rule = ExtractionRule::sign_change();
    int t_star_resolution = 33;
};

struct DimensionExperimentResult {
    DimensionReport report;          // ensemble-median counts and slope
    Eigen::VectorXd per_path_slopes; // NaN where a path's set was empty
    Eigen::VectorXd t_star;
    ExponentReport exponents;        // at H(t_star)
    // Empty-regime diagnostics (threshold halving sweep); unused otherwise.
    std::vector<double> thresholds;
    std::vector<double> nonempty_fraction;
};

/// Simulates an ensemble on [lo,hi], extracts the level set of each path at
/// level x, box-counts, and reports the ensemble-median slope against the
/// theoretical value at the in-sample maximizer t* of sum_l 1/H_l. In the
/// empty regime it instead sweeps the extraction threshold downward and
/// reports the fraction of non-empty extractions.
DimensionExperimentResult dimension_experiment(const HurstFunctional& h, const Eigen::VectorXd& lo,
                                               const Eigen::VectorXd& hi, const Eigen::VectorXd& x,
                                               const DimensionExperimentConfig& cfg);

struct DimensionMap {
    Eigen::MatrixXd window_centers;  // one row per window
    Eigen::VectorXd theoretical;     // beta at H(center)
    Eigen::VectorXd empirical;       // ensemble-median box-count slope per window
    double spearman = 0.0;
};

struct DimensionMapConfig {
    int d = 1;
    int ensemble = 24;
    std::uint64_t seed = 1;
    Eigen::VectorXi resolution;
    NoiseSpec noise;
    int n_windows = 6;
    double window_extent = 0.0;  // coordinate side length; 0 = auto
    std::vector<int> scale_factors = {1, 2, 4, 8};
    int vary_axis = 0;           // windows are spread along this axis
};

/// Local dimension map: windows spread along one axis, theoretical beta from
/// H at the window center, empirical slope from level sets at the per-path
/// random level x = B(t_center); reports the Spearman rank agreement.
DimensionMap local_dimension_map(const HurstFunctional& h, const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi, const DimensionMapConfig& cfg);

}  // namespace mfbs
