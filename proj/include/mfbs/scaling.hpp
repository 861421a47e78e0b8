#pragma once

#include <Eigen/Dense>

namespace mfbs {

/// Log-log least-squares fit of a scaling law observed ~ scale^slope.
struct ScalingFit {
    Eigen::VectorXd scales;    // radii or side lengths
    Eigen::VectorXd observed;  // statistic per scale
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double ci_halfwidth = 0.0;  // 95% CI on the slope
    double theoretical_exponent = 0.0;
};

/// Fits log(observed) against log(scales); entries with observed <= 0 are
/// dropped. Throws ArgumentError when fewer than two usable points remain.
ScalingFit fit_loglog(const Eigen::VectorXd& scales, const Eigen::VectorXd& observed,
                      double theoretical_exponent);

/// Spearman rank correlation of two equally sized samples.
double spearman_rank_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

double median(Eigen::VectorXd values);

}  // namespace mfbs
