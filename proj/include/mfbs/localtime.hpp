#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mfbs/hurst.hpp"
#include "mfbs/scaling.hpp"
#include "mfbs/simulate.hpp"

namespace mfbs {

/// A time region inside a field's grid: an axis-aligned box or a Euclidean
/// ball (both select grid points; the region's measure is the selected count
/// times the grid cell volume).
struct TimeSet {
    enum class Kind { Box, Ball };
    Kind kind = Kind::Box;
    Eigen::VectorXd lo, hi;  // box bounds
    Eigen::VectorXd center;  // ball
    double radius = 0.0;

    static TimeSet box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
    static TimeSet ball(const Eigen::VectorXd& center, double radius);
};

std::vector<long> time_set_indices(const Grid& grid, const TimeSet& ts);

/// Regular spatial bins in R^d (bin centers on a rectangular lattice).
struct SpatialBins {
    Eigen::VectorXd lo, hi;
    Eigen::VectorXi counts;

    static SpatialBins regular(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                               const Eigen::VectorXi& counts);
    /// Bins covering the sampled field range widened by pad/sqrt(k).
    static SpatialBins covering(const FieldSample& field, double k, int per_axis, double pad = 10.0);

    int ndim() const { return static_cast<int>(counts.size()); }
    long n_bins() const;
    double bin_volume() const;
    Eigen::VectorXd center(long flat) const;
};

/// Gaussian-mollified occupation density: per bin center x,
///   L_k(x) = sum_{t in set} (k/2pi)^{d/2} exp(-k |B(t)-x|^2 / 2) dt,
/// with dt the grid cell volume. The kernel is probability-normalized, so
/// integrating over x recovers the time measure.
struct LocalTimeEstimate {
    SpatialBins bins;
    double k = 0.0;
    Eigen::VectorXd values;        // one per bin, flattened row-major
    double time_cell_volume = 0.0;
    double time_measure = 0.0;     // selected count * cell volume
    long n_time_points = 0;
};

LocalTimeEstimate mollified_local_time(const FieldSample& field, const TimeSet& ts,
                                       const SpatialBins& bins, double k);

/// The same kernel sum evaluated at a single spatial point.
double local_time_at(const FieldSample& field, const std::vector<long>& time_indices,
                     const Eigen::VectorXd& x, double k, int component_offset = 0);

enum class ExistenceVerdict { ExistsL2, None, Boundary };

struct ExistenceReport {
    ExistenceVerdict verdict = ExistenceVerdict::Boundary;
    Eigen::VectorXd h_bar;    // per-axis maxima of H over the refinement grid
    double min_inv_sum = 0.0; // extremes of sum_l 1/H_l(t) over the grid
    double max_inv_sum = 0.0;
};

/// L2 local-time existence verdict on [lo,hi]: ExistsL2 when
/// sum_l 1/H_l(t) > d everywhere on the refinement grid, None when the sum
/// drops below d somewhere, Boundary otherwise (no claim is made there).
ExistenceReport existence_predicate(const HurstFunctional& h, const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi, int d, const Eigen::VectorXi& resolution);

struct TestFunction {
    enum class Kind { One, BoxIndicator, GaussianBump };
    Kind kind = Kind::One;
    Eigen::VectorXd lo, hi;  // box
    Eigen::VectorXd center;  // bump
    double width = 1.0;

    static TestFunction one(int d);
    static TestFunction box_indicator(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
    static TestFunction gaussian_bump(const Eigen::VectorXd& center, double width);

    double operator()(const Eigen::VectorXd& x) const;
};

/// Relative mismatch between integral f(B(t)) dt computed directly along the
/// path and its reconstruction through the mollified density on the bins.
double occupation_identity_residual(const FieldSample& field, const TestFunction& f, const TimeSet& ts,
                                    const SpatialBins& bins, double k);

/// Rule fixing the mollification parameter per path.
struct KernelWidthRule {
    enum class Kind { MedianIncrement, Fixed };
    Kind kind = Kind::MedianIncrement;
    double fixed_k = 0.0;
    double multiplier = 2.0;  // k^{-1/2} = multiplier * median |dB| over adjacent cells

    double resolve(const FieldSample& field) const;
};

enum class LevelMode { FixedLevel, PathLevel };  // x given, or x = B(t_center) per path

/// Median-over-ensemble scaling of the local-time mass of shrinking balls
/// U(t, r), fitted against r. theoretical_exponent comes from
/// dominant_exponent at H(t); the theory gives an upper bound on the mass,
/// i.e. a lower bound on the fitted exponent.
ScalingFit ball_scaling_fit(const std::vector<FieldSample>& ensemble, const HurstFunctional& h,
                            const Eigen::VectorXd& t, LevelMode mode, const Eigen::VectorXd& fixed_x,
                            const Eigen::VectorXd& radii, const KernelWidthRule& rule);

/// Monte Carlo scaling of E[L_k(x, T)^n] over shrinking cubes T centered in
/// the grid, for even n; the theoretical exponent is n * beta.
ScalingFit moment_scaling_fit(const std::vector<FieldSample>& ensemble, const HurstFunctional& h,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& side_lengths, int n,
                              const KernelWidthRule& rule);

}  // namespace mfbs
