#pragma once

#include <string>

#include "mfbs/quadrature.hpp"

namespace mfbs {

/// One factor of the separable moving-average integrand.
///
/// moving-average-difference: g(u) = (t-u)_+^{h-1/2} - (-u)_+^{h-1/2}, u in R,
/// with x_+^a := x^a for x > 0 and 0 otherwise. Support (-inf, t].
/// liouville: g(u) = (t-u)^{h-1/2} on [0, t], zero elsewhere.
struct KernelSpec {
    enum class Variant { MovingAverageDifference, Liouville };
    Variant variant = Variant::MovingAverageDifference;
    double t = 1.0;  // time coordinate, > 0
    double h = 0.5;  // Hurst exponent in (0,1)

    static KernelSpec moving_average(double t, double h) { return {Variant::MovingAverageDifference, t, h}; }
    static KernelSpec liouville(double t, double h) { return {Variant::Liouville, t, h}; }
};

/// Pointwise kernel value. At the singular points (u = t, and u = 0 for the
/// moving-average variant) with h < 1/2 the value is a signed-infinity
/// sentinel, matching the one-sided blow-up.
double kernel_eval(const KernelSpec& spec, double u);

struct Region1D {
    enum class Kind { FullLine, Interval };
    Kind kind = Kind::FullLine;
    double lo = 0.0;
    double hi = 0.0;

    static Region1D full_line() { return {Kind::FullLine, 0.0, 0.0}; }
    static Region1D interval(double lo, double hi);
};

/// integral of a(u) * b(u) over the region (clipped to the kernels' common
/// support). Endpoint singularities are removed by panel splits at {0, t_a,
/// t_b} plus a power substitution; the infinite moving-average tail is
/// truncated where the mean-value bound |g(u)| <= |h-1/2| t |u|^{h-3/2}
/// (u < 0) pushes the remainder below tol/10, and that bound is reported.
QuadratureResult cross_integral_1d(const KernelSpec& a, const KernelSpec& b, const Region1D& region,
                                   double tol);

/// Variance of the moving-average field factor at t = 1, i.e. the constant
/// c_h making the full-line cross integral equal c_h/2 (s^{2h} + t^{2h} -
/// |t-s|^{2h}). Estimated once per h by quadrature and cached.
double fbm_normalization(double h);

}  // namespace mfbs
