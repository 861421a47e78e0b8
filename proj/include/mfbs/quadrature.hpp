#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

namespace mfbs {

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    double truncation_bound = 0.0;
    std::int64_t n_evals = 0;
};

struct QuadratureOptions {
    int max_panels = 4000;
};

/// Adaptive Gauss7/Kronrod15 on a finite interval. Throws QuadratureError when
/// the panel budget is exhausted before the error estimate drops below tol.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double tol, const QuadratureOptions& opts = {});

/// Integrates f over [a,b] where f ~ (b-u)^mu * smooth near the right edge,
/// mu in (-1, 0). The substitution w = (b-u)^(mu+1) removes the singularity
/// before adaptive integration.
QuadratureResult integrate_right_singular(const std::function<double(double)>& f, double a, double b,
                                          double mu, double tol, const QuadratureOptions& opts = {});

/// Integrates f over [lo, hi] with hi < 0 and |lo| potentially astronomically
/// large, via u = -hi * e^s. Intended for power-law tails.
QuadratureResult integrate_log_tail(const std::function<double(double)>& f, double lo, double hi,
                                    double tol, const QuadratureOptions& opts = {});

/// Fixed-order Gauss-Legendre on [a,b]; order in {8,10,12,16,24,32}.
double gauss_legendre(const std::function<double(double)>& f, double a, double b, int order);

}  // namespace mfbs
