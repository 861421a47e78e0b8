#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

#include "mfbs/hurst.hpp"
#include "mfbs/kernel.hpp"

namespace mfbs {

/// Which Gaussian field a Gram matrix belongs to. B is the full
/// moving-average field; X0 its one-sided (Liouville) part; XEps, YEll and
/// ZEps the independent pieces obtained by splitting the integration
/// rectangle [0,t] at the origin box [0,eps]^N.
enum class ProcessTag { B, X0, XEps, YEll, ZEps };

struct CovarianceMatrix {
    Eigen::MatrixXd points;   // n x N, one row per grid point
    Eigen::MatrixXd entries;  // symmetric n x n
    double jitter_applied = 0.0;
    ProcessTag tag = ProcessTag::B;
    int ell = -1;       // axis for YEll
    double eps = 0.0;   // decomposition origin for the pieces

    Eigen::Index size() const { return entries.rows(); }
};

/// One full-field covariance entry Cov(B(s), B(t)) as a product of per-axis
/// cross integrals (closed form when h is constant).
double covariance_entry(const HurstFunctional& h, const Eigen::VectorXd& s, const Eigen::VectorXd& t,
                        double tol);

/// Gram matrix of the moving-average field on the given points. Constant h
/// dispatches to the calibrated closed form; otherwise every entry is a
/// product of N full-line cross integrals. Entry assembly is parallel.
CovarianceMatrix covariance_b(const HurstFunctional& h, const Eigen::MatrixXd& points, double tol);

/// Quadrature path regardless of h (the oracle for the closed form).
CovarianceMatrix covariance_b_quadrature(const HurstFunctional& h, const Eigen::MatrixXd& points,
                                         double tol);

/// Gram matrix of one decomposition piece. Per-axis regions:
///   X0   -> [0, min(s_l, t_l)]
///   XEps -> [0, eps]
///   YEll -> (eps, min(s_l, t_l)] on the chosen axis, [0, eps] elsewhere
///   ZEps -> direct sum over the remaining region patterns (at least two axes
///           beyond eps), so the decomposition identity is a real check
///           rather than an algebraic tautology.
CovarianceMatrix covariance_piece(const HurstFunctional& h, ProcessTag tag, double eps,
                                  const Eigen::MatrixXd& points, double tol, int ell = -1);

/// Applies the jitter ladder (1e-12 up to 1e-6 times trace/n) until a
/// Cholesky factorization succeeds; records the jitter and returns the lower
/// factor. Throws ConditioningError beyond the ladder.
Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& entries, double* jitter_applied);

/// Schur-complement conditional variance Var(target | given). Clips tiny
/// negative round-off to zero; empty conditioning set returns the diagonal.
double conditional_variance(const CovarianceMatrix& C, int target, const std::vector<int>& given);

enum class LndMode {
    AlongAxis,  // conditioning along one ordered coordinate, piece YEll
    Dominated,  // all conditioning points componentwise below the target, field B
};

struct LndCertificate {
    LndMode mode = LndMode::AlongAxis;
    int ell = -1;
    Eigen::MatrixXd ordered_points;
    double cond_variance = 0.0;
    double lower_bound_ref = 0.0;  // the gap expression the variance is compared to
    double ratio = 0.0;            // cond_variance / lower_bound_ref
    double fitted_c = 0.0;         // same as ratio; aggregated externally
};

/// Conditional-variance lower-bound certificate for the last point given the
/// others. AlongAxis expects the points sorted ascending in coordinate ell
/// and compares against |t^n_l - t^{n-1}_l|^{2 H_l(t^n)}; Dominated expects
/// componentwise domination and compares against
/// sum_j min_k (t^n_j - t^k_j)^{2 H_j(t^n)} with t^0 = 0.
LndCertificate lnd_certificate(const HurstFunctional& h, const Eigen::MatrixXd& points, int ell,
                               double eps, LndMode mode, double tol);

/// Smallest Rayleigh quotient Var(sum u_j dY_j) / sum u_j^2 Var(dY_j) over
/// random coefficient vectors, where dY_j are consecutive increments of the
/// process with Gram matrix C (first increment from zero). Positive values
/// certify the quadratic-form lower bound for ordered increments.
double increment_form_min_ratio(const CovarianceMatrix& C, int n_random, std::uint64_t seed);

struct IncrementBandReport {
    double ratio_min = 0.0;  // empirical lower constant for the two-sided increment bound
    double ratio_max = 0.0;
    long n_pairs = 0;
    double delta = 0.0;
    // Cross-Hurst smoothness: E[(Z^b(t) - Z^b'(t))^2] / |b - b'|^2 over
    // constant-Hurst pairs sharing the driving noise.
    double hurst_ratio_min = 0.0;
    double hurst_ratio_max = 0.0;
    long n_hurst_pairs = 0;
};

/// Samples pairs (s,t) with |s-t| < delta inside [lo,hi] and reports extremes
/// of E[(B(t)-B(s))^2] / sum_l |t_l-s_l|^{2 H_l(u)} at the componentwise
/// midpoint u, plus the cross-Hurst ratio extremes.
IncrementBandReport increment_bounds_report(const HurstFunctional& h, const Eigen::VectorXd& lo,
                                            const Eigen::VectorXd& hi, int n_pairs, double delta,
                                            std::uint64_t seed, double tol);

struct CorrelationReport {
    Eigen::MatrixXd lags;            // M x N lattice points
    Eigen::VectorXd r;               // increment correlation per lag
    Eigen::MatrixXd frequencies;     // M x N matching DFT lattice
    Eigen::VectorXcd spectral_density;
    Eigen::VectorXd spacing;         // per-axis lag spacing (aliasing audit)
    Eigen::VectorXi counts;
};

/// Correlation of directional increments r_{t,eta}(s) on a rectangular lag
/// lattice, and its discrete Fourier transform (rectangular-rule
/// approximation of the direction-varying spectral density).
CorrelationReport increment_correlation(const HurstFunctional& h, const Eigen::VectorXd& t,
                                        const Eigen::VectorXd& eta, const Eigen::VectorXi& lag_counts,
                                        const Eigen::VectorXd& lag_spacing, double tol);

}  // namespace mfbs
