#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mfbs/expression.hpp"

namespace mfbs {

/// Anisotropic distance sum_l |s_l - t_l|^{K_l} with exponents K in (0,1)^N.
/// Symmetric, zero iff s == t; satisfies a quasi-triangle inequality along
/// coordinate paths.
double anisotropic_distance(const Eigen::VectorXd& s, const Eigen::VectorXd& t,
                            const Eigen::VectorXd& exponents);

/// The map t -> (H_1(t), ..., H_N(t)) in (0,1)^N together with its declared
/// regularity envelope: a global lower bound alpha, per-axis upper bounds K,
/// and per-axis Lipschitz constants with respect to anisotropic_distance.
class HurstFunctional {
public:
    enum class Family { Constant, AffineClamped, SmoothSigmoid, UserSupplied };

    using Evaluator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

    static HurstFunctional constant(const Eigen::VectorXd& H);

    /// H_l(t) = clamp(intercept_l + sum_m slope(l,m) t_m, clamp_lo, clamp_hi).
    static HurstFunctional affine_clamped(const Eigen::VectorXd& intercept, const Eigen::MatrixXd& slope,
                                          double clamp_lo, double clamp_hi);

    /// H_l(t) = lo_l + (hi_l - lo_l) * sigmoid(gain_l * (t_l - center_l)).
    /// Each axis depends only on its own coordinate.
    static HurstFunctional smooth_sigmoid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                          const Eigen::VectorXd& gain, const Eigen::VectorXd& center);

    /// One expression per axis in variables t1..tN. The regularity envelope is
    /// probed numerically on probe_lo..probe_hi.
    static HurstFunctional user_supplied(const std::vector<std::string>& exprs,
                                         const Eigen::VectorXd& probe_lo, const Eigen::VectorXd& probe_hi);

    Eigen::VectorXd operator()(const Eigen::VectorXd& t) const;
    double component(int ell, const Eigen::VectorXd& t) const;

    int ndim() const { return n_; }
    Family family() const { return family_; }
    std::string family_name() const;

    /// True when H does not depend on t at all.
    bool constant_valued() const { return family_ == Family::Constant; }
    /// True when H_l depends only on t_l for every axis (enables the
    /// factorized white-noise sampler).
    bool separable() const { return separable_; }

    double alpha() const { return alpha_; }
    const Eigen::VectorXd& upper_bounds() const { return upper_; }
    const Eigen::VectorXd& lipschitz() const { return lipschitz_; }

    /// Overrides the declared regularity envelope.
    void declare_envelope(double alpha, const Eigen::VectorXd& upper, const Eigen::VectorXd& lipschitz);

private:
    HurstFunctional() = default;

    int n_ = 0;
    Family family_ = Family::Constant;
    Evaluator eval_;
    bool separable_ = false;
    double alpha_ = 0.0;
    Eigen::VectorXd upper_;      // per-axis upper bounds (the K vector)
    Eigen::VectorXd lipschitz_;  // per-axis Lipschitz constants w.r.t. anisotropic_distance
    Eigen::VectorXd const_value_;
};

/// Result of checking the declared envelope against samples on a grid.
struct EnvelopeCheck {
    Eigen::VectorXd h_min;           // observed per-axis minimum over the grid
    Eigen::VectorXd h_max;           // observed per-axis maximum
    std::vector<bool> bounds_ok;     // alpha <= H_l <= K_l per axis
    Eigen::VectorXd lipschitz_ratio; // max |dH_l| / distance over close pairs
    std::vector<bool> lipschitz_ok;
    bool lipschitz_vacuous = false;  // no pair closer than delta_a on the grid
    long n_pairs = 0;
    bool pass = false;
};

/// Samples H on the grid spanned by (lo, hi, resolution) and checks both
/// clauses of the declared envelope. Pairs further apart than delta_a are not
/// subject to the Lipschitz clause. Throws ModelError when any H_l(t) leaves
/// (0,1).
EnvelopeCheck validate_condition_a(const HurstFunctional& h, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi, const Eigen::VectorXi& resolution,
                                   double delta_a, double tol);

enum class Regime { Exists, Empty, Boundary };

std::string regime_name(Regime r);

/// Exponents controlling local times and level-set dimension at a fixed
/// Hurst vector H and codimension d.
///
/// With H sorted ascending, tau is the unique index with
///   sum_{l<tau} 1/H_l <= d < sum_{l<=tau} 1/H_l,
/// and beta = N - tau - H_tau d + sum_{l<=tau} H_tau/H_l. The same value is
/// recovered as min over k of (sum_{l<=k} H_k/H_l + N - k - H_k d); both are
/// reported and must agree to 1e-12 in the Exists regime.
struct ExponentReport {
    Regime regime = Regime::Exists;
    int tau = 0;                    // 1-based, in sorted order; 0 outside Exists
    double beta = 0.0;              // defined in the Exists regime
    double beta_min_formula = 0.0;  // min-over-k form, always computed
    Eigen::VectorXd per_k_values;   // the N candidate values of the min formula
    double nu = 0.0;                // d / sum_l 1/H_l
    Eigen::VectorXd p;              // N-term Holder split p_l = sum_i H_l/H_i (sorted order)
    Eigen::VectorXi permutation;    // sorted_H[i] = H[permutation[i]]
    Eigen::VectorXd sorted_h;
};

ExponentReport dominant_exponent(const Eigen::VectorXd& H, int d);

/// Feasible tau-term Holder split certificate: p_l >= 1 with sum 1/p_l = 1,
/// H_l d / p_l < 1 for every l <= tau, the damped balance inequality at the
/// requested delta, and an index ell0 whose slot leaves room 2 H_{ell0} rho
/// below 1 for the probed rho in (0, alpha_tau/(2 tau)).
struct SplitCertificate {
    int tau = 0;
    Eigen::VectorXd p;       // tau entries
    double alpha_tau = 0.0;  // sum_{l<=tau} 1/H_l - d
    double rho = 0.0;        // probed margin value
    int ell0 = -1;           // 1-based index satisfying the margin inequality
    bool feasible = false;
    double balance_lhs = 0.0;  // (1-delta) * sum H_l d / p_l
    double balance_rhs = 0.0;  // H_tau d + tau - sum H_tau/H_l
};

struct HolderSplit {
    Eigen::VectorXd p;  // N-term split, sorted order
    double nu = 0.0;
    SplitCertificate certificate;
};

/// Requires sum_l 1/H_l > d. delta in (0,1) damps the balance inequality.
HolderSplit holder_exponent_split(const Eigen::VectorXd& H_bar, int d, double delta);

}  // namespace mfbs
