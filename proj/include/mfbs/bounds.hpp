#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mfbs {

/// Outcome of checking an integral upper bound with an unspecified uniform
/// constant: the constant is fitted per sweep value and must stay within a
/// bounded band for the bound shape to be confirmed.
struct InequalityReport {
    std::string name;
    int case_id = 0;               // case classification where the bound has branches
    std::vector<double> sweep;     // the swept parameter
    std::vector<double> lhs;       // integral values
    std::vector<double> fitted_c;  // lhs / bound-shape per sweep value
    double stability_ratio = 0.0;  // max/min of fitted_c
    double fitted_slope = 0.0;     // slope of log lhs vs log sweep where meaningful
    bool precondition_ok = true;
    bool pass = false;
    std::string detail;
};

/// integral over [eps,1]^2 of (a + |s-r|^{2h})^{-beta} ds dr, checked against
/// c * (a^{-(beta - 1/delta)} + 1) for delta > 2h, over the given a sweep.
InequalityReport check_near_diagonal_integral_bound(double h, double delta, double beta,
                                                    const std::vector<double>& a_values, double eps,
                                                    double tol);

/// The plain double integral (the reduction used internally is cross-checked
/// against this in the tests).
double near_diagonal_integral(double a, double h, double beta, double eps, double tol);

/// J(A,B) = integral_0^1 (A + t^alpha)^{-beta} (B + t)^{-eta} dt checked
/// against the case-dependent decay shape, sweeping A downward by decades at
/// fixed B. Cases: 1 when alpha*beta > 1, 2 when == 1, 3 when < 1 (the last
/// requires alpha*beta + eta != 1).
InequalityReport check_two_scale_integral_bound(double alpha, double beta, double eta, double A,
                                                double B, double tol);

double two_scale_integral(double A, double B, double alpha, double beta, double eta, double tol);

/// integral over a <= s_1 <= ... <= s_n <= a+r of prod_j (s_j - s_{j-1})^{-b_j}
/// with s_0 given in [0, a/2], checked against
/// c^n (n!)^{mean(b) - 1} r^{n - sum_{j>=2} b_j} over r, r/2, r/4.
InequalityReport check_ordered_gap_product_bound(double a, double r, const Eigen::VectorXd& b,
                                                 double s0, double tol);

double ordered_gap_product_integral(double a, double r, const Eigen::VectorXd& b, double s0);

}  // namespace mfbs
