#include "mfbs/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "mfbs/errors.hpp"
#include "mfbs/quadrature.hpp"
#include "mfbs/scaling.hpp"

namespace mfbs {

namespace {

// Integrates f over [0, L] with a boundary layer of width `layer` at 0:
// one panel across the layer, then geometric panels up to L.
double layered_integral(const std::function<double(double)>& f, double L, double layer, double tol) {
    std::vector<double> brk{0.0};
    double x = std::min(std::max(layer, 1e-300), L);
    while (x < L) {
        brk.push_back(x);
        x *= 8.0;
    }
    brk.push_back(L);
    const int n = static_cast<int>(brk.size()) - 1;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
        acc += integrate_adaptive(f, brk[static_cast<size_t>(i)], brk[static_cast<size_t>(i) + 1],
                                  tol / n).value;
    return acc;
}

void finish_stability(InequalityReport& rep, double factor) {
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    for (double c : rep.fitted_c) {
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
    }
    rep.stability_ratio = cmin > 0.0 ? cmax / cmin : std::numeric_limits<double>::infinity();
    rep.pass = std::isfinite(rep.stability_ratio) && rep.stability_ratio < factor;
}

}  // namespace

double near_diagonal_integral(double a, double h, double beta, double eps, double tol) {
    if (!(a > 0.0)) throw ArgumentError("near_diagonal_integral: a must be positive");
    const double L = 1.0 - eps;
    if (!(L > 0.0)) throw ArgumentError("near_diagonal_integral: eps must be below 1");
    // For a difference kernel F(|s-r|) on a square, the double integral
    // collapses to 2 * integral_0^L (L - x) F(x) dx.
    auto f = [&](double x) { return 2.0 * (L - x) * std::pow(a + std::pow(x, 2.0 * h), -beta); };
    const double layer = std::pow(a, 1.0 / (2.0 * h));
    return layered_integral(f, L, layer, tol);
}

InequalityReport check_near_diagonal_integral_bound(double h, double delta, double beta,
                                                    const std::vector<double>& a_values, double eps,
                                                    double tol) {
    if (!(h > 0.0 && h < 1.0)) throw ArgumentError("near-diagonal bound: h must lie in (0,1)");
    if (!(delta > 2.0 * h)) throw ArgumentError("near-diagonal bound: delta must exceed 2h");
    if (a_values.empty()) throw ArgumentError("near-diagonal bound: empty sweep");

    InequalityReport rep;
    rep.name = "near-diagonal-integral";
    for (double a : a_values) {
        const double lhs = near_diagonal_integral(a, h, beta, eps, tol);
        const double shape = std::pow(a, -(beta - 1.0 / delta)) + 1.0;
        rep.sweep.push_back(a);
        rep.lhs.push_back(lhs);
        rep.fitted_c.push_back(lhs / shape);
    }
    finish_stability(rep, 10.0);
    return rep;
}

double two_scale_integral(double A, double B, double alpha, double beta, double eta, double tol) {
    auto f = [&](double t) {
        return std::pow(A + std::pow(t, alpha), -beta) * std::pow(B + t, -eta);
    };
    const double layer = std::min(std::pow(A, 1.0 / alpha), B);
    return layered_integral(f, 1.0, layer, tol);
}

InequalityReport check_two_scale_integral_bound(double alpha, double beta, double eta, double A,
                                                double B, double tol) {
    if (!(alpha > 0.0 && beta >= 0.0 && eta >= 0.0 && A > 0.0 && B > 0.0))
        throw ArgumentError("two-scale bound: parameters must be positive");

    InequalityReport rep;
    rep.name = "two-scale-integral";
    const double ab = alpha * beta;
    if (std::abs(ab - 1.0) <= 1e-12)
        rep.case_id = 2;
    else if (ab > 1.0)
        rep.case_id = 1;
    else {
        rep.case_id = 3;
        if (std::abs(ab + eta - 1.0) <= 1e-12)
            throw ArgumentError("two-scale bound: degenerate case alpha*beta + eta == 1");
    }
    rep.precondition_ok = std::pow(A, 1.0 / alpha) <= B;
    if (!rep.precondition_ok) rep.detail = "initial sweep point violates A^(1/alpha) <= B";

    for (int k = 0; k < 4; ++k) {
        const double Ak = A * std::pow(10.0, -k);
        const double J = two_scale_integral(Ak, B, alpha, beta, eta, tol);
        double shape = 0.0;
        switch (rep.case_id) {
            case 1: shape = 1.0 / (std::pow(Ak, beta - 1.0 / alpha) * std::pow(B, eta)); break;
            case 2: shape = std::log(1.0 + B * std::pow(Ak, -1.0 / alpha)) / std::pow(B, eta); break;
            case 3: shape = std::pow(B, 1.0 - ab - eta) + 1.0; break;
        }
        rep.sweep.push_back(Ak);
        rep.lhs.push_back(J);
        rep.fitted_c.push_back(J / shape);
    }
    finish_stability(rep, 10.0);
    rep.pass = rep.pass && rep.precondition_ok;
    return rep;
}

namespace {

// Gauss-Legendre orders by nesting depth; the top level is adaptive.
constexpr int kDepthOrders[] = {24, 24, 16, 12, 10, 8};

double simplex_level(double a, double r, const Eigen::VectorXd& b, double prev, int j) {
    const int n = static_cast<int>(b.size());
    const double hi = a + r;
    const double lo = std::max(a, prev);
    if (!(lo < hi)) return 0.0;
    const double bj = b[j];
    auto inner = [&](double s) {
        return j + 1 < n ? simplex_level(a, r, b, s, j + 1) : 1.0;
    };
    const int order = kDepthOrders[std::min(j, 5)];
    if (j == 0) {
        // First gap is bounded below by a - s0 >= a/2: no singularity.
        auto f = [&](double s) { return std::pow(s - prev, -bj) * inner(s); };
        return gauss_legendre(f, lo, hi, order);
    }
    // Remove the gap singularity at s = prev exactly: w = (s - prev)^(1 - b_j).
    const double p = 1.0 - bj;
    const double wmax = std::pow(hi - lo, p);
    auto g = [&](double w) { return inner(prev + std::pow(w, 1.0 / p)) / p; };
    return gauss_legendre(g, 0.0, wmax, order);
}

}  // namespace

double ordered_gap_product_integral(double a, double r, const Eigen::VectorXd& b, double s0) {
    const int n = static_cast<int>(b.size());
    if (n < 1 || n > 6) throw ArgumentError("ordered-gap integral: need 1 <= n <= 6 factors");
    if (!(a > 0.0 && r > 0.0)) throw ArgumentError("ordered-gap integral: a, r must be positive");
    if (!(s0 >= 0.0 && s0 <= 0.5 * a)) throw ArgumentError("ordered-gap integral: s0 must lie in [0, a/2]");
    for (int j = 0; j < n; ++j)
        if (!(b[j] > 0.0 && b[j] < 1.0)) throw ArgumentError("ordered-gap integral: exponents must lie in (0,1)");
    return simplex_level(a, r, b, s0, 0);
}

InequalityReport check_ordered_gap_product_bound(double a, double r, const Eigen::VectorXd& b, double s0,
                                                 double tol) {
    (void)tol;
    const int n = static_cast<int>(b.size());
    InequalityReport rep;
    rep.name = "ordered-gap-product";
    double tail_sum = 0.0;
    for (int j = 1; j < n; ++j) tail_sum += b[j];
    const double expo = n - tail_sum;
    double lfact = 0.0;
    for (int j = 2; j <= n; ++j) lfact += std::log(static_cast<double>(j));
    const double fact_pow = std::exp(lfact * (b.sum() / n - 1.0));

    for (int k = 0; k < 3; ++k) {
        const double rk = r / std::pow(2.0, k);
        const double lhs = ordered_gap_product_integral(a, rk, b, s0);
        rep.sweep.push_back(rk);
        rep.lhs.push_back(lhs);
        rep.fitted_c.push_back(std::pow(lhs / (fact_pow * std::pow(rk, expo)), 1.0 / n));
    }
    finish_stability(rep, 10.0);

    Eigen::VectorXd xs(3), ys(3);
    for (int k = 0; k < 3; ++k) {
        xs[k] = rep.sweep[static_cast<size_t>(k)];
        ys[k] = rep.lhs[static_cast<size_t>(k)];
    }
    rep.fitted_slope = fit_loglog(xs, ys, expo).slope;
    return rep;
}

}  // namespace mfbs
