#include "mfbs/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <vector>

#include "mfbs/errors.hpp"

namespace mfbs {

namespace {

void check_spec(const KernelSpec& s) {
    if (!(s.t > 0.0)) throw ArgumentError("KernelSpec: t must be positive");
    if (!(s.h > 0.0 && s.h < 1.0)) throw ArgumentError("KernelSpec: h must lie in (0,1)");
}

inline double pow_pos(double base, double expo) {
    // base > 0 assumed by callers
    return std::pow(base, expo);
}

}  // namespace

double kernel_eval(const KernelSpec& spec, double u) {
    check_spec(spec);
    const double e = spec.h - 0.5;
    if (spec.variant == KernelSpec::Variant::Liouville) {
        if (u < 0.0 || u > spec.t) return 0.0;
        const double x = spec.t - u;
        if (x == 0.0) return e < 0.0 ? std::numeric_limits<double>::infinity() : (e == 0.0 ? 1.0 : 0.0);
        return pow_pos(x, e);
    }
    if (u >= spec.t) {
        if (u == spec.t && e < 0.0) return std::numeric_limits<double>::infinity();
        return 0.0;
    }
    double first = pow_pos(spec.t - u, e);
    if (u > 0.0) return first;
    if (u == 0.0) {
        // One-sided blow-up of the second term as u -> 0^-.
        if (e < 0.0) return -std::numeric_limits<double>::infinity();
        return e == 0.0 ? first - 1.0 : first;
    }
    double second = pow_pos(-u, e);
    return first - second;
}

Region1D Region1D::interval(double lo, double hi) {
    if (!(lo < hi)) throw ArgumentError("Region1D: interval requires lo < hi");
    return {Kind::Interval, lo, hi};
}

namespace {

struct SupportBounds {
    double lo;  // -inf encoded as -infinity
    double hi;
};

SupportBounds support_of(const KernelSpec& s) {
    if (s.variant == KernelSpec::Variant::Liouville) return {0.0, s.t};
    return {-std::numeric_limits<double>::infinity(), s.t};
}

// Sum of the most negative power exponents active at the left side of `edge`:
// each kernel whose t equals the edge contributes h - 1/2, and each
// moving-average kernel contributes h - 1/2 at edge 0. Returns 0 when no
// negative exponent is active (no substitution needed).
double left_singular_exponent(const KernelSpec& a, const KernelSpec& b, double edge) {
    double mu = 0.0;
    auto contrib = [&](const KernelSpec& s) {
        const double e = s.h - 0.5;
        if (e >= 0.0) return;
        if (edge == s.t) mu += e;
        if (edge == 0.0 && s.variant == KernelSpec::Variant::MovingAverageDifference) mu += e;
    };
    contrib(a);
    contrib(b);
    return mu;
}

}  // namespace

QuadratureResult cross_integral_1d(const KernelSpec& a, const KernelSpec& b, const Region1D& region,
                                   double tol) {
    check_spec(a);
    check_spec(b);
    if (!(tol > 0.0)) throw ArgumentError("cross_integral_1d: tol must be positive");

    const SupportBounds sa = support_of(a);
    const SupportBounds sb = support_of(b);
    double lo = std::max(sa.lo, sb.lo);
    double hi = std::min(sa.hi, sb.hi);
    if (region.kind == Region1D::Kind::Interval) {
        lo = std::max(lo, region.lo);
        hi = std::min(hi, region.hi);
    }
    QuadratureResult res;
    if (!(lo < hi)) return res;

    auto f = [&](double u) { return kernel_eval(a, u) * kernel_eval(b, u); };

    // Truncate the infinite tail where the mean-value bound (factor-2 safety)
    // drops below tol/10.
    double tail_split = lo;  // start of the finite part
    if (std::isinf(lo)) {
        const double t_max = std::max(a.t, b.t);
        const double ca = std::abs(a.h - 0.5) * a.t;
        const double cb = std::abs(b.h - 0.5) * b.t;
        const double hs = a.h + b.h;
        double u_min;
        if (ca * cb == 0.0) {
            // One factor vanishes identically on u < 0 (h = 1/2 exactly).
            res.truncation_bound = 0.0;
            u_min = -t_max;
        } else {
            const double target = tol / 10.0;
            const double coeff = 2.0 * ca * cb / (2.0 - hs);
            // coeff * |U|^(hs-2) <= target
            u_min = -std::max(t_max, std::pow(coeff / target, 1.0 / (2.0 - hs)));
            res.truncation_bound = coeff * std::pow(-u_min, hs - 2.0);
        }
        if (u_min < -t_max) {
            QuadratureResult tail = integrate_log_tail(f, u_min, -t_max, tol / 4.0);
            res.value += tail.value;
            res.abs_error_estimate += tail.abs_error_estimate;
            res.n_evals += tail.n_evals;
        }
        tail_split = -t_max;
        if (tail_split > hi) tail_split = hi;  // degenerate, hi < -t_max cannot happen with supports
    } else if (lo < -std::max(a.t, b.t)) {
        // Finite but far-left region: same logarithmic compression, no truncation.
        const double t_max = std::max(a.t, b.t);
        QuadratureResult tail = integrate_log_tail(f, lo, -t_max, tol / 4.0);
        res.value += tail.value;
        res.abs_error_estimate += tail.abs_error_estimate;
        res.n_evals += tail.n_evals;
        tail_split = -t_max;
    }

    // Panel breakpoints at the kink/singularity locations inside (tail_split, hi].
    std::vector<double> brk;
    brk.push_back(tail_split);
    auto push = [&](double x) {
        if (x > tail_split && x < hi) brk.push_back(x);
    };
    push(0.0);
    push(a.t);
    push(b.t);
    brk.push_back(hi);
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

    const int n_panels = static_cast<int>(brk.size()) - 1;
    const double panel_tol = 0.5 * tol / std::max(1, n_panels);
    for (int i = 0; i < n_panels; ++i) {
        const double pa = brk[static_cast<size_t>(i)];
        const double pb = brk[static_cast<size_t>(i) + 1];
        const double mu = left_singular_exponent(a, b, pb);
        QuadratureResult part = mu < 0.0 ? integrate_right_singular(f, pa, pb, mu, panel_tol)
                                         : integrate_adaptive(f, pa, pb, panel_tol);
        res.value += part.value;
        res.abs_error_estimate += part.abs_error_estimate;
        res.n_evals += part.n_evals;
    }
    return res;
}

double fbm_normalization(double h) {
    if (!(h > 0.0 && h < 1.0)) throw ArgumentError("fbm_normalization: h must lie in (0,1)");
    static std::map<double, double> cache;
    static std::mutex mutex;
    {
        std::lock_guard<std::mutex> lk(mutex);
        auto it = cache.find(h);
        if (it != cache.end()) return it->second;
    }
    const KernelSpec k = KernelSpec::moving_average(1.0, h);
    const double value = cross_integral_1d(k, k, Region1D::full_line(), 1e-10).value;
    std::lock_guard<std::mutex> lk(mutex);
    cache.emplace(h, value);
    return value;
}

}  // namespace mfbs
