#include "mfbs/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mfbs/errors.hpp"

namespace mfbs {

namespace {

// Two-sided 97.5% Student-t quantiles for small residual degrees of freedom.
double t_quantile(int df) {
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                                   2.365,  2.306, 2.262, 2.228, 2.201, 2.179};
    if (df < 1) return 12.706;
    if (df <= 12) return table[df - 1];
    if (df <= 20) return 2.1;
    if (df <= 60) return 2.01;
    return 1.96;
}

}  // namespace

ScalingFit fit_loglog(const Eigen::VectorXd& scales, const Eigen::VectorXd& observed,
                      double theoretical_exponent) {
    if (scales.size() != observed.size()) throw ArgumentError("fit_loglog: size mismatch");
    std::vector<double> xs, ys;
    for (Eigen::Index i = 0; i < scales.size(); ++i) {
        if (scales[i] > 0.0 && observed[i] > 0.0) {
            xs.push_back(std::log(scales[i]));
            ys.push_back(std::log(observed[i]));
        }
    }
    const int n = static_cast<int>(xs.size());
    if (n < 2) throw ArgumentError("fit_loglog: need at least two positive observations for a fit");

    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[static_cast<size_t>(i)] - mx) * (xs[static_cast<size_t>(i)] - mx);
        sxy += (xs[static_cast<size_t>(i)] - mx) * (ys[static_cast<size_t>(i)] - my);
        syy += (ys[static_cast<size_t>(i)] - my) * (ys[static_cast<size_t>(i)] - my);
    }
    if (sxx == 0.0) throw ArgumentError("fit_loglog: degenerate abscissae");

    ScalingFit fit;
    fit.scales = scales;
    fit.observed = observed;
    fit.theoretical_exponent = theoretical_exponent;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ssr = std::max(0.0, syy - fit.slope * sxy);
    fit.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
    if (n > 2) {
        const double se = std::sqrt(ssr / (n - 2) / sxx);
        fit.ci_halfwidth = t_quantile(n - 2) * se;
    } else {
        fit.ci_halfwidth = 0.0;
    }
    return fit;
}

namespace {

Eigen::VectorXd ranks(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
    Eigen::VectorXd r(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index j = i;
        while (j + 1 < n && v[order[static_cast<size_t>(j + 1)]] == v[order[static_cast<size_t>(i)]]) ++j;
        const double avg = 0.5 * (i + j) + 1.0;  // average rank for ties
        for (Eigen::Index k = i; k <= j; ++k) r[order[static_cast<size_t>(k)]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman_rank_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size() || a.size() < 2) throw ArgumentError("spearman: need two samples of equal size >= 2");
    const Eigen::VectorXd ra = ranks(a), rb = ranks(b);
    const double ma = ra.mean(), mb = rb.mean();
    const Eigen::VectorXd da = ra.array() - ma, db = rb.array() - mb;
    const double denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
    if (denom == 0.0) return 0.0;
    return da.dot(db) / denom;
}

double median(Eigen::VectorXd values) {
    if (values.size() == 0) throw ArgumentError("median: empty sample");
    std::sort(values.data(), values.data() + values.size());
    const Eigen::Index n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace mfbs
