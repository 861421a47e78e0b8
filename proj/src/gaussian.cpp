#include "mfbs/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include "mfbs/errors.hpp"
#include "mfbs/parallel.hpp"
#include "mfbs/rng.hpp"

namespace mfbs {

namespace {

double closed_form_axis(double s, double t, double h) {
    const double c = fbm_normalization(h);
    return 0.5 * c *
           (std::pow(std::abs(s), 2.0 * h) + std::pow(std::abs(t), 2.0 * h) -
            std::pow(std::abs(t - s), 2.0 * h));
}

void check_points(const Eigen::MatrixXd& points, int n_dims) {
    if (points.cols() != n_dims) throw ArgumentError("covariance: points have wrong dimension");
    if (points.rows() < 1) throw ArgumentError("covariance: empty point list");
    if ((points.array() <= 0.0).any()) throw ArgumentError("covariance: points must lie in (0,inf)^N");
}

double quadrature_entry(const HurstFunctional& h, const Eigen::VectorXd& s, const Eigen::VectorXd& t,
                        double tol) {
    const int n = h.ndim();
    const Eigen::VectorXd hs = h(s);
    const Eigen::VectorXd ht = h(t);
    const double axis_tol = tol / n;
    double prod = 1.0;
    for (int l = 0; l < n; ++l) {
        QuadratureResult q;
        try {
            q = cross_integral_1d(KernelSpec::moving_average(s[l], hs[l]),
                                  KernelSpec::moving_average(t[l], ht[l]), Region1D::full_line(),
                                  axis_tol);
        } catch (const QuadratureError& e) {
            throw QuadratureError("covariance entry failed on axis " + std::to_string(l + 1) + ": " +
                                      e.what(),
                                  e.worst_panel_lo, e.worst_panel_hi, e.worst_panel_error);
        }
        prod *= q.value;
    }
    return prod;
}

}  // namespace

double covariance_entry(const HurstFunctional& h, const Eigen::VectorXd& s, const Eigen::VectorXd& t,
                        double tol) {
    if (h.constant_valued()) {
        const Eigen::VectorXd hv = h(s);
        double prod = 1.0;
        for (int l = 0; l < h.ndim(); ++l) prod *= closed_form_axis(s[l], t[l], hv[l]);
        return prod;
    }
    return quadrature_entry(h, s, t, tol);
}

namespace {

CovarianceMatrix assemble_symmetric(const HurstFunctional& h, const Eigen::MatrixXd& points, double tol,
                                    bool force_quadrature) {
    const Eigen::Index n = points.rows();
    CovarianceMatrix C;
    C.points = points;
    C.entries.resize(n, n);
    C.tag = ProcessTag::B;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> jobs;
    jobs.reserve(static_cast<size_t>(n * (n + 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) jobs.emplace_back(i, j);
    parallel_for(static_cast<std::int64_t>(jobs.size()), [&](std::int64_t k) {
        auto [i, j] = jobs[static_cast<size_t>(k)];
        const double v = force_quadrature
                             ? quadrature_entry(h, points.row(i), points.row(j), tol)
                             : covariance_entry(h, points.row(i), points.row(j), tol);
        C.entries(i, j) = v;
        C.entries(j, i) = v;
    });
    return C;
}

}  // namespace

CovarianceMatrix covariance_b(const HurstFunctional& h, const Eigen::MatrixXd& points, double tol) {
    check_points(points, h.ndim());
    return assemble_symmetric(h, points, tol, false);
}

CovarianceMatrix covariance_b_quadrature(const HurstFunctional& h, const Eigen::MatrixXd& points,
                                         double tol) {
    check_points(points, h.ndim());
    return assemble_symmetric(h, points, tol, true);
}

namespace {

// Per-axis building blocks for the decomposition pieces, with Liouville
// kernels (the integration rectangle lies inside [0, t]).
struct AxisIntegrals {
    double origin_box = 0.0;  // [0, eps]
    double beyond = 0.0;      // (eps, min(s_l, t_l)]
    double full = 0.0;        // [0, min(s_l, t_l)] in one piece
};

AxisIntegrals axis_integrals(double s, double t, double hs, double ht, double eps, double tol,
                             bool need_full) {
    const KernelSpec ka = KernelSpec::liouville(s, hs);
    const KernelSpec kb = KernelSpec::liouville(t, ht);
    const double m = std::min(s, t);
    AxisIntegrals out;
    out.origin_box = cross_integral_1d(ka, kb, Region1D::interval(0.0, eps), tol).value;
    if (m > eps) out.beyond = cross_integral_1d(ka, kb, Region1D::interval(eps, m), tol).value;
    if (need_full) out.full = cross_integral_1d(ka, kb, Region1D::interval(0.0, m), tol).value;
    return out;
}

}  // namespace

CovarianceMatrix covariance_piece(const HurstFunctional& h, ProcessTag tag, double eps,
                                  const Eigen::MatrixXd& points, double tol, int ell) {
    const int n_dims = h.ndim();
    check_points(points, n_dims);
    if (tag == ProcessTag::B) throw ArgumentError("covariance_piece: use covariance_b for the full field");
    if (tag == ProcessTag::YEll && (ell < 0 || ell >= n_dims))
        throw ArgumentError("covariance_piece: YEll needs a valid axis");
    if (!(eps > 0.0)) throw ArgumentError("covariance_piece: eps must be positive");
    const double min_coord = points.minCoeff();
    if (!(eps < 0.5 * min_coord))
        throw ArgumentError("covariance_piece: eps must be below half the smallest coordinate");

    const Eigen::Index n = points.rows();
    CovarianceMatrix C;
    C.points = points;
    C.entries.resize(n, n);
    C.tag = tag;
    C.ell = tag == ProcessTag::YEll ? ell : -1;
    C.eps = eps;

    const bool need_full = tag == ProcessTag::X0;
    const double axis_tol = tol / n_dims;

    std::vector<std::pair<Eigen::Index, Eigen::Index>> jobs;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) jobs.emplace_back(i, j);
    parallel_for(static_cast<std::int64_t>(jobs.size()), [&](std::int64_t k) {
        auto [i, j] = jobs[static_cast<size_t>(k)];
        const Eigen::VectorXd s = points.row(i);
        const Eigen::VectorXd t = points.row(j);
        const Eigen::VectorXd hvs = h(s);
        const Eigen::VectorXd hvt = h(t);
        std::vector<AxisIntegrals> ax(static_cast<size_t>(n_dims));
        for (int l = 0; l < n_dims; ++l)
            ax[static_cast<size_t>(l)] = axis_integrals(s[l], t[l], hvs[l], hvt[l], eps, axis_tol, need_full);

        double v = 0.0;
        switch (tag) {
            case ProcessTag::X0: {
                v = 1.0;
                for (int l = 0; l < n_dims; ++l) v *= ax[static_cast<size_t>(l)].full;
                break;
            }
            case ProcessTag::XEps: {
                v = 1.0;
                for (int l = 0; l < n_dims; ++l) v *= ax[static_cast<size_t>(l)].origin_box;
                break;
            }
            case ProcessTag::YEll: {
                v = 1.0;
                for (int l = 0; l < n_dims; ++l)
                    v *= (l == ell) ? ax[static_cast<size_t>(l)].beyond : ax[static_cast<size_t>(l)].origin_box;
                break;
            }
            case ProcessTag::ZEps: {
                // Union of the region patterns with two or more axes past eps.
                const unsigned patterns = 1u << n_dims;
                for (unsigned sigma = 0; sigma < patterns; ++sigma) {
                    const int ones = __builtin_popcount(sigma);
                    if (ones < 2) continue;
                    double term = 1.0;
                    for (int l = 0; l < n_dims; ++l)
                        term *= (sigma >> l & 1u) ? ax[static_cast<size_t>(l)].beyond
                                                  : ax[static_cast<size_t>(l)].origin_box;
                    v += term;
                }
                break;
            }
            case ProcessTag::B: break;
        }
        C.entries(i, j) = v;
        C.entries(j, i) = v;
    });

    if (tag == ProcessTag::ZEps) {
        for (Eigen::Index i = 0; i < n; ++i)
            if (C.entries(i, i) < -tol)
                throw InternalConsistencyError("covariance_piece: negative variance for the remainder piece");
    }
    return C;
}

Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& entries, double* jitter_applied) {
    const Eigen::Index n = entries.rows();
    const double scale = entries.trace() / static_cast<double>(n);
    double lambda = 0.0;
    for (int step = 0; step <= 7; ++step) {
        Eigen::MatrixXd jittered = entries;
        if (lambda > 0.0) jittered.diagonal().array() += lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(jittered);
        if (llt.info() == Eigen::Success) {
            if (jitter_applied) *jitter_applied = lambda;
            return llt.matrixL();
        }
        lambda = (step == 0) ? 1e-12 * scale : lambda * 10.0;
    }
    throw ConditioningError("matrix is not positive semi-definite within the jitter ladder (trace/n = " +
                            std::to_string(scale) + ")");
}

double conditional_variance(const CovarianceMatrix& C, int target, const std::vector<int>& given) {
    const Eigen::Index n = C.size();
    if (target < 0 || target >= n) throw ArgumentError("conditional_variance: target out of range");
    for (int g : given)
        if (g < 0 || g >= n || g == target)
            throw ArgumentError("conditional_variance: conditioning set must exclude the target");
    const double c_tt = C.entries(target, target);
    if (given.empty()) return c_tt;

    const Eigen::Index m = static_cast<Eigen::Index>(given.size());
    Eigen::MatrixXd c_gg(m, m);
    Eigen::VectorXd c_gt(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        c_gt[i] = C.entries(given[static_cast<size_t>(i)], target);
        for (Eigen::Index j = 0; j < m; ++j)
            c_gg(i, j) = C.entries(given[static_cast<size_t>(i)], given[static_cast<size_t>(j)]);
    }
    const double scale = c_gg.trace() / static_cast<double>(m);
    double lambda = 0.0;
    for (int step = 0; step <= 7; ++step) {
        Eigen::MatrixXd jittered = c_gg;
        if (lambda > 0.0) jittered.diagonal().array() += lambda;
        Eigen::LLT<Eigen::MatrixXd> llt(jittered);
        if (llt.info() == Eigen::Success) {
            double schur = c_tt - c_gt.dot(llt.solve(c_gt));
            if (schur < 0.0) {
                if (schur < -1e-12 * std::max(1.0, c_tt))
                    throw ConditioningError("conditional variance negative beyond round-off: " +
                                            std::to_string(schur));
                schur = 0.0;
            }
            return schur;
        }
        lambda = (step == 0) ? 1e-12 * scale : lambda * 10.0;
    }
    throw ConditioningError("conditional_variance: conditioning block is singular beyond the jitter ladder");
}

LndCertificate lnd_certificate(const HurstFunctional& h, const Eigen::MatrixXd& points, int ell,
                               double eps, LndMode mode, double tol) {
    const int n_dims = h.ndim();
    check_points(points, n_dims);
    const Eigen::Index n = points.rows();
    if (n < 2 || n > 50) throw ArgumentError("lnd_certificate: need 2 <= n <= 50 points");

    LndCertificate cert;
    cert.mode = mode;
    cert.ordered_points = points;
    const Eigen::VectorXd last = points.row(n - 1);
    const Eigen::VectorXd h_last = h(last);

    if (mode == LndMode::AlongAxis) {
        if (ell < 0 || ell >= n_dims) throw ArgumentError("lnd_certificate: axis out of range");
        cert.ell = ell;
        for (Eigen::Index j = 0; j + 1 < n; ++j)
            if (points(j, ell) > points(j + 1, ell))
                throw ArgumentError("lnd_certificate: points must be sorted ascending in the chosen axis");
        CovarianceMatrix C = covariance_piece(h, ProcessTag::YEll, eps, points, tol, ell);
        std::vector<int> given(static_cast<size_t>(n - 1));
        for (Eigen::Index j = 0; j + 1 < n; ++j) given[static_cast<size_t>(j)] = static_cast<int>(j);
        cert.cond_variance = conditional_variance(C, static_cast<int>(n - 1), given);
        const double gap = points(n - 1, ell) - points(n - 2, ell);
        cert.lower_bound_ref = std::pow(std::abs(gap), 2.0 * h_last[ell]);
    } else {
        for (Eigen::Index j = 0; j + 1 < n; ++j)
            for (int l = 0; l < n_dims; ++l)
                if (points(j, l) > points(n - 1, l))
                    throw ArgumentError("lnd_certificate: conditioning points must be dominated by the last");
        CovarianceMatrix C = covariance_b(h, points, tol);
        std::vector<int> given(static_cast<size_t>(n - 1));
        for (Eigen::Index j = 0; j + 1 < n; ++j) given[static_cast<size_t>(j)] = static_cast<int>(j);
        cert.cond_variance = conditional_variance(C, static_cast<int>(n - 1), given);
        double bound = 0.0;
        for (int l = 0; l < n_dims; ++l) {
            double gap = points(n - 1, l);  // k = 0 term, t^0 = 0
            for (Eigen::Index k = 0; k + 1 < n; ++k) gap = std::min(gap, points(n - 1, l) - points(k, l));
            bound += std::pow(gap, 2.0 * h_last[l]);
        }
        cert.lower_bound_ref = bound;
    }
    cert.ratio = cert.lower_bound_ref > 0.0
                     ? cert.cond_variance / cert.lower_bound_ref
                     : std::numeric_limits<double>::quiet_NaN();
    cert.fitted_c = cert.ratio;
    return cert;
}

double increment_form_min_ratio(const CovarianceMatrix& C, int n_random, std::uint64_t seed) {
    const Eigen::Index n = C.size();
    if (n < 1) throw ArgumentError("increment_form_min_ratio: empty matrix");
    // Gram of consecutive increments, first increment taken from zero.
    auto entry = [&](Eigen::Index i, Eigen::Index j) -> double {
        return (i < 0 || j < 0) ? 0.0 : C.entries(i, j);
    };
    Eigen::MatrixXd G(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            G(i, j) = entry(i, j) - entry(i - 1, j) - entry(i, j - 1) + entry(i - 1, j - 1);
    Eigen::VectorXd d = G.diagonal();
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_random; ++k) {
        Eigen::VectorXd u(n);
        for (Eigen::Index i = 0; i < n; ++i)
            u[i] = standard_normal_at(seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i));
        const double denom = (u.array().square() * d.array()).sum();
        if (denom <= 0.0) continue;
        best = std::min(best, u.dot(G * u) / denom);
    }
    return best;
}

IncrementBandReport increment_bounds_report(const HurstFunctional& h, const Eigen::VectorXd& lo,
                                            const Eigen::VectorXd& hi, int n_pairs, double delta,
                                            std::uint64_t seed, double tol) {
    const int n_dims = h.ndim();
    if (lo.size() != n_dims || hi.size() != n_dims)
        throw ArgumentError("increment_bounds_report: interval dimension mismatch");
    if (!(delta > 0.0)) throw ArgumentError("increment_bounds_report: delta must be positive");

    struct PairResult {
        double ratio = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<PairResult> results(static_cast<size_t>(n_pairs));
    parallel_for(n_pairs, [&](std::int64_t k) {
        // Rejection-free construction: point s uniform, offset scaled into the
        // delta-ball and clamped into the box.
        Eigen::VectorXd s(n_dims), t(n_dims);
        for (int l = 0; l < n_dims; ++l) {
            s[l] = lo[l] + (hi[l] - lo[l]) * uniform_at(seed, 11u, static_cast<std::uint64_t>(k), l);
            double off = (2.0 * uniform_at(seed, 13u, static_cast<std::uint64_t>(k), l) - 1.0);
            t[l] = s[l] + off * delta / (1.5 * std::sqrt(static_cast<double>(n_dims)));
            t[l] = std::min(hi[l], std::max(lo[l], t[l]));
        }
        if ((s - t).norm() >= delta || (s - t).norm() == 0.0) return;
        const Eigen::VectorXd u = 0.5 * (s + t);
        const Eigen::VectorXd hu = h(u);
        double ref = 0.0;
        for (int l = 0; l < n_dims; ++l) ref += std::pow(std::abs(t[l] - s[l]), 2.0 * hu[l]);
        if (ref <= 0.0) return;
        const double vt = covariance_entry(h, t, t, tol);
        const double vs = covariance_entry(h, s, s, tol);
        const double cst = covariance_entry(h, s, t, tol);
        const double inc = vt + vs - 2.0 * cst;
        results[static_cast<size_t>(k)].ratio = inc / ref;
    });

    IncrementBandReport rep;
    rep.delta = delta;
    rep.ratio_min = std::numeric_limits<double>::infinity();
    rep.ratio_max = 0.0;
    for (const auto& r : results) {
        if (std::isnan(r.ratio)) continue;
        rep.ratio_min = std::min(rep.ratio_min, r.ratio);
        rep.ratio_max = std::max(rep.ratio_max, r.ratio);
        ++rep.n_pairs;
    }

    // Cross-Hurst smoothness ratios at constant Hurst vectors sharing the
    // driving noise, on a fifth of the pair budget.
    const int n_hurst = std::max(4, n_pairs / 5);
    const double gamma = h.upper_bounds().maxCoeff();
    std::vector<PairResult> hresults(static_cast<size_t>(n_hurst));
    parallel_for(n_hurst, [&](std::int64_t k) {
        Eigen::VectorXd t(n_dims), beta(n_dims), beta2(n_dims);
        for (int l = 0; l < n_dims; ++l) {
            t[l] = lo[l] + (hi[l] - lo[l]) * uniform_at(seed, 17u, static_cast<std::uint64_t>(k), l);
            beta[l] = h.alpha() + (gamma - h.alpha()) * uniform_at(seed, 19u, static_cast<std::uint64_t>(k), l);
            beta2[l] = h.alpha() + (gamma - h.alpha()) * uniform_at(seed, 23u, static_cast<std::uint64_t>(k), l);
        }
        const double db = (beta - beta2).norm();
        if (db == 0.0) return;
        double v1 = 1.0, v2 = 1.0, cross = 1.0;
        for (int l = 0; l < n_dims; ++l) {
            const KernelSpec ka = KernelSpec::moving_average(t[l], beta[l]);
            const KernelSpec kb = KernelSpec::moving_average(t[l], beta2[l]);
            v1 *= cross_integral_1d(ka, ka, Region1D::full_line(), tol / n_dims).value;
            v2 *= cross_integral_1d(kb, kb, Region1D::full_line(), tol / n_dims).value;
            cross *= cross_integral_1d(ka, kb, Region1D::full_line(), tol / n_dims).value;
        }
        hresults[static_cast<size_t>(k)].ratio = (v1 + v2 - 2.0 * cross) / (db * db);
    });
    rep.hurst_ratio_min = std::numeric_limits<double>::infinity();
    rep.hurst_ratio_max = 0.0;
    for (const auto& r : hresults) {
        if (std::isnan(r.ratio)) continue;
        rep.hurst_ratio_min = std::min(rep.hurst_ratio_min, r.ratio);
        rep.hurst_ratio_max = std::max(rep.hurst_ratio_max, r.ratio);
        ++rep.n_hurst_pairs;
    }
    return rep;
}

CorrelationReport increment_correlation(const HurstFunctional& h, const Eigen::VectorXd& t,
                                        const Eigen::VectorXd& eta, const Eigen::VectorXi& lag_counts,
                                        const Eigen::VectorXd& lag_spacing, double tol) {
    const int n_dims = h.ndim();
    if (t.size() != n_dims || eta.size() != n_dims || lag_counts.size() != n_dims ||
        lag_spacing.size() != n_dims)
        throw ArgumentError("increment_correlation: dimension mismatch");

    long m = 1;
    for (int l = 0; l < n_dims; ++l) {
        if (lag_counts[l] < 1) throw ArgumentError("increment_correlation: counts must be >= 1");
        m *= lag_counts[l];
    }

    CorrelationReport rep;
    rep.counts = lag_counts;
    rep.spacing = lag_spacing;
    rep.lags.resize(m, n_dims);
    for (long idx = 0; idx < m; ++idx) {
        long rem = idx;
        for (int l = n_dims - 1; l >= 0; --l) {
            rep.lags(idx, l) = static_cast<double>(rem % lag_counts[l]) * lag_spacing[l];
            rem /= lag_counts[l];
        }
    }

    auto cov = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        if ((x.array() <= 0.0).any() || (y.array() <= 0.0).any())
            throw ArgumentError("increment_correlation: all evaluation points must stay in (0,inf)^N");
        return covariance_entry(h, x, y, tol);
    };

    auto incr_var = [&](const Eigen::VectorXd& base) {
        const Eigen::VectorXd b2 = base + eta;
        return cov(b2, b2) - 2.0 * cov(b2, base) + cov(base, base);
    };

    const double var0 = incr_var(t);
    rep.r.resize(m);
    std::vector<double> rvec(static_cast<size_t>(m));
    parallel_for(m, [&](std::int64_t idx) {
        const Eigen::VectorXd s = rep.lags.row(idx);
        const Eigen::VectorXd ts = t + s;
        const double num = cov(ts + eta, t + eta) - cov(ts + eta, t) - cov(ts, t + eta) + cov(ts, t);
        const double den = std::sqrt(incr_var(ts) * var0);
        rvec[static_cast<size_t>(idx)] = den > 0.0 ? num / den : 0.0;
    });
    for (long idx = 0; idx < m; ++idx) rep.r[idx] = rvec[static_cast<size_t>(idx)];

    // Rectangular-rule DFT on the matching frequency lattice.
    rep.frequencies.resize(m, n_dims);
    rep.spectral_density.resize(m);
    double cellvol = 1.0;
    for (int l = 0; l < n_dims; ++l) cellvol *= lag_spacing[l];
    for (long fi = 0; fi < m; ++fi) {
        Eigen::VectorXd xi(n_dims);
        long rem = fi;
        for (int l = n_dims - 1; l >= 0; --l) {
            const long k = rem % lag_counts[l];
            rem /= lag_counts[l];
            xi[l] = 2.0 * 3.14159265358979323846 * static_cast<double>(k) /
                    (static_cast<double>(lag_counts[l]) * lag_spacing[l]);
        }
        rep.frequencies.row(fi) = xi;
        std::complex<double> acc(0.0, 0.0);
        for (long idx = 0; idx < m; ++idx) {
            const double phase = -rep.lags.row(idx).dot(xi);
            acc += rep.r[idx] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        rep.spectral_density[fi] = acc * cellvol;
    }
    return rep;
}

}  // namespace mfbs
