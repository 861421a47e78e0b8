#include "mfbs/hurst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mfbs/errors.hpp"
#include "mfbs/rng.hpp"

namespace mfbs {

double anisotropic_distance(const Eigen::VectorXd& s, const Eigen::VectorXd& t,
                            const Eigen::VectorXd& exponents) {
    if (s.size() != t.size() || s.size() != exponents.size())
        throw ArgumentError("anisotropic_distance: dimension mismatch");
    double acc = 0.0;
    for (Eigen::Index l = 0; l < s.size(); ++l) {
        if (exponents[l] <= 0.0 || exponents[l] >= 1.0)
            throw ArgumentError("anisotropic_distance: exponents must lie in (0,1)");
        acc += std::pow(std::abs(s[l] - t[l]), exponents[l]);
    }
    return acc;
}

namespace {

Eigen::VectorXd clamp01(Eigen::VectorXd v, double lo, double hi) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::min(hi, std::max(lo, v[i]));
    return v;
}

}  // namespace

HurstFunctional HurstFunctional::constant(const Eigen::VectorXd& H) {
    for (Eigen::Index i = 0; i < H.size(); ++i)
        if (H[i] <= 0.0 || H[i] >= 1.0) throw ArgumentError("constant Hurst vector must lie in (0,1)^N");
    HurstFunctional h;
    h.n_ = static_cast<int>(H.size());
    h.family_ = Family::Constant;
    h.const_value_ = H;
    h.eval_ = [H](const Eigen::VectorXd&) { return H; };
    h.separable_ = true;
    h.alpha_ = H.minCoeff();
    h.upper_ = H;
    h.lipschitz_ = Eigen::VectorXd::Zero(H.size());
    return h;
}

HurstFunctional HurstFunctional::affine_clamped(const Eigen::VectorXd& intercept,
                                                const Eigen::MatrixXd& slope, double clamp_lo,
                                                double clamp_hi) {
    const int n = static_cast<int>(intercept.size());
    if (slope.rows() != n || slope.cols() != n) throw ArgumentError("affine_clamped: slope must be N x N");
    if (!(clamp_lo > 0.0 && clamp_hi < 1.0 && clamp_lo <= clamp_hi))
        throw ArgumentError("affine_clamped: clamps must satisfy 0 < lo <= hi < 1");
    HurstFunctional h;
    h.n_ = n;
    h.family_ = Family::AffineClamped;
    h.eval_ = [intercept, slope, clamp_lo, clamp_hi](const Eigen::VectorXd& t) {
        return clamp01(intercept + slope * t, clamp_lo, clamp_hi);
    };
    h.separable_ = true;
    for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m)
            if (m != l && slope(l, m) != 0.0) h.separable_ = false;
    h.alpha_ = clamp_lo;
    h.upper_ = Eigen::VectorXd::Constant(n, clamp_hi);
    // |H_l(t) - H_l(s)| <= sum_m |slope(l,m)| |t_m - s_m|, and |x| <= |x|^K for
    // |x| <= 1, so the row 1-norm is a valid constant whenever delta_a <= 1.
    h.lipschitz_ = slope.cwiseAbs().rowwise().sum();
    return h;
}

HurstFunctional HurstFunctional::smooth_sigmoid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                                const Eigen::VectorXd& gain, const Eigen::VectorXd& center) {
    const int n = static_cast<int>(lo.size());
    if (hi.size() != n || gain.size() != n || center.size() != n)
        throw ArgumentError("smooth_sigmoid: parameter sizes must match");
    for (int l = 0; l < n; ++l)
        if (!(lo[l] > 0.0 && hi[l] < 1.0 && lo[l] <= hi[l]))
            throw ArgumentError("smooth_sigmoid: need 0 < lo <= hi < 1 per axis");
    HurstFunctional h;
    h.n_ = n;
    h.family_ = Family::SmoothSigmoid;
    h.eval_ = [lo, hi, gain, center](const Eigen::VectorXd& t) {
        Eigen::VectorXd out(lo.size());
        for (Eigen::Index l = 0; l < lo.size(); ++l) {
            double s = 1.0 / (1.0 + std::exp(-gain[l] * (t[l] - center[l])));
            out[l] = lo[l] + (hi[l] - lo[l]) * s;
        }
        return out;
    };
    h.separable_ = true;
    h.alpha_ = lo.minCoeff();
    h.upper_ = hi;
    h.lipschitz_ = (gain.cwiseAbs().array() * (hi - lo).array() / 4.0).matrix();
    return h;
}

HurstFunctional HurstFunctional::user_supplied(const std::vector<std::string>& exprs,
                                               const Eigen::VectorXd& probe_lo,
                                               const Eigen::VectorXd& probe_hi) {
    const int n = static_cast<int>(exprs.size());
    if (probe_lo.size() != n || probe_hi.size() != n)
        throw ArgumentError("user_supplied: probe box must have one bound per axis");
    std::vector<Expression> parsed;
    parsed.reserve(exprs.size());
    for (const auto& e : exprs) parsed.push_back(Expression::parse(e, n));

    HurstFunctional h;
    h.n_ = n;
    h.family_ = Family::UserSupplied;
    h.eval_ = [parsed](const Eigen::VectorXd& t) {
        Eigen::VectorXd out(static_cast<Eigen::Index>(parsed.size()));
        for (size_t l = 0; l < parsed.size(); ++l) out[static_cast<Eigen::Index>(l)] = parsed[l].eval(t);
        return out;
    };
    h.separable_ = true;
    for (int l = 0; l < n; ++l)
        if (!parsed[static_cast<size_t>(l)].depends_only_on(l)) h.separable_ = false;

    // Probe the envelope on a coarse lattice plus random points.
    const int per_axis = 9;
    long total = 1;
    for (int l = 0; l < n; ++l) total *= per_axis;
    Eigen::VectorXd hmin = Eigen::VectorXd::Constant(n, 2.0);
    Eigen::VectorXd hmax = Eigen::VectorXd::Constant(n, -1.0);
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(static_cast<size_t>(total) + 128);
    for (long idx = 0; idx < total; ++idx) {
        Eigen::VectorXd t(n);
        long rem = idx;
        for (int l = n - 1; l >= 0; --l) {
            int k = static_cast<int>(rem % per_axis);
            rem /= per_axis;
            t[l] = probe_lo[l] + (probe_hi[l] - probe_lo[l]) * k / (per_axis - 1.0);
        }
        pts.push_back(t);
    }
    for (int j = 0; j < 128; ++j) {
        Eigen::VectorXd t(n);
        for (int l = 0; l < n; ++l)
            t[l] = probe_lo[l] + (probe_hi[l] - probe_lo[l]) * uniform_at(0x70726f6265ULL, j, l);
        pts.push_back(t);
    }
    for (const auto& t : pts) {
        Eigen::VectorXd v = h.eval_(t);
        for (int l = 0; l < n; ++l) {
            if (!(v[l] > 0.0 && v[l] < 1.0))
                throw ModelError("user-supplied Hurst expression leaves (0,1) at a probe point");
            hmin[l] = std::min(hmin[l], v[l]);
            hmax[l] = std::max(hmax[l], v[l]);
        }
    }
    h.alpha_ = std::max(1e-6, hmin.minCoeff() - 1e-9);
    h.upper_ = clamp01(hmax.array() + 1e-9, 1e-6, 1.0 - 1e-9);
    // Empirical Lipschitz ratios over close pairs, with 50% headroom.
    Eigen::VectorXd lip = Eigen::VectorXd::Zero(n);
    for (size_t i = 0; i + 1 < pts.size(); i += 2) {
        const auto& s = pts[i];
        const auto& t = pts[i + 1];
        double dist = anisotropic_distance(s, t, h.upper_);
        if (dist <= 0.0) continue;
        Eigen::VectorXd dv = (h.eval_(t) - h.eval_(s)).cwiseAbs();
        for (int l = 0; l < n; ++l) lip[l] = std::max(lip[l], dv[l] / dist);
    }
    h.lipschitz_ = lip * 1.5;
    return h;
}

Eigen::VectorXd HurstFunctional::operator()(const Eigen::VectorXd& t) const {
    if (t.size() != n_) throw ArgumentError("HurstFunctional: point dimension mismatch");
    return eval_(t);
}

double HurstFunctional::component(int ell, const Eigen::VectorXd& t) const {
    if (ell < 0 || ell >= n_) throw ArgumentError("HurstFunctional: axis out of range");
    return eval_(t)[ell];
}

std::string HurstFunctional::family_name() const {
    switch (family_) {
        case Family::Constant: return "constant";
        case Family::AffineClamped: return "affine-clamped";
        case Family::SmoothSigmoid: return "smooth-sigmoid";
        case Family::UserSupplied: return "user-supplied";
    }
    return "?";
}

void HurstFunctional::declare_envelope(double alpha, const Eigen::VectorXd& upper,
                                       const Eigen::VectorXd& lipschitz) {
    if (upper.size() != n_ || lipschitz.size() != n_)
        throw ArgumentError("declare_envelope: size mismatch");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("declare_envelope: alpha must lie in (0,1)");
    alpha_ = alpha;
    upper_ = upper;
    lipschitz_ = lipschitz;
}

EnvelopeCheck validate_condition_a(const HurstFunctional& h, const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi, const Eigen::VectorXi& resolution,
                                   double delta_a, double tol) {
    const int n = h.ndim();
    if (lo.size() != n || hi.size() != n || resolution.size() != n)
        throw ArgumentError("validate_condition_a: dimension mismatch");
    for (int l = 0; l < n; ++l) {
        if (!(lo[l] > 0.0 && hi[l] > lo[l])) throw ArgumentError("validate_condition_a: interval must satisfy 0 < lo < hi");
        if (resolution[l] < 2) throw ArgumentError("validate_condition_a: need at least 2 samples per axis");
    }

    long total = 1;
    for (int l = 0; l < n; ++l) total *= resolution[l];

    std::vector<Eigen::VectorXd> pts(static_cast<size_t>(total));
    std::vector<Eigen::VectorXd> values(static_cast<size_t>(total));
    for (long idx = 0; idx < total; ++idx) {
        Eigen::VectorXd t(n);
        long rem = idx;
        for (int l = n - 1; l >= 0; --l) {
            int k = static_cast<int>(rem % resolution[l]);
            rem /= resolution[l];
            t[l] = lo[l] + (hi[l] - lo[l]) * k / (resolution[l] - 1.0);
        }
        pts[static_cast<size_t>(idx)] = t;
        values[static_cast<size_t>(idx)] = h(t);
    }

    EnvelopeCheck out;
    out.h_min = Eigen::VectorXd::Constant(n, 2.0);
    out.h_max = Eigen::VectorXd::Constant(n, -1.0);
    for (const auto& v : values) {
        for (int l = 0; l < n; ++l) {
            if (!(v[l] > 0.0 && v[l] < 1.0))
                throw ModelError("Hurst functional leaves (0,1) on the validation grid");
            out.h_min[l] = std::min(out.h_min[l], v[l]);
            out.h_max[l] = std::max(out.h_max[l], v[l]);
        }
    }
    out.bounds_ok.resize(static_cast<size_t>(n));
    for (int l = 0; l < n; ++l)
        out.bounds_ok[static_cast<size_t>(l)] =
            out.h_min[l] >= h.alpha() - tol && out.h_max[l] <= h.upper_bounds()[l] + tol;

    // Lipschitz clause over pairs with |s - t| < delta_a. Cap the pair count by
    // random subsampling on fine grids.
    out.lipschitz_ratio = Eigen::VectorXd::Zero(n);
    const long max_pairs = 2'000'000;
    long checked = 0;
    auto consider = [&](long i, long j) {
        const auto& s = pts[static_cast<size_t>(i)];
        const auto& t = pts[static_cast<size_t>(j)];
        double euclid = (s - t).norm();
        if (euclid >= delta_a || euclid == 0.0) return;
        double dist = anisotropic_distance(s, t, h.upper_bounds());
        if (dist == 0.0) return;
        const auto& vs = values[static_cast<size_t>(i)];
        const auto& vt = values[static_cast<size_t>(j)];
        for (int l = 0; l < n; ++l)
            out.lipschitz_ratio[l] = std::max(out.lipschitz_ratio[l], std::abs(vt[l] - vs[l]) / dist);
        ++checked;
    };
    if (total * (total - 1) / 2 <= max_pairs) {
        for (long i = 0; i < total; ++i)
            for (long j = i + 1; j < total; ++j) consider(i, j);
    } else {
        for (long k = 0; k < max_pairs; ++k) {
            long i = static_cast<long>(uniform_at(0x636f6e64ULL, k, 0) * total);
            long j = static_cast<long>(uniform_at(0x636f6e64ULL, k, 1) * total);
            if (i != j) consider(std::min(i, j), std::max(i, j));
        }
    }
    out.n_pairs = checked;
    out.lipschitz_ok.resize(static_cast<size_t>(n));
    if (checked == 0) {
        out.lipschitz_vacuous = true;
        for (int l = 0; l < n; ++l) out.lipschitz_ok[static_cast<size_t>(l)] = true;
    } else {
        for (int l = 0; l < n; ++l)
            out.lipschitz_ok[static_cast<size_t>(l)] =
                out.lipschitz_ratio[l] <= h.lipschitz()[l] * (1.0 + tol) + 1e-15;
    }
    out.pass = true;
    for (int l = 0; l < n; ++l)
        out.pass = out.pass && out.bounds_ok[static_cast<size_t>(l)] && out.lipschitz_ok[static_cast<size_t>(l)];
    return out;
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Exists: return "exists";
        case Regime::Empty: return "empty";
        case Regime::Boundary: return "boundary";
    }
    return "?";
}

namespace {
constexpr double kRegimeTol = 1e-12;
}

ExponentReport dominant_exponent(const Eigen::VectorXd& H, int d) {
    const int n = static_cast<int>(H.size());
    if (n < 1) throw ArgumentError("dominant_exponent: empty Hurst vector");
    if (d < 1) throw ArgumentError("dominant_exponent: d must be a positive integer");
    for (int l = 0; l < n; ++l)
        if (!(H[l] > 0.0 && H[l] < 1.0)) throw ArgumentError("dominant_exponent: H entries must lie in (0,1)");

    ExponentReport rep;
    rep.permutation = Eigen::VectorXi::LinSpaced(n, 0, n - 1);
    std::sort(rep.permutation.data(), rep.permutation.data() + n,
              [&](int a, int b) { return H[a] < H[b]; });
    rep.sorted_h.resize(n);
    for (int i = 0; i < n; ++i) rep.sorted_h[i] = H[rep.permutation[i]];
    const Eigen::VectorXd& hs = rep.sorted_h;

    const double inv_sum = hs.cwiseInverse().sum();
    rep.nu = static_cast<double>(d) / inv_sum;

    // N-term split: 1/p_l = (1/H_l) / sum_i (1/H_i), so sum_l 1/p_l == 1.
    rep.p.resize(n);
    for (int l = 0; l < n; ++l) rep.p[l] = inv_sum * hs[l];

    rep.per_k_values.resize(n);
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        for (int l = 0; l <= k; ++l) acc += hs[k] / hs[l];
        rep.per_k_values[k] = acc + (n - (k + 1)) - hs[k] * d;
    }
    rep.beta_min_formula = rep.per_k_values.minCoeff();

    if (std::abs(inv_sum - d) <= kRegimeTol) {
        rep.regime = Regime::Boundary;
        rep.tau = 0;
        rep.beta = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    if (inv_sum < d) {
        rep.regime = Regime::Empty;
        rep.tau = 0;
        rep.beta = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }

    rep.regime = Regime::Exists;
    double partial = 0.0;
    rep.tau = n;
    for (int k = 1; k <= n; ++k) {
        double next = partial + 1.0 / hs[k - 1];
        if (partial <= d + kRegimeTol && static_cast<double>(d) < next - kRegimeTol) {
            rep.tau = k;
            break;
        }
        partial = next;
    }
    double acc = 0.0;
    for (int l = 0; l < rep.tau; ++l) acc += hs[rep.tau - 1] / hs[l];
    rep.beta = (n - rep.tau) - hs[rep.tau - 1] * d + acc;
    return rep;
}

HolderSplit holder_exponent_split(const Eigen::VectorXd& H_bar, int d, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("holder_exponent_split: delta must lie in (0,1)");
    ExponentReport rep = dominant_exponent(H_bar, d);
    if (rep.regime != Regime::Exists)
        throw ArgumentError("holder_exponent_split: requires sum_l 1/H_l > d");

    HolderSplit out;
    out.p = rep.p;
    out.nu = rep.nu;

    const Eigen::VectorXd& hs = rep.sorted_h;
    const int tau = rep.tau;
    const double q = static_cast<double>(d);

    SplitCertificate& cert = out.certificate;
    cert.tau = tau;
    double inv_head = 0.0;
    for (int l = 0; l < tau; ++l) inv_head += 1.0 / hs[l];
    cert.alpha_tau = inv_head - q;
    cert.rho = cert.alpha_tau / (4.0 * tau);

    // Parameterize 1/p_l = 1/(H_l q) - w_l alpha_tau / q with w >= 0 summing to
    // one, which enforces sum 1/p_l = 1 identically. Weight mass is pushed to
    // the slot l = tau until the damped balance inequality holds.
    const double h_tau = hs[tau - 1];
    double balance_rhs = h_tau * q + tau;
    for (int l = 0; l < tau; ++l) balance_rhs -= h_tau / hs[l];
    cert.balance_rhs = balance_rhs;

    double eta = 1.0 / (2.0 * tau);
    Eigen::VectorXd p_tau(tau);
    for (int iter = 0; iter < 80; ++iter) {
        Eigen::VectorXd w = Eigen::VectorXd::Constant(tau, eta);
        w[tau - 1] = 1.0 - (tau - 1) * eta;
        bool ok = true;
        double balance_lhs = 0.0;
        for (int l = 0; l < tau; ++l) {
            double inv_p = 1.0 / (hs[l] * q) - w[l] * cert.alpha_tau / q;
            if (!(inv_p > 0.0 && inv_p <= 1.0 + 1e-15)) ok = false;
            p_tau[l] = 1.0 / inv_p;
            double slot = hs[l] * q * inv_p;
            if (!(slot < 1.0)) ok = false;
            balance_lhs += slot;
        }
        balance_lhs *= (1.0 - delta);
        cert.balance_lhs = balance_lhs;
        if (ok && balance_lhs <= balance_rhs + 1e-14) {
            cert.p = p_tau;
            cert.feasible = true;
            // Margin slot: need 2 rho < w_l alpha_tau; l = tau always works.
            for (int l = tau - 1; l >= 0; --l) {
                if (hs[l] * q / p_tau[l] + 2.0 * hs[l] * cert.rho < 1.0) {
                    cert.ell0 = l + 1;
                    break;
                }
            }
            break;
        }
        eta *= 0.5;
    }
    if (!cert.feasible || cert.ell0 < 0)
        throw InternalConsistencyError(
            "holder_exponent_split: no feasible tau-term split found although sum 1/H_l > d; "
            "balance " + std::to_string(cert.balance_lhs) + " vs " + std::to_string(cert.balance_rhs));
    return out;
}

}  // namespace mfbs
