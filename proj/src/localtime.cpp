#include "mfbs/localtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfbs/errors.hpp"
#include "mfbs/parallel.hpp"

namespace mfbs {

TimeSet TimeSet::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    TimeSet ts;
    ts.kind = Kind::Box;
    ts.lo = lo;
    ts.hi = hi;
    return ts;
}

TimeSet TimeSet::ball(const Eigen::VectorXd& center, double radius) {
    if (!(radius > 0.0)) throw ArgumentError("TimeSet: ball radius must be positive");
    TimeSet ts;
    ts.kind = Kind::Ball;
    ts.center = center;
    ts.radius = radius;
    return ts;
}

std::vector<long> time_set_indices(const Grid& grid, const TimeSet& ts) {
    const long n = grid.n_points();
    std::vector<long> out;
    for (long i = 0; i < n; ++i) {
        const Eigen::VectorXd p = grid.point(i);
        bool inside = true;
        if (ts.kind == TimeSet::Kind::Box) {
            if (ts.lo.size() != p.size() || ts.hi.size() != p.size())
                throw ArgumentError("time_set_indices: box dimension mismatch");
            for (Eigen::Index l = 0; l < p.size(); ++l)
                if (p[l] < ts.lo[l] || p[l] > ts.hi[l]) inside = false;
        } else {
            if (ts.center.size() != p.size()) throw ArgumentError("time_set_indices: ball dimension mismatch");
            inside = (p - ts.center).norm() <= ts.radius;
        }
        if (inside) out.push_back(i);
    }
    return out;
}

SpatialBins SpatialBins::regular(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                 const Eigen::VectorXi& counts) {
    if (lo.size() != hi.size() || lo.size() != counts.size())
        throw ArgumentError("SpatialBins: dimension mismatch");
    for (Eigen::Index l = 0; l < counts.size(); ++l) {
        if (counts[l] < 1) throw ArgumentError("SpatialBins: counts must be >= 1");
        if (!(hi[l] > lo[l])) throw ArgumentError("SpatialBins: need hi > lo");
    }
    SpatialBins b;
    b.lo = lo;
    b.hi = hi;
    b.counts = counts;
    return b;
}

SpatialBins SpatialBins::covering(const FieldSample& field, double k, int per_axis, double pad) {
    const int d = field.d;
    Eigen::VectorXd lo(d), hi(d);
    const double margin = pad / std::sqrt(k);
    for (int c = 0; c < d; ++c) {
        lo[c] = field.values.col(c).minCoeff() - margin;
        hi[c] = field.values.col(c).maxCoeff() + margin;
    }
    return regular(lo, hi, Eigen::VectorXi::Constant(d, per_axis));
}

long SpatialBins::n_bins() const {
    long n = 1;
    for (Eigen::Index l = 0; l < counts.size(); ++l) n *= counts[l];
    return n;
}

double SpatialBins::bin_volume() const {
    double v = 1.0;
    for (Eigen::Index l = 0; l < counts.size(); ++l) v *= (hi[l] - lo[l]) / counts[l];
    return v;
}

Eigen::VectorXd SpatialBins::center(long flat) const {
    Eigen::VectorXd x(counts.size());
    for (Eigen::Index l = counts.size() - 1; l >= 0; --l) {
        const long idx = flat % counts[l];
        flat /= counts[l];
        x[l] = lo[l] + (hi[l] - lo[l]) * (idx + 0.5) / counts[l];
    }
    return x;
}

namespace {

double gaussian_kernel_prefactor(double k, int d) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::pow(k / two_pi, 0.5 * d);
}

}  // namespace

LocalTimeEstimate mollified_local_time(const FieldSample& field, const TimeSet& ts,
                                       const SpatialBins& bins, double k) {
    if (!(k > 0.0)) throw ArgumentError("mollified_local_time: k must be positive");
    if (bins.ndim() != field.d) throw ArgumentError("mollified_local_time: bins must live in R^d");
    const std::vector<long> idx = time_set_indices(field.grid, ts);
    if (idx.empty()) throw ArgumentError("mollified_local_time: empty time set");

    LocalTimeEstimate est;
    est.bins = bins;
    est.k = k;
    est.time_cell_volume = field.grid.cell_volume();
    est.n_time_points = static_cast<long>(idx.size());
    est.time_measure = est.time_cell_volume * static_cast<double>(idx.size());

    const double pref = gaussian_kernel_prefactor(k, field.d) * est.time_cell_volume;
    const long nb = bins.n_bins();
    est.values = Eigen::VectorXd::Zero(nb);
    std::vector<double> vals(static_cast<size_t>(nb), 0.0);
    parallel_for(nb, [&](std::int64_t bi) {
        const Eigen::VectorXd x = bins.center(bi);
        double acc = 0.0;
        for (long ti : idx) {
            const double dist2 = (field.values.row(ti).transpose() - x).squaredNorm();
            acc += std::exp(-0.5 * k * dist2);
        }
        vals[static_cast<size_t>(bi)] = pref * acc;
    });
    for (long bi = 0; bi < nb; ++bi) est.values[bi] = vals[static_cast<size_t>(bi)];
    return est;
}

double local_time_at(const FieldSample& field, const std::vector<long>& time_indices,
                     const Eigen::VectorXd& x, double k, int component_offset) {
    if (!(k > 0.0)) throw ArgumentError("local_time_at: k must be positive");
    if (x.size() != field.d) throw ArgumentError("local_time_at: point must live in R^d");
    (void)component_offset;
    const double pref = gaussian_kernel_prefactor(k, field.d) * field.grid.cell_volume();
    double acc = 0.0;
    for (long ti : time_indices) {
        const double dist2 = (field.values.row(ti).transpose() - x).squaredNorm();
        acc += std::exp(-0.5 * k * dist2);
    }
    return pref * acc;
}

ExistenceReport existence_predicate(const HurstFunctional& h, const Eigen::VectorXd& lo,
                                    const Eigen::VectorXd& hi, int d, const Eigen::VectorXi& resolution) {
    const int n = h.ndim();
    if (lo.size() != n || hi.size() != n || resolution.size() != n)
        throw ArgumentError("existence_predicate: dimension mismatch");
    long total = 1;
    for (int l = 0; l < n; ++l) {
        if (resolution[l] < 2) throw ArgumentError("existence_predicate: need resolution >= 2");
        total *= resolution[l];
    }
    ExistenceReport rep;
    rep.h_bar = Eigen::VectorXd::Constant(n, 0.0);
    rep.min_inv_sum = std::numeric_limits<double>::infinity();
    rep.max_inv_sum = 0.0;
    for (long idx = 0; idx < total; ++idx) {
        Eigen::VectorXd t(n);
        long rem = idx;
        for (int l = n - 1; l >= 0; --l) {
            const int kk = static_cast<int>(rem % resolution[l]);
            rem /= resolution[l];
            t[l] = lo[l] + (hi[l] - lo[l]) * kk / (resolution[l] - 1.0);
        }
        const Eigen::VectorXd hv = h(t);
        double inv = 0.0;
        for (int l = 0; l < n; ++l) {
            inv += 1.0 / hv[l];
            rep.h_bar[l] = std::max(rep.h_bar[l], hv[l]);
        }
        rep.min_inv_sum = std::min(rep.min_inv_sum, inv);
        rep.max_inv_sum = std::max(rep.max_inv_sum, inv);
    }
    constexpr double tol = 1e-12;
    if (rep.min_inv_sum > d + tol)
        rep.verdict = ExistenceVerdict::ExistsL2;
    else if (rep.min_inv_sum < d - tol)
        rep.verdict = ExistenceVerdict::None;
    else
        rep.verdict = ExistenceVerdict::Boundary;
    return rep;
}

TestFunction TestFunction::one(int d) {
    TestFunction f;
    f.kind = Kind::One;
    f.center = Eigen::VectorXd::Zero(d);
    return f;
}

TestFunction TestFunction::box_indicator(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    TestFunction f;
    f.kind = Kind::BoxIndicator;
    f.lo = lo;
    f.hi = hi;
    return f;
}

TestFunction TestFunction::gaussian_bump(const Eigen::VectorXd& center, double width) {
    if (!(width > 0.0)) throw ArgumentError("TestFunction: bump width must be positive");
    TestFunction f;
    f.kind = Kind::GaussianBump;
    f.center = center;
    f.width = width;
    return f;
}

double TestFunction::operator()(const Eigen::VectorXd& x) const {
    switch (kind) {
        case Kind::One: return 1.0;
        case Kind::BoxIndicator: {
            for (Eigen::Index l = 0; l < x.size(); ++l)
                if (x[l] < lo[l] || x[l] > hi[l]) return 0.0;
            return 1.0;
        }
        case Kind::GaussianBump:
            return std::exp(-0.5 * (x - center).squaredNorm() / (width * width));
    }
    return 0.0;
}

double occupation_identity_residual(const FieldSample& field, const TestFunction& f, const TimeSet& ts,
                                    const SpatialBins& bins, double k) {
    const std::vector<long> idx = time_set_indices(field.grid, ts);
    if (idx.empty()) throw ArgumentError("occupation_identity_residual: empty time set");
    const double dt = field.grid.cell_volume();
    double direct = 0.0;
    for (long ti : idx) direct += f(field.values.row(ti).transpose()) * dt;

    const LocalTimeEstimate est = mollified_local_time(field, ts, bins, k);
    double through_density = 0.0;
    const double bv = bins.bin_volume();
    for (long bi = 0; bi < bins.n_bins(); ++bi) through_density += f(bins.center(bi)) * est.values[bi] * bv;

    const double floor = 1e-12 * est.time_measure + 1e-300;
    return std::abs(direct - through_density) / std::max(std::abs(direct), floor);
}

double KernelWidthRule::resolve(const FieldSample& field) const {
    if (kind == Kind::Fixed) {
        if (!(fixed_k > 0.0)) throw ArgumentError("KernelWidthRule: fixed k must be positive");
        return fixed_k;
    }
    // Median Euclidean increment over axis-adjacent grid neighbours.
    const Grid& g = field.grid;
    const long n = g.n_points();
    std::vector<double> incs;
    incs.reserve(static_cast<size_t>(n) * static_cast<size_t>(g.ndim()));
    for (long i = 0; i < n; ++i) {
        const Eigen::VectorXi mi = g.multi_index(i);
        for (int l = 0; l < g.ndim(); ++l) {
            if (mi[l] + 1 >= g.counts[l]) continue;
            Eigen::VectorXi mj = mi;
            mj[l] += 1;
            const long j = g.flat_index(mj);
            incs.push_back((field.values.row(i) - field.values.row(j)).norm());
        }
    }
    if (incs.empty()) throw ArgumentError("KernelWidthRule: grid has no adjacent pairs");
    std::nth_element(incs.begin(), incs.begin() + static_cast<long>(incs.size()) / 2, incs.end());
    const double med = incs[incs.size() / 2];
    if (!(med > 0.0)) throw ArgumentError("KernelWidthRule: degenerate path (zero median increment)");
    const double width = multiplier * med;
    return 1.0 / (width * width);
}

ScalingFit ball_scaling_fit(const std::vector<FieldSample>& ensemble, const HurstFunctional& h,
                            const Eigen::VectorXd& t, LevelMode mode, const Eigen::VectorXd& fixed_x,
                            const Eigen::VectorXd& radii, const KernelWidthRule& rule) {
    if (ensemble.size() < 30) throw ArgumentError("ball_scaling_fit: need an ensemble of at least 30 paths");
    if (radii.size() < 2) throw ArgumentError("ball_scaling_fit: need at least two radii for a fit");
    for (Eigen::Index i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] > radii[i + 1])) throw ArgumentError("ball_scaling_fit: radii must be decreasing");

    const Grid& g = ensemble.front().grid;
    // Every ball must stay within the grid.
    for (int l = 0; l < g.ndim(); ++l)
        if (t[l] - radii[0] < g.lo[l] - 1e-12 || t[l] + radii[0] > g.hi[l] + 1e-12)
            throw ArgumentError("ball_scaling_fit: ball exits the grid");

    std::vector<std::vector<long>> ball_idx(static_cast<size_t>(radii.size()));
    for (Eigen::Index r = 0; r < radii.size(); ++r)
        ball_idx[static_cast<size_t>(r)] = time_set_indices(g, TimeSet::ball(t, radii[r]));

    // Nearest grid point to t for the path-level mode.
    long t_flat = 0;
    {
        Eigen::VectorXi mi(g.ndim());
        const Eigen::VectorXd sp = g.spacing();
        for (int l = 0; l < g.ndim(); ++l) {
            const double step = sp[l] > 0.0 ? sp[l] : 1.0;
            mi[l] = static_cast<int>(std::lround((t[l] - g.lo[l]) / step));
            mi[l] = std::min(g.counts[l] - 1, std::max(0, mi[l]));
        }
        t_flat = g.flat_index(mi);
    }

    const int m = static_cast<int>(ensemble.size());
    Eigen::MatrixXd mass(m, radii.size());
    parallel_for(m, [&](std::int64_t p) {
        const FieldSample& path = ensemble[static_cast<size_t>(p)];
        if (!path.grid.same_layout(g)) throw ArgumentError("ball_scaling_fit: mismatched grids in ensemble");
        const double k = rule.resolve(path);
        const Eigen::VectorXd x =
            mode == LevelMode::FixedLevel ? fixed_x : Eigen::VectorXd(path.values.row(t_flat).transpose());
        for (Eigen::Index r = 0; r < radii.size(); ++r)
            mass(p, r) = local_time_at(path, ball_idx[static_cast<size_t>(r)], x, k);
    });

    Eigen::VectorXd med(radii.size());
    for (Eigen::Index r = 0; r < radii.size(); ++r) med[r] = median(mass.col(r));

    const Eigen::VectorXd h_at_t = h(t);
    const ExponentReport rep = dominant_exponent(h_at_t, ensemble.front().d);
    const double theo = rep.regime == Regime::Exists ? rep.beta : std::numeric_limits<double>::quiet_NaN();
    return fit_loglog(radii, med, theo);
}

ScalingFit moment_scaling_fit(const std::vector<FieldSample>& ensemble, const HurstFunctional& h,
                              const Eigen::VectorXd& x, const Eigen::VectorXd& side_lengths, int n,
                              const KernelWidthRule& rule) {
    if (n % 2 != 0 || n < 2) throw ArgumentError("moment_scaling_fit: moment order must be even and >= 2");
    if (side_lengths.size() < 2) throw ArgumentError("moment_scaling_fit: need at least two side lengths");
    if (ensemble.empty()) throw ArgumentError("moment_scaling_fit: empty ensemble");
    const Grid& g = ensemble.front().grid;
    const Eigen::VectorXd mid = 0.5 * (g.lo + g.hi);

    std::vector<std::vector<long>> cube_idx(static_cast<size_t>(side_lengths.size()));
    for (Eigen::Index s = 0; s < side_lengths.size(); ++s) {
        const double half = 0.5 * side_lengths[s];
        Eigen::VectorXd lo = mid.array() - half;
        Eigen::VectorXd hi = mid.array() + half;
        for (int l = 0; l < g.ndim(); ++l)
            if (lo[l] < g.lo[l] - 1e-12 || hi[l] > g.hi[l] + 1e-12)
                throw ArgumentError("moment_scaling_fit: cube exits the grid");
        cube_idx[static_cast<size_t>(s)] = time_set_indices(g, TimeSet::box(lo, hi));
    }

    const int m = static_cast<int>(ensemble.size());
    Eigen::MatrixXd mass(m, side_lengths.size());
    parallel_for(m, [&](std::int64_t p) {
        const FieldSample& path = ensemble[static_cast<size_t>(p)];
        const double k = rule.resolve(path);
        for (Eigen::Index s = 0; s < side_lengths.size(); ++s)
            mass(p, s) = local_time_at(path, cube_idx[static_cast<size_t>(s)], x, k);
    });

    Eigen::VectorXd moments(side_lengths.size());
    for (Eigen::Index s = 0; s < side_lengths.size(); ++s) {
        double acc = 0.0;
        for (int p = 0; p < m; ++p) acc += std::pow(mass(p, s), n);
        moments[s] = acc / m;
    }

    // H is evaluated at the cube anchor; beta from the exponent report.
    const ExponentReport rep = dominant_exponent(h(mid), ensemble.front().d);
    const double theo =
        rep.regime == Regime::Exists ? n * rep.beta : std::numeric_limits<double>::quiet_NaN();
    return fit_loglog(side_lengths, moments, theo);
}

}  // namespace mfbs
