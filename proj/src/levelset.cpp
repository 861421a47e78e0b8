#include "mfbs/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "mfbs/errors.hpp"
#include "mfbs/parallel.hpp"

namespace mfbs {

std::uint64_t LevelSetCells::pack(const Eigen::VectorXi& idx) {
    std::uint64_t key = 0;
    for (Eigen::Index l = 0; l < idx.size(); ++l) key = (key << 16) | static_cast<std::uint64_t>(idx[l] & 0xffff);
    return key;
}

LevelSetCells LevelSetCells::synthetic(const Eigen::VectorXi& cell_counts,
                                       const std::vector<Eigen::VectorXi>& indices) {
    LevelSetCells out;
    out.cell_counts = cell_counts;
    out.n_axes = static_cast<int>(cell_counts.size());
    out.level = Eigen::VectorXd::Zero(1);
    out.rule = ExtractionRule::sign_change();
    out.cells.reserve(indices.size());
    for (const auto& idx : indices) out.cells.push_back(pack(idx));
    return out;
}

LevelSetCells extract_level_set(const FieldSample& field, const Eigen::VectorXd& x,
                                const ExtractionRule& rule, const HurstFunctional* h) {
    const Grid& g = field.grid;
    const int n_axes = g.ndim();
    if (n_axes > 4) throw ArgumentError("extract_level_set: at most 4 axes supported");
    if (x.size() != field.d) throw ArgumentError("extract_level_set: level must live in R^d");
    if (rule.kind == ExtractionRule::Kind::SignChange && field.d != 1)
        throw ArgumentError("extract_level_set: sign-change rule requires d = 1");
    if (rule.kind == ExtractionRule::Kind::Threshold && h == nullptr)
        throw ArgumentError("extract_level_set: threshold rule needs the Hurst functional");

    LevelSetCells out;
    out.level = x;
    out.rule = rule;
    out.n_axes = n_axes;
    out.cell_counts.resize(n_axes);
    long n_cells = 1;
    for (int l = 0; l < n_axes; ++l) {
        out.cell_counts[l] = std::max(0, g.counts[l] - 1);
        if (out.cell_counts[l] > 0xffff) throw ArgumentError("extract_level_set: axis too fine to pack");
        n_cells *= std::max(1, out.cell_counts[l]);
        if (out.cell_counts[l] == 0) return out;  // degenerate axis, no cells
    }

    const Eigen::VectorXd sp = g.spacing();
    double diam2 = 0.0;
    for (int l = 0; l < n_axes; ++l) diam2 += sp[l] * sp[l];
    const double diam = std::sqrt(diam2);
    const int n_corners = 1 << n_axes;

    std::vector<std::uint64_t> kept;
    for (long ci = 0; ci < n_cells; ++ci) {
        Eigen::VectorXi cidx(n_axes);
        long rem = ci;
        for (int l = n_axes - 1; l >= 0; --l) {
            cidx[l] = static_cast<int>(rem % out.cell_counts[l]);
            rem /= out.cell_counts[l];
        }
        if (rule.kind == ExtractionRule::Kind::SignChange) {
            double mn = std::numeric_limits<double>::infinity();
            double mx = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < n_corners; ++c) {
                Eigen::VectorXi p = cidx;
                for (int l = 0; l < n_axes; ++l) p[l] += (c >> l) & 1;
                const double v = field.values(g.flat_index(p), 0) - x[0];
                mn = std::min(mn, v);
                mx = std::max(mx, v);
            }
            if (mn <= 0.0 && mx >= 0.0) kept.push_back(LevelSetCells::pack(cidx));
        } else {
            const long flat = g.flat_index(cidx);  // min corner
            const Eigen::VectorXd t = g.point(flat);
            const double dist = (field.values.row(flat).transpose() - x).norm();
            const double hmin = (*h)(t).minCoeff();
            if (dist <= rule.c_thr * std::pow(diam, hmin)) kept.push_back(LevelSetCells::pack(cidx));
        }
    }
    out.cells = std::move(kept);
    return out;
}

DimensionReport box_counting(const LevelSetCells& cells, const std::vector<int>& scale_factors) {
    if (scale_factors.size() < 4) throw ArgumentError("box_counting: need at least 4 scales");
    for (int f : scale_factors)
        if (f < 1) throw ArgumentError("box_counting: scale factors must be >= 1");
    const double octaves = std::log2(static_cast<double>(*std::max_element(scale_factors.begin(), scale_factors.end())) /
                                     static_cast<double>(*std::min_element(scale_factors.begin(), scale_factors.end())));
    if (octaves < 2.0 - 1e-9) throw ArgumentError("box_counting: scales must span at least two octaves");

    DimensionReport rep;
    rep.scale_factors.resize(static_cast<Eigen::Index>(scale_factors.size()));
    rep.counts.resize(static_cast<Eigen::Index>(scale_factors.size()));
    if (cells.cells.empty()) {
        rep.regime = Regime::Empty;
        rep.slope_defined = false;
        for (size_t i = 0; i < scale_factors.size(); ++i) {
            rep.scale_factors[static_cast<Eigen::Index>(i)] = scale_factors[i];
            rep.counts[static_cast<Eigen::Index>(i)] = 0.0;
        }
        return rep;
    }

    for (size_t i = 0; i < scale_factors.size(); ++i) {
        const int f = scale_factors[i];
        std::unordered_set<std::uint64_t> coarse;
        coarse.reserve(cells.cells.size());
        for (std::uint64_t key : cells.cells) {
            std::uint64_t ckey = 0;
            for (int l = cells.n_axes - 1, shift = 0; l >= 0; --l, shift += 16) {
                const std::uint64_t axis = (key >> shift) & 0xffff;
                ckey |= (axis / static_cast<std::uint64_t>(f)) << shift;
            }
            coarse.insert(ckey);
        }
        rep.scale_factors[static_cast<Eigen::Index>(i)] = f;
        rep.counts[static_cast<Eigen::Index>(i)] = static_cast<double>(coarse.size());
    }

    // Slope of log(count) vs log(1/size): fit against inverse scale.
    Eigen::VectorXd inv_size(rep.scale_factors.size());
    for (Eigen::Index i = 0; i < inv_size.size(); ++i) inv_size[i] = 1.0 / rep.scale_factors[i];
    ScalingFit fit = fit_loglog(inv_size, rep.counts, 0.0);
    rep.slope = fit.slope;
    rep.ci_halfwidth = fit.ci_halfwidth;
    rep.r2 = fit.r2;
    rep.slope_defined = true;
    return rep;
}

namespace {

Eigen::VectorXd find_t_star(const HurstFunctional& h, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                            int resolution) {
    const int n = h.ndim();
    long total = 1;
    for (int l = 0; l < n; ++l) total *= resolution;
    double best = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_t = lo;
    for (long idx = 0; idx < total; ++idx) {
        Eigen::VectorXd t(n);
        long rem = idx;
        for (int l = n - 1; l >= 0; --l) {
            const int k = static_cast<int>(rem % resolution);
            rem /= resolution;
            t[l] = lo[l] + (hi[l] - lo[l]) * k / (resolution - 1.0);
        }
        const Eigen::VectorXd hv = h(t);
        double inv = 0.0;
        for (int l = 0; l < n; ++l) inv += 1.0 / hv[l];
        // Lexicographic tie-break is implied by the scan order and strict >.
        if (inv > best + 1e-15) {
            best = inv;
            best_t = t;
        }
    }
    return best_t;
}

std::vector<FieldSample> simulate_ensemble(const HurstFunctional& h, const Grid& grid, int d,
                                           std::uint64_t seed, int m, bool use_whitenoise,
                                           NoiseSpec noise, double cov_tol) {
    if (use_whitenoise || grid.n_points() > 4096) {
        if (noise.spacing <= 0.0) noise.spacing = grid.spacing().maxCoeff();
        if (noise.window <= 0.0) noise.window = grid.hi.maxCoeff() + 4.0;
        return sample_whitenoise_ensemble(h, grid, d, seed, m, noise);
    }
    return sample_cholesky_ensemble(h, grid, d, seed, m, cov_tol);
}

}  // namespace

DimensionExperimentResult dimension_experiment(const HurstFunctional& h, const Eigen::VectorXd& lo,
                                               const Eigen::VectorXd& hi, const Eigen::VectorXd& x,
                                               const DimensionExperimentConfig& cfg) {
    const int n = h.ndim();
    if (lo.size() != n || hi.size() != n) throw ArgumentError("dimension_experiment: dimension mismatch");

    DimensionExperimentResult res;
    res.t_star = find_t_star(h, lo, hi, cfg.t_star_resolution);
    res.exponents = dominant_exponent(h(res.t_star), cfg.d);

    const Grid grid = Grid::regular(lo, hi, cfg.resolution);

    if (res.exponents.regime == Regime::Empty) {
        // Sweep the extraction threshold downward; the non-empty fraction must
        // shrink toward zero.
        std::vector<FieldSample> paths = simulate_ensemble(h, grid, cfg.d, cfg.seed, cfg.ensemble,
                                                           cfg.use_whitenoise, cfg.noise, cfg.cov_tol);
        double c_thr = cfg.rule.kind == ExtractionRule::Kind::Threshold ? cfg.rule.c_thr : 1.0;
        for (int step = 0; step < 4; ++step) {
            int nonempty = 0;
            for (const auto& path : paths) {
                LevelSetCells cells = extract_level_set(path, x, ExtractionRule::threshold(c_thr), &h);
                if (!cells.cells.empty()) ++nonempty;
            }
            res.thresholds.push_back(c_thr);
            res.nonempty_fraction.push_back(static_cast<double>(nonempty) / paths.size());
            c_thr *= 0.5;
        }
        res.report.regime = Regime::Empty;
        res.report.slope_defined = false;
        res.report.theoretical = std::numeric_limits<double>::quiet_NaN();
        return res;
    }

    std::vector<FieldSample> paths = simulate_ensemble(h, grid, cfg.d, cfg.seed, cfg.ensemble,
                                                       cfg.use_whitenoise, cfg.noise, cfg.cov_tol);

    const size_t n_paths = paths.size();
    res.per_path_slopes = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_paths),
                                                    std::numeric_limits<double>::quiet_NaN());
    Eigen::MatrixXd counts(static_cast<Eigen::Index>(n_paths),
                           static_cast<Eigen::Index>(cfg.scale_factors.size()));
    counts.setZero();
    std::vector<int> ok(n_paths, 0);
    parallel_for(static_cast<std::int64_t>(n_paths), [&](std::int64_t p) {
        LevelSetCells cells = extract_level_set(paths[static_cast<size_t>(p)], x, cfg.rule, &h);
        DimensionReport rep = box_counting(cells, cfg.scale_factors);
        if (rep.slope_defined) {
            res.per_path_slopes[p] = rep.slope;
            counts.row(p) = rep.counts;
            ok[static_cast<size_t>(p)] = 1;
        }
    });

    DimensionReport& rep = res.report;
    rep.regime = res.exponents.regime;
    rep.theoretical = res.exponents.beta_min_formula;
    rep.scale_factors.resize(static_cast<Eigen::Index>(cfg.scale_factors.size()));
    rep.counts.resize(static_cast<Eigen::Index>(cfg.scale_factors.size()));
    std::vector<double> kept_counts;
    for (Eigen::Index s = 0; s < rep.scale_factors.size(); ++s) {
        rep.scale_factors[s] = cfg.scale_factors[static_cast<size_t>(s)];
        kept_counts.clear();
        for (size_t p = 0; p < n_paths; ++p)
            if (ok[p]) kept_counts.push_back(counts(static_cast<Eigen::Index>(p), s));
        if (kept_counts.empty()) {
            rep.regime = Regime::Empty;
            rep.slope_defined = false;
            return res;
        }
        Eigen::VectorXd kc = Eigen::Map<Eigen::VectorXd>(kept_counts.data(),
                                                         static_cast<Eigen::Index>(kept_counts.size()));
        rep.counts[s] = median(kc);
    }
    Eigen::VectorXd inv_size(rep.scale_factors.size());
    for (Eigen::Index i = 0; i < inv_size.size(); ++i) inv_size[i] = 1.0 / rep.scale_factors[i];
    ScalingFit fit = fit_loglog(inv_size, rep.counts, rep.theoretical);
    rep.slope = fit.slope;
    rep.ci_halfwidth = fit.ci_halfwidth;
    rep.r2 = fit.r2;
    rep.slope_defined = true;
    return res;
}

DimensionMap local_dimension_map(const HurstFunctional& h, const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi, const DimensionMapConfig& cfg) {
    const int n = h.ndim();
    if (cfg.n_windows < 2) throw ArgumentError("local_dimension_map: need at least two windows");
    const Grid grid = Grid::regular(lo, hi, cfg.resolution);
    const Eigen::VectorXd sp = grid.spacing();

    const int axis = cfg.vary_axis;
    if (axis < 0 || axis >= n) throw ArgumentError("local_dimension_map: bad axis");
    double extent = cfg.window_extent;
    if (extent <= 0.0) extent = (hi[axis] - lo[axis]) / (cfg.n_windows + 1);

    // Window centers spread along the chosen axis, the rest centered.
    DimensionMap map;
    map.window_centers.resize(cfg.n_windows, n);
    for (int w = 0; w < cfg.n_windows; ++w) {
        Eigen::VectorXd c = 0.5 * (lo + hi);
        const double t0 = lo[axis] + 0.5 * extent;
        const double t1 = hi[axis] - 0.5 * extent;
        c[axis] = t0 + (t1 - t0) * w / (cfg.n_windows - 1.0);
        map.window_centers.row(w) = c;
        // Windows must stay inside the interval.
        for (int l = 0; l < n; ++l)
            if (c[l] - 0.5 * extent < lo[l] - 1e-12 || c[l] + 0.5 * extent > hi[l] + 1e-12)
                throw ArgumentError("local_dimension_map: window exits the interval");
    }

    map.theoretical.resize(cfg.n_windows);
    for (int w = 0; w < cfg.n_windows; ++w) {
        const ExponentReport rep = dominant_exponent(h(map.window_centers.row(w)), cfg.d);
        if (rep.regime != Regime::Exists)
            throw ArgumentError("local_dimension_map: a window is outside the existence regime");
        map.theoretical[w] = rep.beta;
    }

    NoiseSpec noise = cfg.noise;
    if (noise.spacing <= 0.0) noise.spacing = sp.maxCoeff();
    if (noise.window <= 0.0) noise.window = hi.maxCoeff() + 4.0;
    std::vector<FieldSample> paths = sample_whitenoise_ensemble(h, grid, cfg.d, cfg.seed, cfg.ensemble, noise);

    // Per window: indices of grid points inside, then per-path extraction at
    // the path's own level B(t_center), box-counted within the window.
    map.empirical.resize(cfg.n_windows);
    for (int w = 0; w < cfg.n_windows; ++w) {
        const Eigen::VectorXd c = map.window_centers.row(w);
        Eigen::VectorXi base(n), count(n);
        for (int l = 0; l < n; ++l) {
            const double step = sp[l] > 0.0 ? sp[l] : 1.0;
            int i0 = static_cast<int>(std::ceil((c[l] - 0.5 * extent - grid.lo[l]) / step));
            int i1 = static_cast<int>(std::floor((c[l] + 0.5 * extent - grid.lo[l]) / step));
            i0 = std::max(0, i0);
            i1 = std::min(grid.counts[l] - 1, i1);
            if (i1 - i0 + 1 < 2) throw ArgumentError("local_dimension_map: window resolution too coarse");
            base[l] = i0;
            count[l] = i1 - i0 + 1;
        }
        Eigen::VectorXi center_idx(n);
        for (int l = 0; l < n; ++l) {
            const double step = sp[l] > 0.0 ? sp[l] : 1.0;
            center_idx[l] = std::min(grid.counts[l] - 1,
                                     std::max(0, static_cast<int>(std::lround((c[l] - grid.lo[l]) / step))));
        }
        const long center_flat = grid.flat_index(center_idx);

        std::vector<double> slopes(paths.size(), std::numeric_limits<double>::quiet_NaN());
        parallel_for(static_cast<std::int64_t>(paths.size()), [&](std::int64_t p) {
            const FieldSample& path = paths[static_cast<size_t>(p)];
            // Build the window sub-field.
            Grid wgrid;
            Eigen::VectorXd wlo(n), whi(n);
            for (int l = 0; l < n; ++l) {
                wlo[l] = grid.lo[l] + base[l] * sp[l];
                whi[l] = grid.lo[l] + (base[l] + count[l] - 1) * sp[l];
            }
            wgrid = Grid::regular(wlo, whi, count);
            FieldSample sub;
            sub.grid = wgrid;
            sub.d = path.d;
            sub.seed = path.seed;
            sub.tag = path.tag;
            sub.values.resize(wgrid.n_points(), path.d);
            for (long i = 0; i < wgrid.n_points(); ++i) {
                Eigen::VectorXi mi = wgrid.multi_index(i);
                Eigen::VectorXi gi = mi + base;
                sub.values.row(i) = path.values.row(grid.flat_index(gi));
            }
            const Eigen::VectorXd x = path.values.row(center_flat).transpose();
            ExtractionRule rule = path.d == 1 ? ExtractionRule::sign_change() : ExtractionRule::threshold(1.0);
            LevelSetCells cells = extract_level_set(sub, x, rule, &h);
            DimensionReport rep = box_counting(cells, cfg.scale_factors);
            if (rep.slope_defined) slopes[static_cast<size_t>(p)] = rep.slope;
        });
        std::vector<double> kept;
        for (double s : slopes)
            if (!std::isnan(s)) kept.push_back(s);
        if (kept.empty()) throw ArgumentError("local_dimension_map: no non-empty extraction in a window");
        Eigen::VectorXd kv = Eigen::Map<Eigen::VectorXd>(kept.data(), static_cast<Eigen::Index>(kept.size()));
        map.empirical[w] = median(kv);
    }
    map.spearman = spearman_rank_correlation(map.theoretical, map.empirical);
    return map;
}

}  // namespace mfbs
