#include "mfbs/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "mfbs/errors.hpp"
#include "mfbs/parallel.hpp"
#include "mfbs/rng.hpp"

namespace mfbs {

Grid Grid::regular(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, const Eigen::VectorXi& counts) {
    if (lo.size() != hi.size() || lo.size() != counts.size())
        throw ArgumentError("Grid: dimension mismatch");
    for (Eigen::Index l = 0; l < lo.size(); ++l) {
        if (!(lo[l] > 0.0)) throw ArgumentError("Grid: interval must lie in (0,inf)^N");
        if (!(hi[l] >= lo[l])) throw ArgumentError("Grid: hi must be >= lo");
        if (counts[l] < 1) throw ArgumentError("Grid: counts must be >= 1");
        if (counts[l] == 1 && hi[l] != lo[l]) throw ArgumentError("Grid: single-point axis needs lo == hi");
    }
    Grid g;
    g.lo = lo;
    g.hi = hi;
    g.counts = counts;
    return g;
}

long Grid::n_points() const {
    long n = 1;
    for (Eigen::Index l = 0; l < counts.size(); ++l) n *= counts[l];
    return n;
}

Eigen::VectorXd Grid::spacing() const {
    Eigen::VectorXd s(counts.size());
    for (Eigen::Index l = 0; l < counts.size(); ++l)
        s[l] = counts[l] > 1 ? (hi[l] - lo[l]) / (counts[l] - 1.0) : 0.0;
    return s;
}

double Grid::cell_volume() const {
    const Eigen::VectorXd s = spacing();
    double v = 1.0;
    for (Eigen::Index l = 0; l < s.size(); ++l) v *= (counts[l] > 1 ? s[l] : 1.0);
    return v;
}

Eigen::VectorXi Grid::multi_index(long flat) const {
    Eigen::VectorXi m(counts.size());
    for (Eigen::Index l = counts.size() - 1; l >= 0; --l) {
        m[l] = static_cast<int>(flat % counts[l]);
        flat /= counts[l];
    }
    return m;
}

long Grid::flat_index(const Eigen::VectorXi& multi) const {
    long f = 0;
    for (Eigen::Index l = 0; l < counts.size(); ++l) f = f * counts[l] + multi[l];
    return f;
}

Eigen::VectorXd Grid::point(long flat) const {
    const Eigen::VectorXi m = multi_index(flat);
    Eigen::VectorXd p(counts.size());
    for (Eigen::Index l = 0; l < counts.size(); ++l)
        p[l] = counts[l] > 1 ? lo[l] + (hi[l] - lo[l]) * m[l] / (counts[l] - 1.0) : lo[l];
    return p;
}

Eigen::MatrixXd Grid::points() const {
    const long n = n_points();
    Eigen::MatrixXd pts(n, counts.size());
    for (long i = 0; i < n; ++i) pts.row(i) = point(i);
    return pts;
}

bool Grid::same_layout(const Grid& other) const {
    return counts.size() == other.counts.size() && counts == other.counts && lo == other.lo &&
           hi == other.hi;
}

FieldSample sample_cholesky(const HurstFunctional& h, const Grid& grid, int d, std::uint64_t seed,
                            double tol, long cap) {
    if (d < 1) throw ArgumentError("sample_cholesky: d must be >= 1");
    const long n = grid.n_points();
    if (n > cap)
        throw ArgumentError("sample_cholesky: " + std::to_string(n) + " points exceed the exact-sampler cap " +
                            std::to_string(cap) + "; use the white-noise sampler");
    CovarianceMatrix C = covariance_b(h, grid.points(), tol);
    double jitter = 0.0;
    Eigen::MatrixXd L = psd_cholesky(C.entries, &jitter);

    FieldSample out;
    out.grid = grid;
    out.d = d;
    out.seed = seed;
    out.tag = SamplerTag::Cholesky;
    out.values.resize(n, d);
    for (int k = 0; k < d; ++k) {
        Eigen::VectorXd z(n);
        for (long i = 0; i < n; ++i)
            z[i] = standard_normal_at(seed, 0x63686f6cULL, static_cast<std::uint64_t>(k),
                                      static_cast<std::uint64_t>(i));
        out.values.col(k) = L * z;
    }
    return out;
}

namespace {

// Refined (half-spacing) noise lattice along one axis over [-window, u_max].
struct AxisLattice {
    double origin = 0.0;   // left edge of the lattice
    double sub = 0.0;      // refined cell width = spacing / 2
    double parent = 0.0;   // parent cell width
    long n_sub = 0;
};

AxisLattice make_lattice(double window, double u_max, double spacing) {
    AxisLattice ax;
    ax.origin = -window;
    ax.parent = spacing;
    ax.sub = 0.5 * spacing;
    const long n_parent = static_cast<long>(std::ceil((u_max + window) / spacing));
    ax.n_sub = 2 * std::max<long>(1, n_parent);
    return ax;
}

// Weight of one refined cell for the kernel with time coordinate t and
// exponent h: midpoint of the parent cell away from the singular points of
// the kernel, midpoint of the refined cell next to them.
double subcell_weight(const AxisLattice& ax, double t, double h, long m) {
    const long parent = m / 2;
    const double e0 = ax.origin + static_cast<double>(parent) * ax.parent;
    const double e1 = e0 + ax.parent;
    const bool near_zero = (0.0 >= e0 - ax.parent && 0.0 <= e1 + ax.parent);
    const bool near_t = (t >= e0 - ax.parent && t <= e1 + ax.parent);
    const KernelSpec spec = KernelSpec::moving_average(t, h);
    double u;
    if (near_zero || near_t) {
        u = ax.origin + (static_cast<double>(m) + 0.5) * ax.sub;
    } else {
        u = 0.5 * (e0 + e1);
    }
    double w = kernel_eval(spec, u);
    if (!std::isfinite(w)) w = kernel_eval(spec, u - 1e-6 * ax.sub);
    return w;
}

struct WhitenoiseOperator {
    const HurstFunctional* h = nullptr;
    Grid grid;
    NoiseSpec spec;
    std::vector<AxisLattice> lattice;     // per axis
    std::vector<Eigen::MatrixXd> axis_w;  // separable: per-axis (count_l x n_sub_l)
    bool separable = false;
    double v_sub = 0.0;  // refined cell volume

    long total_subcells() const {
        long m = 1;
        for (const auto& ax : lattice) m *= ax.n_sub;
        return m;
    }
};

WhitenoiseOperator build_whitenoise(const HurstFunctional& h, const Grid& grid, const NoiseSpec& spec) {
    const int n_dims = h.ndim();
    if (grid.ndim() != n_dims) throw ArgumentError("sample_whitenoise: grid dimension mismatch");
    if (!(spec.spacing > 0.0)) throw ArgumentError("sample_whitenoise: noise spacing must be positive");
    const double u_max = grid.hi.maxCoeff();
    if (!(spec.window >= u_max + 1.0))
        throw ArgumentError("sample_whitenoise: window must reach max grid coordinate + 1");

    const double tail = whitenoise_tail_relative_bound(h, grid, spec.window);
    if (tail > 1e-3)
        throw ConfigurationError("sample_whitenoise: window too small, relative kernel tail bound " +
                                 std::to_string(tail));

    WhitenoiseOperator op;
    op.h = &h;
    op.grid = grid;
    op.spec = spec;
    op.separable = h.separable();
    op.v_sub = 1.0;
    for (int l = 0; l < n_dims; ++l) {
        op.lattice.push_back(make_lattice(spec.window, u_max, spec.spacing));
        op.v_sub *= op.lattice.back().sub;
    }

    if (op.separable) {
        op.axis_w.resize(static_cast<size_t>(n_dims));
        for (int l = 0; l < n_dims; ++l) {
            const AxisLattice& ax = op.lattice[static_cast<size_t>(l)];
            Eigen::MatrixXd W(grid.counts[l], ax.n_sub);
            Eigen::VectorXd probe = grid.lo;  // H_l depends only on t_l here
            for (int r = 0; r < grid.counts[l]; ++r) {
                const double t = grid.counts[l] > 1
                                     ? grid.lo[l] + (grid.hi[l] - grid.lo[l]) * r / (grid.counts[l] - 1.0)
                                     : grid.lo[l];
                probe[l] = t;
                const double hl = h(probe)[l];
                for (long m = 0; m < ax.n_sub; ++m) W(r, m) = subcell_weight(ax, t, hl, m);
            }
            op.axis_w[static_cast<size_t>(l)] = std::move(W);
        }
    }
    return op;
}

Eigen::VectorXd whitenoise_component(const WhitenoiseOperator& op, std::uint64_t seed, int component) {
    const int n_dims = op.grid.ndim();
    const double sv = std::sqrt(op.v_sub);
    const std::uint64_t tagp = 0x776e6f69ULL;

    if (op.separable && n_dims == 1) {
        const auto& W = op.axis_w[0];
        Eigen::VectorXd z(W.cols());
        for (long m = 0; m < W.cols(); ++m)
            z[m] = standard_normal_at(seed, tagp, static_cast<std::uint64_t>(component),
                                      static_cast<std::uint64_t>(m));
        return W * (sv * z);
    }
    if (op.separable && n_dims == 2) {
        const auto& W1 = op.axis_w[0];
        const auto& W2 = op.axis_w[1];
        const long m1 = W1.cols(), m2 = W2.cols();
        // Stream the noise matrix column by column: T = W1 * Z, field = T * W2^T.
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(W1.rows(), m2);
        Eigen::VectorXd col(m1);
        for (long c = 0; c < m2; ++c) {
            for (long r = 0; r < m1; ++r)
                col[r] = standard_normal_at(seed, tagp, static_cast<std::uint64_t>(component),
                                            static_cast<std::uint64_t>(r * m2 + c));
            T.col(c) = W1 * col;
        }
        Eigen::MatrixXd F = T * W2.transpose();  // (g1 x g2)
        Eigen::VectorXd out(op.grid.n_points());
        const long g2 = W2.rows();
        for (long i = 0; i < W1.rows(); ++i)
            for (long j = 0; j < g2; ++j) out[i * g2 + j] = sv * F(i, j);
        return out;
    }
    if (op.separable) {
        // General-N sequential contraction on a materialized noise tensor.
        const long m_total = op.total_subcells();
        if (m_total > 40'000'000)
            throw ConfigurationError("sample_whitenoise: noise tensor too large for N >= 3; widen spacing");
        std::vector<double> buf(static_cast<size_t>(m_total));
        for (long m = 0; m < m_total; ++m)
            buf[static_cast<size_t>(m)] = standard_normal_at(seed, tagp, static_cast<std::uint64_t>(component),
                                                             static_cast<std::uint64_t>(m));
        // Repeatedly contract the leading axis and move the result axis to the
        // back, so the final layout matches the grid's row-major order.
        std::vector<long> shape(static_cast<size_t>(n_dims));
        for (int l = 0; l < n_dims; ++l) shape[static_cast<size_t>(l)] = op.lattice[static_cast<size_t>(l)].n_sub;
        std::vector<double> next;
        for (int l = 0; l < n_dims; ++l) {
            const auto& W = op.axis_w[static_cast<size_t>(l)];
            const long s0 = shape[0];
            long rest = 1;
            for (size_t i = 1; i < shape.size(); ++i) rest *= shape[i];
            next.assign(static_cast<size_t>(rest * W.rows()), 0.0);
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> din(
                buf.data(), s0, rest);
            Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> dout(
                next.data(), rest, W.rows());
            dout = (W * din).transpose();
            buf.swap(next);
            shape.erase(shape.begin());
            shape.push_back(W.rows());
        }
        Eigen::VectorXd out(op.grid.n_points());
        for (long i = 0; i < op.grid.n_points(); ++i) out[i] = sv * buf[static_cast<size_t>(i)];
        return out;
    }

    // Non-separable: per-point axis weights, one streaming pass over subcells.
    const long n_pts = op.grid.n_points();
    const long m_total = op.total_subcells();
    if (static_cast<double>(n_pts) * static_cast<double>(m_total) > 4e9)
        throw ConfigurationError(
            "sample_whitenoise: non-separable Hurst functional too expensive at this resolution");
    std::vector<std::vector<Eigen::VectorXd>> w_pt(static_cast<size_t>(n_pts));
    for (long p = 0; p < n_pts; ++p) {
        const Eigen::VectorXd t = op.grid.point(p);
        const Eigen::VectorXd hv = (*op.h)(t);
        auto& per_axis = w_pt[static_cast<size_t>(p)];
        per_axis.resize(static_cast<size_t>(n_dims));
        for (int l = 0; l < n_dims; ++l) {
            const AxisLattice& ax = op.lattice[static_cast<size_t>(l)];
            Eigen::VectorXd w(ax.n_sub);
            for (long m = 0; m < ax.n_sub; ++m) w[m] = subcell_weight(ax, t[l], hv[l], m);
            per_axis[static_cast<size_t>(l)] = std::move(w);
        }
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_pts);
    std::vector<long> midx(static_cast<size_t>(n_dims), 0);
    for (long m = 0; m < m_total; ++m) {
        long rem = m;
        for (int l = n_dims - 1; l >= 0; --l) {
            midx[static_cast<size_t>(l)] = rem % op.lattice[static_cast<size_t>(l)].n_sub;
            rem /= op.lattice[static_cast<size_t>(l)].n_sub;
        }
        const double dz = sv * standard_normal_at(seed, tagp, static_cast<std::uint64_t>(component),
                                                  static_cast<std::uint64_t>(m));
        if (dz == 0.0) continue;
        for (long p = 0; p < n_pts; ++p) {
            double w = 1.0;
            for (int l = 0; l < n_dims; ++l)
                w *= w_pt[static_cast<size_t>(p)][static_cast<size_t>(l)][midx[static_cast<size_t>(l)]];
            out[p] += w * dz;
        }
    }
    return out;
}

}  // namespace

FieldSample sample_whitenoise(const HurstFunctional& h, const Grid& grid, int d, std::uint64_t seed,
                              const NoiseSpec& spec) {
    if (d < 1) throw ArgumentError("sample_whitenoise: d must be >= 1");
    WhitenoiseOperator op = build_whitenoise(h, grid, spec);
    FieldSample out;
    out.grid = grid;
    out.d = d;
    out.seed = seed;
    out.tag = SamplerTag::WhiteNoise;
    out.noise = spec;
    out.values.resize(grid.n_points(), d);
    for (int k = 0; k < d; ++k) out.values.col(k) = whitenoise_component(op, seed, k);
    return out;
}

Eigen::MatrixXd whitenoise_implied_covariance(const HurstFunctional& h, const Grid& grid,
                                              const NoiseSpec& spec) {
    WhitenoiseOperator op = build_whitenoise(h, grid, spec);
    const long n = grid.n_points();
    if (op.separable) {
        // Gram factorizes over axes: entry = v_sub * prod_l (W_l W_l^T) at the
        // per-axis indices of the two points.
        std::vector<Eigen::MatrixXd> grams;
        grams.reserve(op.axis_w.size());
        for (const auto& W : op.axis_w) grams.push_back(W * W.transpose());
        Eigen::MatrixXd C(n, n);
        for (long i = 0; i < n; ++i) {
            const Eigen::VectorXi mi = grid.multi_index(i);
            for (long j = i; j < n; ++j) {
                const Eigen::VectorXi mj = grid.multi_index(j);
                double v = op.v_sub;
                for (int l = 0; l < grid.ndim(); ++l) v *= grams[static_cast<size_t>(l)](mi[l], mj[l]);
                C(i, j) = v;
                C(j, i) = v;
            }
        }
        return C;
    }
    if (n > 512) throw ConfigurationError("whitenoise_implied_covariance: too many points for the non-separable path");
    const long m_total = op.total_subcells();
    Eigen::MatrixXd Wfull(n, m_total);
    for (long p = 0; p < n; ++p) {
        const Eigen::VectorXd t = grid.point(p);
        const Eigen::VectorXd hv = h(t);
        std::vector<Eigen::VectorXd> per_axis(static_cast<size_t>(grid.ndim()));
        for (int l = 0; l < grid.ndim(); ++l) {
            const AxisLattice& ax = op.lattice[static_cast<size_t>(l)];
            Eigen::VectorXd w(ax.n_sub);
            for (long m = 0; m < ax.n_sub; ++m) w[m] = subcell_weight(ax, t[l], hv[l], m);
            per_axis[static_cast<size_t>(l)] = std::move(w);
        }
        for (long m = 0; m < m_total; ++m) {
            long rem = m;
            double w = 1.0;
            for (int l = grid.ndim() - 1; l >= 0; --l) {
                const long k = rem % op.lattice[static_cast<size_t>(l)].n_sub;
                rem /= op.lattice[static_cast<size_t>(l)].n_sub;
                w *= per_axis[static_cast<size_t>(l)][k];
            }
            Wfull(p, m) = w;
        }
    }
    return op.v_sub * (Wfull * Wfull.transpose());
}

double whitenoise_tail_relative_bound(const HurstFunctional& h, const Grid& grid, double window) {
    // Variance mass of one axis factor beyond -window, bounded through the
    // mean-value estimate with a factor-2 safety, relative to the axis
    // variance, and maximized over the envelope corners.
    double worst = 0.0;
    for (int l = 0; l < grid.ndim(); ++l) {
        const double t = grid.hi[l];
        for (double hh : {h.alpha(), h.upper_bounds()[l]}) {
            const double c = std::abs(hh - 0.5) * t;
            if (c == 0.0) continue;
            const double tail = 2.0 * c * c * std::pow(window, 2.0 * hh - 2.0) / (2.0 - 2.0 * hh);
            const double var = fbm_normalization(hh) * std::pow(t, 2.0 * hh);
            worst = std::max(worst, tail / var);
        }
    }
    return worst;
}

std::vector<FieldSample> sample_cholesky_ensemble(const HurstFunctional& h, const Grid& grid, int d,
                                                  std::uint64_t seed, int replicates, double tol,
                                                  long cap) {
    if (replicates < 1) throw ArgumentError("ensemble: need at least one replicate");
    const long n = grid.n_points();
    if (n > cap)
        throw ArgumentError("sample_cholesky_ensemble: grid exceeds the exact-sampler cap; use white noise");
    CovarianceMatrix C = covariance_b(h, grid.points(), tol);
    double jitter = 0.0;
    Eigen::MatrixXd L = psd_cholesky(C.entries, &jitter);

    std::vector<FieldSample> out(static_cast<size_t>(replicates));
    parallel_for(replicates, [&](std::int64_t r) {
        const std::uint64_t rs = derive_seed(seed, static_cast<std::uint64_t>(r));
        FieldSample fs;
        fs.grid = grid;
        fs.d = d;
        fs.seed = rs;
        fs.tag = SamplerTag::Cholesky;
        fs.values.resize(n, d);
        for (int k = 0; k < d; ++k) {
            Eigen::VectorXd z(n);
            for (long i = 0; i < n; ++i)
                z[i] = standard_normal_at(rs, 0x63686f6cULL, static_cast<std::uint64_t>(k),
                                          static_cast<std::uint64_t>(i));
            fs.values.col(k) = L * z;
        }
        out[static_cast<size_t>(r)] = std::move(fs);
    });
    return out;
}

std::vector<FieldSample> sample_whitenoise_ensemble(const HurstFunctional& h, const Grid& grid, int d,
                                                    std::uint64_t seed, int replicates,
                                                    const NoiseSpec& spec) {
    if (replicates < 1) throw ArgumentError("ensemble: need at least one replicate");
    WhitenoiseOperator op = build_whitenoise(h, grid, spec);
    std::vector<FieldSample> out(static_cast<size_t>(replicates));
    parallel_for(replicates, [&](std::int64_t r) {
        const std::uint64_t rs = derive_seed(seed, static_cast<std::uint64_t>(r));
        FieldSample fs;
        fs.grid = grid;
        fs.d = d;
        fs.seed = rs;
        fs.tag = SamplerTag::WhiteNoise;
        fs.noise = spec;
        fs.values.resize(grid.n_points(), d);
        for (int k = 0; k < d; ++k) fs.values.col(k) = whitenoise_component(op, rs, k);
        out[static_cast<size_t>(r)] = std::move(fs);
    });
    return out;
}

EnsembleCovariance empirical_covariance(const std::vector<FieldSample>& ensemble, int component,
                                        int min_replicates) {
    const int m = static_cast<int>(ensemble.size());
    if (m < min_replicates)
        throw ArgumentError("empirical_covariance: need at least " + std::to_string(min_replicates) +
                            " replicates");
    const Grid& g0 = ensemble.front().grid;
    const long n = g0.n_points();
    for (const auto& f : ensemble) {
        if (!f.grid.same_layout(g0)) throw ArgumentError("empirical_covariance: mismatched grids");
        if (component < 0 || component >= f.d) throw ArgumentError("empirical_covariance: bad component");
    }
    Eigen::MatrixXd X(m, n);
    for (int r = 0; r < m; ++r) X.row(r) = ensemble[static_cast<size_t>(r)].values.col(component);
    const Eigen::RowVectorXd mean = X.colwise().mean();
    X.rowwise() -= mean;
    EnsembleCovariance out;
    out.replicates = m;
    out.cov = (X.transpose() * X) / static_cast<double>(m - 1);
    out.se.resize(n, n);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j)
            out.se(i, j) = std::sqrt((out.cov(i, i) * out.cov(j, j) + out.cov(i, j) * out.cov(i, j)) /
                                     static_cast<double>(m - 1));
    return out;
}

}  // namespace mfbs
