#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mfbs/gaussian.hpp"
#include "mfbs/hurst.hpp"

namespace mfbs {

/// Regular rectangular grid in (0,inf)^N. Points flatten row-major with the
/// last axis fastest.
struct Grid {
    Eigen::VectorXd lo, hi;
    Eigen::VectorXi counts;

    static Grid regular(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                        const Eigen::VectorXi& counts);

    int ndim() const { return static_cast<int>(counts.size()); }
    long n_points() const;
    Eigen::VectorXd spacing() const;
    double cell_volume() const;
    Eigen::VectorXi multi_index(long flat) const;
    long flat_index(const Eigen::VectorXi& multi) const;
    Eigen::VectorXd point(long flat) const;
    Eigen::MatrixXd points() const;

    bool same_layout(const Grid& other) const;
};

enum class SamplerTag : std::uint8_t { Cholesky = 0, WhiteNoise = 1, External = 2 };

struct NoiseSpec {
    double spacing = 0.0;  // noise cell side before the one-level refinement
    double window = 0.0;   // lattice extends over [-window, max(hi)] per axis
};

/// One sample path of the d-component field on a grid.
struct FieldSample {
    Grid grid;
    int d = 1;
    Eigen::MatrixXd values;  // n_points x d
    std::uint64_t seed = 0;
    SamplerTag tag = SamplerTag::External;
    NoiseSpec noise;  // zeroed for the exact sampler
};

/// Exact sampling through the Cholesky factor of the covariance on the grid
/// points. Deterministic per (h, grid, d, seed). Grids beyond the cap are
/// rejected with a pointer to the white-noise sampler.
FieldSample sample_cholesky(const HurstFunctional& h, const Grid& grid, int d, std::uint64_t seed,
                            double tol = 1e-8, long cap = 4096);

/// Direct discretization of the defining moving-average integral on a noise
/// lattice: midpoint weights, with one refinement level next to the kernel's
/// singular points (the noise is carried at the refined resolution throughout
/// so every evaluation sees one consistent realization). When each H_l
/// depends only on t_l the weight tensor factorizes and the field is computed
/// by sequential axis contractions.
FieldSample sample_whitenoise(const HurstFunctional& h, const Grid& grid, int d, std::uint64_t seed,
                              const NoiseSpec& spec);

/// The exact covariance of the discretized sampler (weight Gram matrix).
/// Feasible at desk scale; used to bound the discretization bias.
Eigen::MatrixXd whitenoise_implied_covariance(const HurstFunctional& h, const Grid& grid,
                                              const NoiseSpec& spec);

/// Conservative bound on the variance mass lost beyond the lattice window,
/// relative to the field variance, maximized over grid points and axes.
double whitenoise_tail_relative_bound(const HurstFunctional& h, const Grid& grid, double window);

std::vector<FieldSample> sample_cholesky_ensemble(const HurstFunctional& h, const Grid& grid, int d,
                                                  std::uint64_t seed, int replicates, double tol = 1e-8,
                                                  long cap = 4096);

std::vector<FieldSample> sample_whitenoise_ensemble(const HurstFunctional& h, const Grid& grid, int d,
                                                    std::uint64_t seed, int replicates,
                                                    const NoiseSpec& spec);

struct EnsembleCovariance {
    Eigen::MatrixXd cov;  // unbiased sample covariance over replicates
    Eigen::MatrixXd se;   // per-entry Monte Carlo standard error
    int replicates = 0;
};

/// Sample covariance of one component over an ensemble sharing a grid.
EnsembleCovariance empirical_covariance(const std::vector<FieldSample>& ensemble, int component,
                                        int min_replicates = 100);

}  // namespace mfbs
