#pragma once

#include <string>
#include <vector>

#include "mfbs/scaling.hpp"
#include "mfbs/simulate.hpp"

namespace mfbs {

// Binary field format: magic "MFBS1", then little-endian
//   u16 version, u16 N, u16 d,
//   u32 count per axis (N),
//   f64 lo, f64 hi per axis (interleaved),
//   u64 seed, u8 sampler tag,
// then the payload: n_points * d float64 values, row-major (component fastest).
inline constexpr char kFieldMagic[5] = {'M', 'F', 'B', 'S', '1'};
inline constexpr std::uint16_t kFieldVersion = 1;

void write_field(const std::string& path, const FieldSample& field);
FieldSample read_field(const std::string& path);

struct FieldFileInfo {
    std::uint16_t version = 0;
    int n_axes = 0;
    int d = 0;
    Eigen::VectorXi counts;
    Eigen::VectorXd lo, hi;
    std::uint64_t seed = 0;
    std::uint8_t sampler_tag = 0;
    long n_values = 0;
    double min = 0.0, max = 0.0, mean = 0.0;
};

FieldFileInfo inspect_field(const std::string& path);

/// Writes a symmetric matrix in the same container (N = 2 header layout).
void write_matrix(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(const std::string& path);

/// CSV with a mandatory header row; numeric cells are serialized with
/// round-trip precision.
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(const std::vector<double>& values);
    void add_row(std::vector<std::string> values);
};

void write_csv(const std::string& path, const Csv& csv);
std::string format_double(double v);

/// Log-log scatter with the fitted line; regenerable from the fit's CSV.
void write_loglog_svg(const std::string& path, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const ScalingFit& fit);

/// Plain scatter on linear axes (used for the local dimension map).
void write_scatter_svg(const std::string& path, const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const Eigen::VectorXd& xs, const Eigen::VectorXd& ys);

void ensure_directory(const std::string& path);

}  // namespace mfbs
