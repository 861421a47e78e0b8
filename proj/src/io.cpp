#include "mfbs/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mfbs/errors.hpp"

namespace mfbs {

namespace {

void put_bytes(std::string& buf, const void* p, size_t n) {
    buf.append(static_cast<const char*>(p), n);
}

void put_u16(std::string& buf, std::uint16_t v) {
    char b[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
    put_bytes(buf, b, 2);
}

void put_u32(std::string& buf, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    put_bytes(buf, b, 4);
}

void put_u64(std::string& buf, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    put_bytes(buf, b, 8);
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}

struct Reader {
    const std::string& data;
    size_t pos = 0;
    const std::string& path;

    void need(size_t n) const {
        if (pos + n > data.size())
            throw FormatError(path + ": truncated file, expected at least " + std::to_string(pos + n) +
                              " bytes but have " + std::to_string(data.size()));
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint8_t>(data[pos]) |
                          (static_cast<std::uint16_t>(static_cast<std::uint8_t>(data[pos + 1])) << 8);
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(data[pos + i]);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(data[pos + i]);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data[pos++]);
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open for reading");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

void spill(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path + ": cannot open for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw FormatError(path + ": write failed");
}

std::string serialize_header(const FieldSample& field) {
    std::string buf;
    put_bytes(buf, kFieldMagic, 5);
    put_u16(buf, kFieldVersion);
    put_u16(buf, static_cast<std::uint16_t>(field.grid.ndim()));
    put_u16(buf, static_cast<std::uint16_t>(field.d));
    for (int l = 0; l < field.grid.ndim(); ++l)
        put_u32(buf, static_cast<std::uint32_t>(field.grid.counts[l]));
    for (int l = 0; l < field.grid.ndim(); ++l) {
        put_f64(buf, field.grid.lo[l]);
        put_f64(buf, field.grid.hi[l]);
    }
    put_u64(buf, field.seed);
    buf.push_back(static_cast<char>(field.tag));
    return buf;
}

}  // namespace

void write_field(const std::string& path, const FieldSample& field) {
    std::string buf = serialize_header(field);
    const long n = field.grid.n_points();
    buf.reserve(buf.size() + static_cast<size_t>(n) * static_cast<size_t>(field.d) * 8);
    for (long i = 0; i < n; ++i)
        for (int c = 0; c < field.d; ++c) put_f64(buf, field.values(i, c));
    spill(path, buf);
}

namespace {

FieldFileInfo parse_header(Reader& r) {
    r.need(5);
    if (std::memcmp(r.data.data(), kFieldMagic, 5) != 0)
        throw FormatError(r.path + ": bad magic, not a field file");
    r.pos = 5;
    FieldFileInfo info;
    info.version = r.u16();
    if (info.version != kFieldVersion)
        throw FormatError(r.path + ": unsupported version " + std::to_string(info.version));
    info.n_axes = r.u16();
    info.d = r.u16();
    if (info.n_axes < 1 || info.n_axes > 16) throw FormatError(r.path + ": implausible axis count");
    if (info.d < 1) throw FormatError(r.path + ": implausible component count");
    info.counts.resize(info.n_axes);
    for (int l = 0; l < info.n_axes; ++l) info.counts[l] = static_cast<int>(r.u32());
    info.lo.resize(info.n_axes);
    info.hi.resize(info.n_axes);
    for (int l = 0; l < info.n_axes; ++l) {
        info.lo[l] = r.f64();
        info.hi[l] = r.f64();
    }
    info.seed = r.u64();
    info.sampler_tag = r.u8();
    long n = 1;
    for (int l = 0; l < info.n_axes; ++l) n *= info.counts[l];
    info.n_values = n * info.d;
    return info;
}

}  // namespace

FieldSample read_field(const std::string& path) {
    const std::string data = slurp(path);
    Reader r{data, 0, path};
    const FieldFileInfo info = parse_header(r);
    const size_t expect = r.pos + static_cast<size_t>(info.n_values) * 8;
    if (data.size() != expect)
        throw FormatError(path + ": payload length mismatch, expected " + std::to_string(expect) +
                          " bytes total but have " + std::to_string(data.size()));
    FieldSample field;
    field.grid = Grid::regular(info.lo, info.hi, info.counts);
    field.d = info.d;
    field.seed = info.seed;
    field.tag = static_cast<SamplerTag>(info.sampler_tag);
    const long n = field.grid.n_points();
    field.values.resize(n, info.d);
    for (long i = 0; i < n; ++i)
        for (int c = 0; c < info.d; ++c) field.values(i, c) = r.f64();
    return field;
}

FieldFileInfo inspect_field(const std::string& path) {
    const std::string data = slurp(path);
    Reader r{data, 0, path};
    FieldFileInfo info = parse_header(r);
    const size_t expect = r.pos + static_cast<size_t>(info.n_values) * 8;
    if (data.size() != expect)
        throw FormatError(path + ": payload length mismatch, expected " + std::to_string(expect) +
                          " bytes total but have " + std::to_string(data.size()));
    double mn = std::numeric_limits<double>::infinity();
    double mx = -mn, acc = 0.0;
    for (long i = 0; i < info.n_values; ++i) {
        const double v = r.f64();
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        acc += v;
    }
    info.min = mn;
    info.max = mx;
    info.mean = info.n_values > 0 ? acc / info.n_values : 0.0;
    return info;
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    FieldSample wrap;
    Eigen::VectorXd lo(2), hi(2);
    lo << 1.0, 1.0;
    hi << static_cast<double>(m.rows()), static_cast<double>(m.cols());
    Eigen::VectorXi counts(2);
    counts << static_cast<int>(m.rows()), static_cast<int>(m.cols());
    wrap.grid = Grid::regular(lo, hi, counts);
    wrap.d = 1;
    wrap.tag = SamplerTag::External;
    wrap.values.resize(m.size(), 1);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) wrap.values(i * m.cols() + j, 0) = m(i, j);
    write_field(path, wrap);
}

Eigen::MatrixXd read_matrix(const std::string& path) {
    const FieldSample wrap = read_field(path);
    if (wrap.grid.ndim() != 2 || wrap.d != 1) throw FormatError(path + ": not a matrix container");
    Eigen::MatrixXd m(wrap.grid.counts[0], wrap.grid.counts[1]);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = wrap.values(i * m.cols() + j, 0);
    return m;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void Csv::add_row(const std::vector<double>& values) {
    std::vector<std::string> row;
    row.reserve(values.size());
    for (double v : values) row.push_back(format_double(v));
    rows.push_back(std::move(row));
}

void Csv::add_row(std::vector<std::string> values) { rows.push_back(std::move(values)); }

void write_csv(const std::string& path, const Csv& csv) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError(path + ": cannot open for writing");
    for (size_t i = 0; i < csv.header.size(); ++i) {
        if (i) out << ',';
        out << csv.header[i];
    }
    out << '\n';
    for (const auto& row : csv.rows) {
        if (row.size() != csv.header.size())
            throw ArgumentError(path + ": row width does not match the header");
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
}

void write_loglog_svg(const std::string& path, const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const ScalingFit& fit) {
    const int W = 640, H = 480, ML = 70, MR = 20, MT = 40, MB = 55;
    std::vector<double> xs, ys;
    for (Eigen::Index i = 0; i < fit.scales.size(); ++i) {
        if (fit.scales[i] > 0.0 && fit.observed[i] > 0.0) {
            xs.push_back(std::log10(fit.scales[i]));
            ys.push_back(std::log10(fit.observed[i]));
        }
    }
    if (xs.empty()) {
        spill(path, "<svg xmlns='http://www.w3.org/2000/svg' width='10' height='10'/>");
        return;
    }
    double x0 = *std::min_element(xs.begin(), xs.end());
    double x1 = *std::max_element(xs.begin(), xs.end());
    double y0 = *std::min_element(ys.begin(), ys.end());
    double y1 = *std::max_element(ys.begin(), ys.end());
    const double padx = std::max(0.05, 0.08 * (x1 - x0));
    const double pady = std::max(0.05, 0.08 * (y1 - y0));
    x0 -= padx;
    x1 += padx;
    y0 -= pady;
    y1 += pady;
    auto px = [&](double x) { return ML + (x - x0) / (x1 - x0) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - y0) / (y1 - y0) * (H - MT - MB); };

    std::string s;
    s += "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(W) + "' height='" +
         std::to_string(H) + "' font-family='monospace' font-size='12'>\n";
    s += "<rect width='100%' height='100%' fill='white'/>\n";
    s += "<rect x='" + std::to_string(ML) + "' y='" + std::to_string(MT) + "' width='" +
         std::to_string(W - ML - MR) + "' height='" + std::to_string(H - MT - MB) +
         "' fill='none' stroke='black'/>\n";
    s += "<text x='" + std::to_string(W / 2) + "' y='20' text-anchor='middle'>" + title + "</text>\n";
    s += "<text x='" + std::to_string(W / 2) + "' y='" + std::to_string(H - 12) +
         "' text-anchor='middle'>log10 " + xlabel + "</text>\n";
    s += "<text x='16' y='" + std::to_string(H / 2) + "' text-anchor='middle' transform='rotate(-90 16 " +
         std::to_string(H / 2) + ")'>log10 " + ylabel + "</text>\n";

    // Fitted line in natural-log space: log y = intercept + slope log x.
    const double lnx0 = x0 * std::log(10.0), lnx1 = x1 * std::log(10.0);
    const double fy0 = (fit.intercept + fit.slope * lnx0) / std::log(10.0);
    const double fy1 = (fit.intercept + fit.slope * lnx1) / std::log(10.0);
    s += "<line x1='" + format_double(px(x0)) + "' y1='" + format_double(py(fy0)) + "' x2='" +
         format_double(px(x1)) + "' y2='" + format_double(py(fy1)) + "' stroke='steelblue'/>\n";
    for (size_t i = 0; i < xs.size(); ++i)
        s += "<circle cx='" + format_double(px(xs[i])) + "' cy='" + format_double(py(ys[i])) +
             "' r='4' fill='crimson'/>\n";
    char info[160];
    std::snprintf(info, sizeof(info), "slope %.4f (ci %.4f), theoretical %.4f, r2 %.4f", fit.slope,
                  fit.ci_halfwidth, fit.theoretical_exponent, fit.r2);
    s += "<text x='" + std::to_string(ML + 8) + "' y='" + std::to_string(MT + 16) + "'>" + info +
         "</text>\n</svg>\n";
    spill(path, s);
}

void write_scatter_svg(const std::string& path, const std::string& title, const std::string& xlabel,
                       const std::string& ylabel, const Eigen::VectorXd& xs, const Eigen::VectorXd& ys) {
    const int W = 640, H = 480, ML = 70, MR = 20, MT = 40, MB = 55;
    if (xs.size() == 0 || xs.size() != ys.size()) {
        spill(path, "<svg xmlns='http://www.w3.org/2000/svg' width='10' height='10'/>");
        return;
    }
    double x0 = xs.minCoeff(), x1 = xs.maxCoeff();
    double y0 = ys.minCoeff(), y1 = ys.maxCoeff();
    const double padx = std::max(1e-6, 0.08 * (x1 - x0));
    const double pady = std::max(1e-6, 0.08 * (y1 - y0));
    x0 -= padx;
    x1 += padx;
    y0 -= pady;
    y1 += pady;
    auto px = [&](double x) { return ML + (x - x0) / (x1 - x0) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - y0) / (y1 - y0) * (H - MT - MB); };
    std::string s;
    s += "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(W) + "' height='" +
         std::to_string(H) + "' font-family='monospace' font-size='12'>\n";
    s += "<rect width='100%' height='100%' fill='white'/>\n";
    s += "<rect x='" + std::to_string(ML) + "' y='" + std::to_string(MT) + "' width='" +
         std::to_string(W - ML - MR) + "' height='" + std::to_string(H - MT - MB) +
         "' fill='none' stroke='black'/>\n";
    s += "<text x='" + std::to_string(W / 2) + "' y='20' text-anchor='middle'>" + title + "</text>\n";
    s += "<text x='" + std::to_string(W / 2) + "' y='" + std::to_string(H - 12) +
         "' text-anchor='middle'>" + xlabel + "</text>\n";
    s += "<text x='16' y='" + std::to_string(H / 2) + "' text-anchor='middle' transform='rotate(-90 16 " +
         std::to_string(H / 2) + ")'>" + ylabel + "</text>\n";
    for (Eigen::Index i = 0; i < xs.size(); ++i)
        s += "<circle cx='" + format_double(px(xs[i])) + "' cy='" + format_double(py(ys[i])) +
             "' r='4' fill='crimson'/>\n";
    s += "</svg>\n";
    spill(path, s);
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw FormatError(path + ": cannot create directory: " + ec.message());
}

}  // namespace mfbs
