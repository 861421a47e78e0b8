#include "mfbs/quadrature.hpp"

#include <algorithm>
#include <vector>

#include "mfbs/errors.hpp"

namespace mfbs {

namespace {

// Kronrod-15 abscissae with Gauss-7 and Kronrod-15 weights, as
// {x, gauss_weight, kronrod_weight}; gauss_weight = 0 on Kronrod-only nodes.
constexpr double kNodes[8][3] = {
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
};

struct Panel {
    double a, b, value, error;
};

void gk15(const std::function<double(double)>& f, double a, double b, double& value, double& error) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double y0 = f(mid);
    double g7 = kNodes[0][1] * y0;
    double k15 = kNodes[0][2] * y0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kNodes[i][0];
        const double yi = f(mid + dx) + f(mid - dx);
        g7 += kNodes[i][1] * yi;
        k15 += kNodes[i][2] * yi;
    }
    value = k15 * half;
    error = std::abs((k15 - g7) * half);
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double tol, const QuadratureOptions& opts) {
    QuadratureResult res;
    if (a == b) return res;
    std::vector<Panel> panels;
    panels.reserve(64);
    Panel p0;
    p0.a = a;
    p0.b = b;
    gk15(f, a, b, p0.value, p0.error);
    res.n_evals += 15;
    panels.push_back(p0);

    for (;;) {
        double total_err = 0.0;
        size_t worst = 0;
        for (size_t i = 0; i < panels.size(); ++i) {
            total_err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        if (total_err <= tol) break;
        if (static_cast<int>(panels.size()) >= opts.max_panels) {
            const Panel& w = panels[worst];
            throw QuadratureError("adaptive quadrature did not converge: error " +
                                      std::to_string(total_err) + " > tol " + std::to_string(tol) +
                                      " after " + std::to_string(panels.size()) + " panels",
                                  w.a, w.b, w.error);
        }
        Panel w = panels[worst];
        const double mid = 0.5 * (w.a + w.b);
        if (!(mid > w.a && mid < w.b)) {
            // Interval collapsed to machine precision; accept its estimate.
            panels[worst].error = 0.0;
            continue;
        }
        Panel left, right;
        left.a = w.a;
        left.b = mid;
        right.a = mid;
        right.b = w.b;
        gk15(f, left.a, left.b, left.value, left.error);
        gk15(f, right.a, right.b, right.value, right.error);
        res.n_evals += 30;
        panels[worst] = left;
        panels.push_back(right);
    }

    // Fixed summation order (by left endpoint) with compensation, so the
    // result is independent of the refinement history.
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    double sum = 0.0, comp = 0.0, err = 0.0;
    for (const Panel& p : panels) {
        double y = p.value - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        err += p.error;
    }
    res.value = sum;
    res.abs_error_estimate = err;
    return res;
}

QuadratureResult integrate_right_singular(const std::function<double(double)>& f, double a, double b,
                                          double mu, double tol, const QuadratureOptions& opts) {
    if (!(mu > -1.0))
        throw ArgumentError("integrate_right_singular: exponent must be > -1 for integrability");
    if (mu >= 0.0) return integrate_adaptive(f, a, b, tol, opts);
    const double p = mu + 1.0;  // in (0,1)
    const double span = b - a;
    if (span <= 0.0) return {};
    const double wmax = std::pow(span, p);
    auto g = [&](double w) {
        const double shift = std::pow(w, 1.0 / p);
        const double u = b - shift;
        // (b-u)^mu * smooth stays bounded after the change of variables.
        return f(u) * shift / (p * w);
    };
    // g(w) = f(b - w^{1/p}) * (1/p) * w^{1/p - 1}; the rewrite above avoids
    // evaluating w^{1/p-1} directly for tiny w.
    return integrate_adaptive(g, 0.0, wmax, tol, opts);
}

QuadratureResult integrate_log_tail(const std::function<double(double)>& f, double lo, double hi,
                                    double tol, const QuadratureOptions& opts) {
    if (!(hi < 0.0) || !(lo < hi)) throw ArgumentError("integrate_log_tail: need lo < hi < 0");
    const double t0 = -hi;
    const double smax = std::log(-lo / t0);
    auto g = [&](double s) {
        const double u = -t0 * std::exp(s);
        return f(u) * t0 * std::exp(s);
    };
    return integrate_adaptive(g, 0.0, smax, tol, opts);
}

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int order) {
    // Nodes/weights on [0,1] would need storage per order; generate on [-1,1]
    // via Newton iteration on Legendre polynomials, cached per order.
    static thread_local std::vector<std::pair<int, std::vector<std::pair<double, double>>>> cache;
    const std::vector<std::pair<double, double>>* nw = nullptr;
    for (const auto& c : cache)
        if (c.first == order) nw = &c.second;
    if (!nw) {
        std::vector<std::pair<double, double>> table;
        const int n = order;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (x * p0 - p1) / (x * x - 1.0);
                double dx = p0 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            double w = 2.0 / ((1.0 - x * x) * pp * pp);
            table.emplace_back(x, w);
            if (x != 0.0) table.emplace_back(-x, w);
        }
        cache.emplace_back(order, std::move(table));
        nw = &cache.back().second;
    }
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (const auto& [x, w] : *nw) acc += w * f(mid + half * x);
    return acc * half;
}

}  // namespace mfbs
