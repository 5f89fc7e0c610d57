#include "nopo/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "nopo/errors.hpp"

namespace nopo {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gauss_kronrod15(const std::function<double(double)>& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kronrod = kKronrod[7] * fc;
    double gauss = kGauss[3] * fc;
    double l1 = kKronrod[7] * std::abs(fc);
    for (std::size_t i = 0; i < 7; ++i) {
        const double x = h * kNodes[i];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        kronrod += kKronrod[i] * (f1 + f2);
        l1 += kKronrod[i] * (std::abs(f1) + std::abs(f2));
        if (i % 2 == 1) gauss += kGauss[i / 2] * (f1 + f2);
    }
    Panel p{a, b, h * kronrod, std::abs(h * (kronrod - gauss)), std::abs(h) * l1};
    // Error floor from rounding in the 15 function values.
    p.error = std::max(p.error, 50.0 * std::numeric_limits<double>::epsilon() * p.l1);
    return p;
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, const QuadratureOptions& opts)
{
    std::vector<double> pts{a};
    for (double x : breakpoints) {
        if (x > a && x < b) pts.push_back(x);
    }
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());

    std::priority_queue<Panel> queue;
    double value = 0.0, error = 0.0, l1 = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (!(pts[i + 1] > pts[i])) continue;
        Panel p = gauss_kronrod15(f, pts[i], pts[i + 1]);
        value += p.value;
        error += p.error;
        l1 += p.l1;
        queue.push(p);
    }

    // Global adaptivity: always bisect the panel with the largest error.
    const std::size_t max_panels = std::size_t{1} << std::min(opts.max_depth, 24u);
    while (!queue.empty() && error > opts.rtol * std::max(std::abs(value), 1e-300) && queue.size() < max_panels) {
        const Panel worst = queue.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        queue.pop();
        const Panel left = gauss_kronrod15(f, worst.a, mid);
        const Panel right = gauss_kronrod15(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        l1 += left.l1 + right.l1 - worst.l1;
        queue.push(left);
        queue.push(right);
    }

    if (!std::isfinite(value) || error > opts.fail_rtol * std::max(l1, 1e-300)) {
        throw SolverError("quadrature did not converge (estimated error " + std::to_string(error) + ")", error);
    }
    return {value, error};
}

}  // namespace nopo
