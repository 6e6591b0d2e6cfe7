#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

// Globally adaptive 7-point Gauss / 15-point Kronrod integration.
namespace superatom::quadrature {

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 1e-15;
    int max_subdivisions = 2000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    int subdivisions = 0;
    bool converged = false;
};

class NonConvergence : public std::runtime_error {
public:
    explicit NonConvergence(const Result& r)
        : std::runtime_error("adaptive quadrature did not converge (value " + std::to_string(r.value) +
                             ", error estimate " + std::to_string(r.error) + ")"),
          result(r) {}
    Result result;
};

namespace detail {

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

// Kronrod nodes (positive half), Kronrod weights, Gauss weights on the odd nodes.
inline constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                  0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                  0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                  0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                  0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                  0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                  0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                 0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
Segment gauss_kronrod15(const F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * wgk[7];
    double gauss = fc * wg[3];
    double fv[15];
    fv[7] = fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * xgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        kronrod += wgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += wg[j / 2] * (f1 + f2);
    }
    const double mean = 0.5 * kronrod;
    double asc = wgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j) asc += wgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
    asc *= std::abs(half);

    double err = std::abs((kronrod - gauss) * half);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    return {a, b, kronrod * half, err};
}

}  // namespace detail

/// Integrates f over [a, b]. Never throws on non-convergence; inspect
/// Result::converged.
template <class F>
Result integrate_adaptive(const F& f, double a, double b, const Options& opt = {}) {
    Result res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    std::vector<detail::Segment> heap{detail::gauss_kronrod15(f, a, b)};
    res.evaluations = 15;
    double total = heap.front().value;
    double total_err = heap.front().error;
    auto done = [&] { return total_err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total)); };

    while (!done() && res.subdivisions < opt.max_subdivisions) {
        const auto worst = heap.front();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= std::min(worst.a, worst.b) || mid >= std::max(worst.a, worst.b))
            break;  // interval can no longer be split in double precision
        std::pop_heap(heap.begin(), heap.end());
        heap.pop_back();
        heap.push_back(detail::gauss_kronrod15(f, worst.a, mid));
        std::push_heap(heap.begin(), heap.end());
        heap.push_back(detail::gauss_kronrod15(f, mid, worst.b));
        std::push_heap(heap.begin(), heap.end());
        res.evaluations += 30;
        ++res.subdivisions;
        // Resum instead of updating incrementally, so rounding never accumulates.
        total = 0.0;
        total_err = 0.0;
        for (const auto& s : heap) {
            total += s.value;
            total_err += s.error;
        }
    }
    res.value = total;
    res.error = total_err;
    res.converged = done();
    return res;
}

/// Like integrate_adaptive, but throws NonConvergence instead of returning an
/// unconverged estimate.
template <class F>
double integrate(const F& f, double a, double b, const Options& opt = {}) {
    const auto r = integrate_adaptive(f, a, b, opt);
    if (!r.converged) throw NonConvergence(r);
    return r.value;
}

}  // namespace superatom::quadrature
