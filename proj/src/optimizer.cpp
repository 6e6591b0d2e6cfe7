#include "superatom/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace superatom::optimize {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Scaled {
    const Objective& f;
    std::span<const Bound> bounds;
    std::span<const double> scales;
    int evaluations = 0;

    std::vector<double> to_x(const std::vector<double>& u) const {
        std::vector<double> x(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            x[i] = std::clamp(u[i] * scales[i], bounds[i].lower, bounds[i].upper);
        return x;
    }
    std::vector<double> project(std::vector<double> u) const {
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = std::clamp(u[i], bounds[i].lower / scales[i], bounds[i].upper / scales[i]);
        return u;
    }
    double operator()(const std::vector<double>& u) {
        ++evaluations;
        const double v = f(to_x(u));
        return std::isfinite(v) ? v : inf;
    }
};

struct Vertex {
    std::vector<double> u;
    double value;
};

// One Nelder-Mead descent from `start`; returns true on convergence.
bool descend(Scaled& obj, Vertex& best, const Options& opt, int& iterations, std::vector<double>& history) {
    const std::size_t n = best.u.size();
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back(best);
    for (std::size_t i = 0; i < n; ++i) {
        auto u = best.u;
        u[i] += opt.initial_step;
        u = obj.project(u);
        if (u[i] == best.u[i]) {  // against the upper bound, step inward
            u[i] -= opt.initial_step;
            u = obj.project(u);
        }
        simplex.push_back({u, obj(u)});
    }

    auto by_value = [](const Vertex& a, const Vertex& b) { return a.value < b.value; };
    while (obj.evaluations < opt.max_evaluations) {
        std::stable_sort(simplex.begin(), simplex.end(), by_value);
        ++iterations;
        history.push_back(simplex.front().value);

        double extent = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                extent = std::max(extent, std::abs(simplex[k].u[i] - simplex[0].u[i]));
        const double spread = simplex.back().value - simplex.front().value;
        const double fscale = std::max(std::abs(simplex.front().value), 1e-300);
        if (extent <= opt.x_tol || (std::isfinite(spread) && spread <= opt.f_tol * fscale && extent <= 1e3 * opt.x_tol)) {
            best = simplex.front();
            return true;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k].u[i] / static_cast<double>(n);
        auto along = [&](double t) {
            std::vector<double> u(n);
            for (std::size_t i = 0; i < n; ++i) u[i] = centroid[i] + t * (simplex[n].u[i] - centroid[i]);
            return obj.project(u);
        };

        Vertex reflected{along(-1.0), 0.0};
        reflected.value = obj(reflected.u);
        if (reflected.value < simplex[0].value) {
            Vertex expanded{along(-2.0), 0.0};
            expanded.value = obj(expanded.u);
            simplex[n] = expanded.value < reflected.value ? expanded : reflected;
            continue;
        }
        if (reflected.value < simplex[n - 1].value) {
            simplex[n] = reflected;
            continue;
        }
        const bool outside = reflected.value < simplex[n].value;
        Vertex contracted{along(outside ? -0.5 : 0.5), 0.0};
        contracted.value = obj(contracted.u);
        if (contracted.value < (outside ? reflected.value : simplex[n].value)) {
            simplex[n] = contracted;
            continue;
        }
        for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t i = 0; i < n; ++i) simplex[k].u[i] = simplex[0].u[i] + 0.5 * (simplex[k].u[i] - simplex[0].u[i]);
            simplex[k].u = obj.project(simplex[k].u);
            simplex[k].value = obj(simplex[k].u);
        }
    }
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    best = simplex.front();
    return false;
}

}  // namespace

Result nelder_mead(const Objective& f, std::vector<double> x0, std::span<const Bound> bounds,
                   std::span<const double> scales, const Options& opt) {
    const std::size_t n = x0.size();
    if (bounds.size() != n || scales.size() != n) throw std::invalid_argument("nelder_mead: dimension mismatch");
    for (double s : scales)
        if (!(s > 0.0)) throw std::invalid_argument("nelder_mead: scales must be > 0");

    Scaled obj{f, bounds, scales};
    Result res;
    std::vector<double> u0(n);
    for (std::size_t i = 0; i < n; ++i) u0[i] = x0[i] / scales[i];
    u0 = obj.project(u0);
    Vertex best{u0, obj(u0)};

    if (n == 0) {
        res.x = {};
        res.value = best.value;
        res.converged = true;
        res.evaluations = obj.evaluations;
        return res;
    }

    bool converged = false;
    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        const double before = best.value;
        converged = descend(obj, best, opt, res.iterations, res.history);
        if (!converged) break;
        const double gain = before - best.value;
        if (restart > 0 && gain <= opt.f_tol * std::max(std::abs(best.value), 1e-300)) break;
    }

    res.x = obj.to_x(best.u);
    res.value = best.value;
    res.evaluations = obj.evaluations;
    res.converged = converged && std::isfinite(best.value);
    return res;
}

namespace {

// Signed step for coordinate i: +h / -h if a one-sided stencil of `reach`
// steps fits, 0 if the central stencil fits.
double step_direction(double x, double h, const Bound& b, int reach, bool& central) {
    central = x - h >= b.lower && x + h <= b.upper;
    if (central) return h;
    if (x + reach * h <= b.upper) return h;
    return -h;
}

}  // namespace

std::vector<double> gradient(const Objective& f, std::span<const double> x, std::span<const Bound> bounds,
                             std::span<const double> scales, double rel_step) {
    std::vector<double> g(x.size(), 0.0);
    std::vector<double> p(x.begin(), x.end());
    const double f0 = f(x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = rel_step * scales[i];
        bool central = false;
        const double s = step_direction(x[i], h, bounds[i], 1, central);
        if (central) {
            p[i] = x[i] + h;
            const double fp = f(p);
            p[i] = x[i] - h;
            const double fm = f(p);
            g[i] = (fp - fm) / (2.0 * h);
        } else {
            p[i] = x[i] + s;
            g[i] = (f(p) - f0) / s;
        }
        p[i] = x[i];
    }
    return g;
}

std::vector<std::vector<double>> hessian(const Objective& f, std::span<const double> x,
                                         std::span<const std::size_t> coords, std::span<const Bound> bounds,
                                         std::span<const double> scales, double rel_step) {
    const std::size_t m = coords.size();
    std::vector<std::vector<double>> h(m, std::vector<double>(m, 0.0));
    std::vector<double> p(x.begin(), x.end());
    const double f0 = f(x);

    std::vector<double> step(m);
    std::vector<bool> central(m);
    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t i = coords[a];
        bool c = false;
        step[a] = step_direction(x[i], rel_step * scales[i], bounds[i], 2, c);
        central[a] = c;
    }
    auto eval = [&](std::size_t i, double di, std::size_t j, double dj) {
        p[i] += di;
        p[j] += dj;
        const double v = f(p);
        p[i] = x[i];
        p[j] = x[j];
        return v;
    };

    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t i = coords[a];
        const double hi = step[a];
        if (central[a]) {
            h[a][a] = (eval(i, hi, i, 0.0) - 2.0 * f0 + eval(i, -hi, i, 0.0)) / (hi * hi);
        } else {
            h[a][a] = (eval(i, 2.0 * hi, i, 0.0) - 2.0 * eval(i, hi, i, 0.0) + f0) / (hi * hi);
        }
        for (std::size_t b = 0; b < a; ++b) {
            const std::size_t j = coords[b];
            const double hj = step[b];
            double v = 0.0;
            if (central[a] && central[b]) {
                v = (eval(i, hi, j, hj) - eval(i, hi, j, -hj) - eval(i, -hi, j, hj) + eval(i, -hi, j, -hj)) /
                    (4.0 * hi * hj);
            } else {
                v = (eval(i, hi, j, hj) - eval(i, hi, j, 0.0) - eval(i, 0.0, j, hj) + f0) / (hi * hj);
            }
            h[a][b] = h[b][a] = v;
        }
    }
    return h;
}

std::optional<std::vector<std::vector<double>>> invert_spd(const std::vector<std::vector<double>>& a) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j][j];
        for (std::size_t k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
        if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
        l[j][j] = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i][j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
            l[i][j] = s / l[j][j];
        }
    }
    // inv(L), then inv(A) = inv(L)^T inv(L)
    std::vector<std::vector<double>> li(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        li[i][i] = 1.0 / l[i][i];
        for (std::size_t j = 0; j < i; ++j) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s -= l[i][k] * li[k][j];
            li[i][j] = s / l[i][i];
        }
    }
    std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = i; k < n; ++k) s += li[k][i] * li[k][j];
            inv[i][j] = inv[j][i] = s;
        }
    return inv;
}

}  // namespace superatom::optimize
