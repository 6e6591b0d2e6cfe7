#include "superatom/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <random>

#include "superatom/detection.hpp"
#include "superatom/optimizer.hpp"
#include "superatom/parallel.hpp"
#include "superatom/random.hpp"
#include "superatom/spectra.hpp"

namespace superatom::fitting {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

enum class ObjectiveKind { chi_square, neg_log_likelihood };

struct ParamSpec {
    std::string name;
    optimize::Bound bound;
    double scale = 1.0;
    bool fixed = false;
    double fixed_value = 0.0;
};

using FullObjective = std::function<double(std::span<const double>)>;

struct Problem {
    std::vector<ParamSpec> specs;
    FullObjective objective;
    ObjectiveKind kind = ObjectiveKind::chi_square;
};

// Objective increase that corresponds to one standard error.
double one_sigma_rise(ObjectiveKind k) { return k == ObjectiveKind::chi_square ? 1.0 : 0.5; }
double covariance_factor(ObjectiveKind k) { return k == ObjectiveKind::chi_square ? 2.0 : 1.0; }

constexpr double gradient_tolerance = 0.05;  // objective units per standard error

struct Solved {
    std::vector<double> full;  // all parameters, fixed included
    optimize::Result opt;
};

FitResult solve(const Problem& pb, const std::vector<std::vector<double>>& starts) {
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < pb.specs.size(); ++i)
        if (!pb.specs[i].fixed) free_idx.push_back(i);

    auto expand = [&](std::span<const double> xf) {
        std::vector<double> full(pb.specs.size());
        for (std::size_t i = 0, k = 0; i < pb.specs.size(); ++i)
            full[i] = pb.specs[i].fixed ? pb.specs[i].fixed_value : xf[k++];
        return full;
    };
    const optimize::Objective reduced = [&](std::span<const double> xf) { return pb.objective(expand(xf)); };

    std::vector<optimize::Bound> bounds;
    std::vector<double> scales;
    for (auto i : free_idx) {
        bounds.push_back(pb.specs[i].bound);
        scales.push_back(pb.specs[i].scale);
    }

    std::vector<optimize::Result> runs(starts.size());
    parallel_for(starts.size(), [&](std::size_t s) {
        std::vector<double> x0;
        for (auto i : free_idx) x0.push_back(starts[s][i]);
        runs[s] = optimize::nelder_mead(reduced, x0, bounds, scales);
    });
    std::size_t best = 0;
    for (std::size_t s = 1; s < runs.size(); ++s)
        if (runs[s].value < runs[best].value) best = s;
    const auto& run = runs[best];

    FitResult res;
    res.objective = run.value;
    res.iterations = run.iterations;
    res.objective_history = run.history;
    res.gradient_tolerance = gradient_tolerance;
    const auto full = expand(run.x);
    for (std::size_t i = 0; i < pb.specs.size(); ++i) {
        FitParameter p;
        p.name = pb.specs[i].name;
        p.value = full[i];
        p.fixed = pb.specs[i].fixed;
        res.parameters.push_back(p);
    }
    if (free_idx.empty()) {
        res.converged = std::isfinite(res.objective);
        return res;
    }

    const std::size_t nf = free_idx.size();
    std::vector<bool> at_bound(nf, false);
    std::vector<std::size_t> interior;
    for (std::size_t k = 0; k < nf; ++k) {
        const double x = run.x[k];
        const double tol = 1e-7 * scales[k];
        at_bound[k] = x - bounds[k].lower <= tol || bounds[k].upper - x <= tol;
        if (!at_bound[k]) interior.push_back(k);
    }

    std::vector<double> sigma(nf, inf);
    bool singular = false;
    if (!interior.empty()) {
        auto h = optimize::hessian(reduced, run.x, interior, bounds, scales, 1e-4);
        auto inv = optimize::invert_spd(h);
        if (inv) {
            // Second pass with steps matched to the curvature scale.
            std::vector<double> steps = scales;
            for (std::size_t a = 0; a < interior.size(); ++a) {
                const double s = std::sqrt(covariance_factor(pb.kind) * (*inv)[a][a]);
                steps[interior[a]] = std::clamp(0.1 * s, 1e-8 * scales[interior[a]], 1e-2 * scales[interior[a]]) / 1e-4;
            }
            auto h2 = optimize::hessian(reduced, run.x, interior, bounds, steps, 1e-4);
            if (auto inv2 = optimize::invert_spd(h2)) inv = inv2;
        }
        if (inv) {
            for (std::size_t a = 0; a < interior.size(); ++a)
                sigma[interior[a]] = std::sqrt(covariance_factor(pb.kind) * (*inv)[a][a]);
        } else {
            singular = true;
        }
    }

    // One-sided errors for parameters at a bound: distance inward at which the
    // objective rises by one standard error.
    for (std::size_t k = 0; k < nf; ++k) {
        if (!at_bound[k]) continue;
        const bool at_lower = run.x[k] - bounds[k].lower <= 1e-7 * scales[k];
        const double room = at_lower ? bounds[k].upper - run.x[k] : run.x[k] - bounds[k].lower;
        const double max_d = std::isfinite(room) ? room : 1e3 * scales[k];
        auto rise = [&](double d) {
            auto x = run.x;
            x[k] += at_lower ? d : -d;
            return reduced(x) - run.value;
        };
        const double target = one_sigma_rise(pb.kind);
        if (rise(max_d) < target) {
            sigma[k] = max_d;
            res.warnings.push_back("flat likelihood: " + pb.specs[free_idx[k]].name + " unconstrained inside its bounds");
        } else {
            double lo = 0.0;
            double hi = max_d;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (rise(mid) < target ? lo : hi) = mid;
            }
            sigma[k] = 0.5 * (lo + hi);
        }
        auto& p = res.parameters[free_idx[k]];
        p.at_bound = true;
        p.error = sigma[k];
        p.error_lower = at_lower ? 0.0 : sigma[k];
        p.error_upper = at_lower ? sigma[k] : 0.0;
    }
    for (std::size_t k = 0; k < nf; ++k) {
        if (at_bound[k]) continue;
        auto& p = res.parameters[free_idx[k]];
        p.error = p.error_lower = p.error_upper = sigma[k];
    }
    if (singular) res.warnings.push_back("flat likelihood: curvature is singular, parameters not identifiable");
    for (std::size_t k = 0; k < nf; ++k) {
        const double width = bounds[k].upper - bounds[k].lower;
        if (!at_bound[k] && std::isfinite(width) && std::isfinite(sigma[k]) && sigma[k] > 0.5 * width)
            res.warnings.push_back("flat likelihood: " + pb.specs[free_idx[k]].name + " poorly constrained");
    }

    // Projected gradient in standard-error units.
    const auto grad = optimize::gradient(reduced, run.x, bounds, scales, 1e-6);
    double norm2 = 0.0;
    for (std::size_t k = 0; k < nf; ++k) {
        double g = grad[k];
        if (at_bound[k]) {
            const bool at_lower = run.x[k] - bounds[k].lower <= 1e-7 * scales[k];
            if ((at_lower && g > 0.0) || (!at_lower && g < 0.0)) g = 0.0;
        }
        const double unit = std::isfinite(sigma[k]) ? sigma[k] : scales[k];
        norm2 += (g * unit) * (g * unit);
    }
    res.gradient_norm = std::sqrt(norm2);
    res.converged = run.converged && res.gradient_norm <= gradient_tolerance;
    if (!run.converged) res.warnings.push_back("optimizer did not converge");
    else if (!res.converged) res.warnings.push_back("gradient above tolerance at the optimum");
    return res;
}

// Standard deviation of refitted values over bootstrap resamples.
void attach_bootstrap(FitResult& res, const FitOptions& opt,
                      const std::function<std::vector<double>(Rng&)>& refit) {
    if (opt.bootstrap_resamples == 0) return;
    const std::size_t b = opt.bootstrap_resamples;
    std::vector<std::vector<double>> values(b);
    parallel_for(b, [&](std::size_t i) {
        Rng rng(derive_seed(opt.bootstrap_seed, i));
        values[i] = refit(rng);
    });
    for (std::size_t k = 0; k < res.parameters.size(); ++k) {
        double mean = 0.0;
        for (const auto& v : values) mean += v[k];
        mean /= static_cast<double>(b);
        double var = 0.0;
        for (const auto& v : values) var += (v[k] - mean) * (v[k] - mean);
        res.parameters[k].bootstrap_error = b > 1 ? std::sqrt(var / static_cast<double>(b - 1)) : 0.0;
    }
}

std::vector<double> values_of(const FitResult& r) {
    std::vector<double> v;
    for (const auto& p : r.parameters) v.push_back(p.value);
    return v;
}

template <class T>
std::vector<T> resample(std::span<const T> data, Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::vector<T> out(data.size());
    for (auto& x : out) x = data[pick(rng)];
    return out;
}

void check_trace(std::span<const TracePoint> trace, std::size_t min_points, const char* who) {
    if (trace.size() < min_points)
        throw std::invalid_argument(std::string(who) + ": needs at least " + std::to_string(min_points) + " points");
    for (const auto& p : trace)
        if (!std::isfinite(p.t) || !std::isfinite(p.value) || !(p.sigma > 0.0))
            throw std::invalid_argument(std::string(who) + ": points need finite values and sigma > 0");
}

double rabi_model(double t, std::span<const double> x) {
    const double omega = x[0], tau = x[1], amp = x[2], off = x[3];
    return off + amp * 0.5 * (1.0 - std::cos(omega * t) * std::exp(-(t * t) / (tau * tau)));
}

// Frequency of the strongest component of the mean-subtracted trace,
// scanned up to the Nyquist-like limit of the smallest sample spacing.
double dominant_frequency(std::span<const TracePoint> trace) {
    std::vector<double> ts;
    for (const auto& p : trace) ts.push_back(p.t);
    std::sort(ts.begin(), ts.end());
    double min_dt = inf;
    for (std::size_t i = 1; i < ts.size(); ++i)
        if (ts[i] > ts[i - 1]) min_dt = std::min(min_dt, ts[i] - ts[i - 1]);
    const double span = ts.back() - ts.front();
    if (!(span > 0.0) || !std::isfinite(min_dt)) return 1.0;

    double mean = 0.0;
    for (const auto& p : trace) mean += p.value;
    mean /= static_cast<double>(trace.size());

    const double w_lo = std::numbers::pi / span;
    const double w_hi = std::numbers::pi / min_dt;
    constexpr int grid = 4000;
    double best_w = w_lo;
    double best_power = -1.0;
    for (int k = 0; k <= grid; ++k) {
        const double w = w_lo + (w_hi - w_lo) * k / grid;
        std::complex<double> acc = 0.0;
        for (const auto& p : trace) acc += (p.value - mean) * std::polar(1.0, -w * p.t);
        const double power = std::norm(acc);
        if (power > best_power) {
            best_power = power;
            best_w = w;
        }
    }
    return best_w;
}

double chi_square(std::span<const TracePoint> trace, const std::function<double(double)>& model) {
    double chi2 = 0.0;
    for (const auto& p : trace) {
        const double r = (p.value - model(p.t)) / p.sigma;
        chi2 += r * r;
    }
    return chi2;
}

FitResult fit_rabi_impl(std::span<const TracePoint> trace, const std::vector<double>* seed_values) {
    double t_min = inf, t_max = -inf, y_min = inf, y_max = -inf;
    for (const auto& p : trace) {
        t_min = std::min(t_min, p.t);
        t_max = std::max(t_max, p.t);
        y_min = std::min(y_min, p.value);
        y_max = std::max(y_max, p.value);
    }
    const double span = std::max(t_max - t_min, 1e-12);
    const double omega0 = dominant_frequency(trace);

    Problem pb;
    pb.kind = ObjectiveKind::chi_square;
    pb.specs = {
        {"omega", {1e-9, 4.0 * omega0 + 100.0 / span}, omega0},
        {"tau_d", {1e-3 * span, 1e3 * span}, span},
        {"amplitude", {-2.0, 2.0}, 1.0},
        {"offset", {-1.0, 1.0}, 1.0},
    };
    pb.objective = [trace](std::span<const double> x) {
        return chi_square(trace, [&](double t) { return rabi_model(t, x); });
    };

    std::vector<std::vector<double>> starts;
    if (seed_values) {
        starts.push_back(*seed_values);
    } else {
        const double amp0 = std::max(y_max - y_min, 1e-3);
        for (double wf : {1.0, 0.8, 1.25})
            for (double tf : {0.5, 2.0}) starts.push_back({omega0 * wf, span * tf, amp0, y_min});
    }
    return solve(pb, starts);
}

}  // namespace

const FitParameter& FitResult::operator[](std::string_view name) const {
    for (const auto& p : parameters)
        if (p.name == name) return p;
    throw std::out_of_range("FitResult: no parameter named " + std::string(name));
}

FitResult fit_rabi(std::span<const TracePoint> trace, const FitOptions& opt) {
    check_trace(trace, 8, "fit_rabi");

    double wsum = 0.0, wy = 0.0;
    for (const auto& p : trace) {
        const double w = 1.0 / (p.sigma * p.sigma);
        wsum += w;
        wy += w * p.value;
    }
    const double mean = wy / wsum;
    double chi2_const = 0.0;
    for (const auto& p : trace) chi2_const += std::pow((p.value - mean) / p.sigma, 2);
    if (chi2_const <= 2.0 * static_cast<double>(trace.size() - 1))
        throw DegenerateData("fit_rabi: trace is constant within its noise");

    FitResult res = fit_rabi_impl(trace, nullptr);
    double t_min = inf, t_max = -inf;
    for (const auto& p : trace) {
        t_min = std::min(t_min, p.t);
        t_max = std::max(t_max, p.t);
    }
    if (res.value("omega") * (t_max - t_min) < 2.0 * std::numbers::pi)
        res.warnings.push_back("trace spans less than one oscillation period");

    const auto best = values_of(res);
    attach_bootstrap(res, opt, [&](Rng& rng) {
        const auto sample = resample(trace, rng);
        return values_of(fit_rabi_impl(sample, &best));
    });
    return res;
}

namespace {

FitResult fit_lifetime_impl(std::span<const TracePoint> trace, LifetimeModel model, const std::vector<double>* seed) {
    double t_min = inf, t_max = -inf;
    for (const auto& p : trace) {
        t_min = std::min(t_min, p.t);
        t_max = std::max(t_max, p.t);
    }
    const double span = std::max(t_max - t_min, 1e-12);
    // Ends of the trace, by time.
    auto first = std::min_element(trace.begin(), trace.end(), [](auto& a, auto& b) { return a.t < b.t; });
    auto last = std::max_element(trace.begin(), trace.end(), [](auto& a, auto& b) { return a.t < b.t; });
    double y_scale = 0.0;
    for (const auto& p : trace) y_scale = std::max(y_scale, std::abs(p.value));
    y_scale = std::max(y_scale, 1e-12);

    Problem pb;
    pb.kind = ObjectiveKind::chi_square;
    pb.specs = {
        {"rate0", {-inf, inf}, y_scale},
        {"tau_r", {1e-3 * span, 1e4 * span}, span},
        {"floor", {-inf, inf}, y_scale},
    };
    if (model == LifetimeModel::survival) {
        pb.specs[2].fixed = true;
        pb.specs[2].fixed_value = 0.0;
    }
    pb.objective = [trace, model](std::span<const double> x) {
        return chi_square(trace, [&](double t) {
            const double decay = std::exp(-t / x[1]);
            return model == LifetimeModel::recovery ? x[2] + x[0] * (1.0 - decay) : x[0] * decay;
        });
    };

    std::vector<std::vector<double>> starts;
    if (seed) {
        starts.push_back(*seed);
    } else {
        for (double tf : {1.0 / 3.0, 1.0, 3.0}) {
            if (model == LifetimeModel::recovery)
                starts.push_back({(last->value - first->value) / (1.0 - std::exp(-1.0 / tf)), span * tf, first->value});
            else
                starts.push_back({first->value, span * tf, 0.0});
        }
    }
    return solve(pb, starts);
}

}  // namespace

FitResult fit_lifetime(std::span<const TracePoint> trace, LifetimeModel model, const FitOptions& opt) {
    check_trace(trace, 4, "fit_lifetime");
    FitResult res = fit_lifetime_impl(trace, model, nullptr);
    const auto best = values_of(res);
    attach_bootstrap(res, opt, [&](Rng& rng) {
        const auto sample = resample(trace, rng);
        return values_of(fit_lifetime_impl(sample, model, &best));
    });
    return res;
}

namespace {

FitResult fit_count_impl(const CountHistogram& hist, double t_i, double phi_g, double tau_r,
                         const std::vector<double>* seed) {
    Problem pb;
    pb.kind = ObjectiveKind::neg_log_likelihood;
    pb.specs = {
        {"phi_r", {0.0, phi_g}, std::max(phi_g, 1e-12)},
        {"eta_r", {0.0, 1.0}, 1.0},
    };
    pb.objective = [&hist, t_i, phi_g, tau_r](std::span<const double> x) {
        detection::CountModel m{t_i, phi_g, x[0], tau_r, x[1]};
        double nll = 0.0;
        for (const auto& [n, count] : hist) {
            if (count == 0) continue;
            const double p = detection::count_pmf_rydberg(m, n);
            nll -= static_cast<double>(count) * std::log(std::max(p, 1e-300));
        }
        return nll;
    };
    std::vector<std::vector<double>> starts;
    if (seed) {
        starts.push_back(*seed);
    } else {
        for (double rf : {0.02, 0.1, 0.5})
            for (double eta : {0.95, 0.6}) starts.push_back({rf * phi_g, eta});
    }
    return solve(pb, starts);
}

}  // namespace

FitResult fit_count_histogram(const CountHistogram& hist, double t_i, double phi_g, double tau_r,
                              const FitOptions& opt) {
    std::size_t total = 0;
    for (const auto& [n, c] : hist) {
        if (n < 0) throw std::invalid_argument("fit_count_histogram: negative count value");
        total += c;
    }
    if (total < 100) throw std::invalid_argument("fit_count_histogram: needs at least 100 occurrences");
    if (!(t_i > 0.0) || !(phi_g > 0.0) || !(tau_r > 0.0))
        throw std::invalid_argument("fit_count_histogram: t_i, phi_g and tau_r must be > 0");

    FitResult res = fit_count_impl(hist, t_i, phi_g, tau_r, nullptr);
    const auto best = values_of(res);
    std::vector<int> flat;
    flat.reserve(total);
    for (const auto& [n, c] : hist) flat.insert(flat.end(), c, n);
    attach_bootstrap(res, opt, [&](Rng& rng) {
        CountHistogram h;
        for (int n : resample(std::span<const int>(flat), rng)) ++h[n];
        return values_of(fit_count_impl(h, t_i, phi_g, tau_r, &best));
    });
    return res;
}

std::vector<double> freedman_diaconis_edges(std::span<const double> samples) {
    if (samples.size() < 2) throw std::invalid_argument("freedman_diaconis_edges: needs at least 2 samples");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    auto quantile = [&s](double q) {
        const double pos = q * static_cast<double>(s.size() - 1);
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return i + 1 < s.size() ? s[i] + frac * (s[i + 1] - s[i]) : s[i];
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    const double lo = s.front();
    const double hi = s.back();
    double width = 2.0 * iqr / std::cbrt(static_cast<double>(s.size()));
    std::size_t bins = 1;
    if (width > 0.0 && hi > lo) bins = static_cast<std::size_t>(std::ceil((hi - lo) / width));
    bins = std::clamp<std::size_t>(bins, 1, 1000);
    std::vector<double> edges(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    edges.back() = hi;
    return edges;
}

namespace {

FitResult fit_quadrature_impl(std::span<const double> samples, double t_i, double phi, double refl_g, double tau_r,
                              const std::vector<double>* seed) {
    const auto edges = freedman_diaconis_edges(samples);
    const std::size_t bins = edges.size() - 1;
    std::vector<double> counts(bins, 0.0);
    for (double x : samples) {
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        std::size_t k = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
        counts[std::min(k, bins - 1)] += 1.0;
    }

    Problem pb;
    pb.kind = ObjectiveKind::neg_log_likelihood;
    pb.specs = {
        {"refl_r", {0.0, 1.0}, 1.0},
        {"eta_r", {0.0, 1.0}, 1.0},
    };
    pb.objective = [edges, counts, t_i, phi, refl_g, tau_r](std::span<const double> x) {
        detection::QuadratureModel m{t_i, phi, refl_g, x[0], tau_r, x[1]};
        // Outer bins extend to +-infinity so the cell probabilities sum to one.
        double prev = 0.0;
        double nll = 0.0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            const double cdf = k + 1 == counts.size() ? 1.0 : detection::quad_cdf_rydberg(m, edges[k + 1]);
            const double p = cdf - prev;
            prev = cdf;
            if (counts[k] > 0.0) nll -= counts[k] * std::log(std::max(p, 1e-300));
        }
        return nll;
    };
    std::vector<std::vector<double>> starts;
    if (seed) {
        starts.push_back(*seed);
    } else {
        for (double r : {0.2, 0.5, 0.8})
            for (double eta : {0.95, 0.6}) starts.push_back({r, eta});
    }
    return solve(pb, starts);
}

}  // namespace

FitResult fit_quadrature_histogram(std::span<const double> samples, double t_i, double phi, double refl_g,
                                   double tau_r, const FitOptions& opt) {
    if (samples.size() < 100) throw std::invalid_argument("fit_quadrature_histogram: needs at least 100 samples");
    for (double x : samples)
        if (!std::isfinite(x)) throw std::invalid_argument("fit_quadrature_histogram: non-finite sample");
    if (!(t_i > 0.0) || !(phi >= 0.0) || !(refl_g >= 0.0 && refl_g <= 1.0) || !(tau_r > 0.0))
        throw std::invalid_argument("fit_quadrature_histogram: invalid fixed parameters");

    FitResult res = fit_quadrature_impl(samples, t_i, phi, refl_g, tau_r, nullptr);
    const auto best = values_of(res);
    attach_bootstrap(res, opt, [&](Rng& rng) {
        const auto sample = resample(samples, rng);
        return values_of(fit_quadrature_impl(sample, t_i, phi, refl_g, tau_r, &best));
    });
    return res;
}

namespace {

double* spectrum_field(SystemParams& p, std::string_view name) {
    if (name == "g") return &p.g;
    if (name == "kappa") return &p.kappa;
    if (name == "kappa0") return &p.kappa0;
    if (name == "gamma") return &p.gamma;
    if (name == "gamma_r") return &p.gamma_r;
    if (name == "omega_c") return &p.omega_c;
    return nullptr;
}

FitResult fit_spectrum_impl(std::span<const TracePoint> points, SpectrumMode mode,
                            const std::vector<std::string>& names, const SystemParams& base,
                            const std::vector<double>* seed) {
    Problem pb;
    pb.kind = ObjectiveKind::chi_square;
    for (const auto& name : names) {
        SystemParams tmp = base;
        const double v = *spectrum_field(tmp, name);
        pb.specs.push_back({name, {0.0, inf}, v > 0.0 ? v : 1.0});
    }
    pb.objective = [points, mode, names, base](std::span<const double> x) {
        SystemParams p = base;
        for (std::size_t k = 0; k < names.size(); ++k) *spectrum_field(p, names[k]) = x[k];
        if (p.kappa0 > p.kappa) return inf;
        return chi_square(points, [&](double delta) {
            const auto c = spectra::ProbeCondition::co_swept(delta);
            return mode == SpectrumMode::transmission ? spectra::transmission(p, c)
                                                      : spectra::reflection(p, c).reflectivity;
        });
    };

    std::vector<double> init;
    for (const auto& name : names) {
        SystemParams tmp = base;
        init.push_back(*spectrum_field(tmp, name));
    }
    std::vector<std::vector<double>> starts;
    if (seed) {
        starts.push_back(*seed);
    } else {
        const auto g_it = std::find(names.begin(), names.end(), "g");
        const auto oc_it = std::find(names.begin(), names.end(), "omega_c");
        const std::vector<double> one{1.0};
        const std::vector<double> factors{1.0, 0.8, 1.25};
        for (double gf : g_it != names.end() ? factors : one)
            for (double of : oc_it != names.end() ? factors : one) {
                auto s = init;
                if (g_it != names.end()) s[g_it - names.begin()] *= gf;
                if (oc_it != names.end()) s[oc_it - names.begin()] *= of;
                starts.push_back(s);
            }
    }
    return solve(pb, starts);
}

}  // namespace

FitResult fit_spectrum(std::span<const TracePoint> points, SpectrumMode mode, std::span<const std::string> free,
                       const SystemParams& base, const FitOptions& opt) {
    std::vector<std::string> names;
    for (const auto& name : free) {
        SystemParams tmp;
        if (!spectrum_field(tmp, name)) throw std::invalid_argument("fit_spectrum: unknown parameter `" + name + "`");
        if (std::find(names.begin(), names.end(), name) != names.end())
            throw std::invalid_argument("fit_spectrum: duplicate parameter `" + name + "`");
        names.push_back(name);
    }
    check_trace(points, std::max<std::size_t>(1, 2 * names.size()), "fit_spectrum");

    FitResult res = fit_spectrum_impl(points, mode, names, base, nullptr);
    const auto best = values_of(res);
    if (!names.empty()) {
        attach_bootstrap(res, opt, [&](Rng& rng) {
            const auto sample = resample(points, rng);
            return values_of(fit_spectrum_impl(sample, mode, names, base, &best));
        });
    }
    return res;
}

}  // namespace superatom::fitting
