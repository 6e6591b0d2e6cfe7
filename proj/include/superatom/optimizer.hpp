#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

// Derivative-free bounded minimization and finite-difference curvature.
namespace superatom::optimize {

using Objective = std::function<double(std::span<const double>)>;

struct Bound {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

struct Options {
    int max_evaluations = 20000;
    double x_tol = 1e-10;  // simplex extent in scaled coordinates
    double f_tol = 1e-13;  // relative spread of simplex values
    double initial_step = 0.1;  // simplex edge in scaled coordinates
    int max_restarts = 4;
};

struct Result {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    /// Best objective value after each iteration (non-increasing).
    std::vector<double> history;
};

/// Nelder-Mead on coordinates x_i / scale_i. Trial points are projected onto
/// the box, so bounded parameters never leave it. After convergence the
/// simplex is rebuilt around the best point until a restart no longer improves
/// it. Non-finite objective values are treated as +infinity.
Result nelder_mead(const Objective& f, std::vector<double> x0, std::span<const Bound> bounds,
                   std::span<const double> scales, const Options& opt = {});

/// Central-difference gradient; one-sided at active bounds. Steps are
/// rel_step * scale_i.
std::vector<double> gradient(const Objective& f, std::span<const double> x, std::span<const Bound> bounds,
                             std::span<const double> scales, double rel_step = 1e-5);

/// Finite-difference Hessian of f restricted to the listed coordinates.
/// Central where the stencil fits inside the box, one-sided otherwise.
std::vector<std::vector<double>> hessian(const Objective& f, std::span<const double> x,
                                         std::span<const std::size_t> coords, std::span<const Bound> bounds,
                                         std::span<const double> scales, double rel_step = 1e-4);

/// Inverse of a symmetric positive-definite matrix via Cholesky; nullopt when
/// the matrix is not positive definite.
std::optional<std::vector<std::vector<double>>> invert_spd(const std::vector<std::vector<double>>& a);

}  // namespace superatom::optimize
