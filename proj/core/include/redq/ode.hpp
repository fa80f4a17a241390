#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "redq/model.hpp"

namespace redq {

using State = std::vector<double>;

/// Autonomous system ds/dt = rhs(s) over a flat state vector.
///
/// `rhs` must be deterministic and write exactly `dim` entries into `out`.
/// `project`, when set, is applied to the state after every Euler step (the
/// approximation modules use it to clamp rounding-level negatives).
/// `label` maps a flat index to a human-readable coordinate for diagnostics.
struct OdeSystem {
    std::size_t dim = 0;
    std::function<void(std::span<const double> s, std::span<double> out)> rhs;
    std::function<void(std::span<double> s)> project;
    std::function<std::string(std::size_t)> label;

    std::string describe(std::size_t i) const;
};

struct IntegratorConfig {
    double dt = 0.05;
    double t_max = 1e4;
    double tol = 1e-10;

    void validate() const;
};

/// Thrown when an iterate stops being finite.
class DivergenceError : public SolverError {
public:
    DivergenceError(std::size_t index, std::string coordinate, double t);
    std::size_t index() const noexcept { return index_; }
    double time() const noexcept { return t_; }

private:
    std::size_t index_;
    double t_;
};

/// Forward Euler from s0 up to exactly t_end; the last step is shortened so
/// the trajectory lands on t_end.
State euler_integrate(const OdeSystem& sys, State s0, const IntegratorConfig& cfg, double t_end);

/// Convergence summary carried by every fixed-point solution.
struct SolveInfo {
    bool converged = false;
    double t_used = 0.0;
    /// Sup-norm of rhs at the returned state.
    double residual = 0.0;
    std::size_t steps = 0;
};

struct FixedPointResult {
    State state;
    bool converged = false;
    double t_used = 0.0;
    double residual = 0.0;
    std::size_t steps = 0;

    SolveInfo info() const { return {converged, t_used, residual, steps}; }
};

/// Clamps every negative coordinate to zero.
void clamp_nonnegative(std::span<double> s);

/// Integrates until sup|rhs(s)| < cfg.tol or cfg.t_max is reached.
/// Non-convergence is reported through the flag, not thrown.
FixedPointResult solve_fixed_point(const OdeSystem& sys, State s0, const IntegratorConfig& cfg);

double sup_norm(std::span<const double> v);

}  // namespace redq
