#include "redq/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace redq {

std::string OdeSystem::describe(std::size_t i) const {
    if (label) return label(i);
    return "s[" + std::to_string(i) + "]";
}

void IntegratorConfig::validate() const {
    if (!(dt > 0.0)) throw ParamError("dt", "dt must be > 0");
    if (!(t_max > 0.0)) throw ParamError("tmax", "t_max must be > 0");
    if (!(tol > 0.0)) throw ParamError("tol", "tol must be > 0");
}

namespace {

std::string divergence_message(const std::string& coordinate, double t) {
    std::ostringstream os;
    os << "integration diverged at t=" << t << ": non-finite value in " << coordinate;
    return os.str();
}

void check_dim(const OdeSystem& sys, const State& s) {
    if (!sys.rhs) throw SolverError("ode system has no rhs");
    if (s.size() != sys.dim) {
        throw SolverError("state dimension " + std::to_string(s.size()) +
                          " does not match system dimension " + std::to_string(sys.dim));
    }
}

void check_finite(const OdeSystem& sys, std::span<const double> v, double t) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw DivergenceError(i, sys.describe(i), t);
    }
}

void euler_step(const OdeSystem& sys, State& s, const State& ds, double h) {
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += h * ds[i];
    if (sys.project) sys.project(s);
}

}  // namespace

DivergenceError::DivergenceError(std::size_t index, std::string coordinate, double t)
    : SolverError(divergence_message(coordinate, t)), index_(index), t_(t) {}

void clamp_nonnegative(std::span<double> s) {
    for (double& v : s) {
        if (v < 0.0) v = 0.0;
    }
}

double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

State euler_integrate(const OdeSystem& sys, State s, const IntegratorConfig& cfg, double t_end) {
    cfg.validate();
    check_dim(sys, s);
    if (t_end > cfg.t_max) throw ParamError("t_end", "t_end exceeds the integration horizon");
    if (t_end <= 0.0) return s;

    State ds(sys.dim);
    const auto full_steps = static_cast<std::size_t>(std::floor(t_end / cfg.dt));
    double t = 0.0;
    for (std::size_t k = 0; k < full_steps; ++k) {
        sys.rhs(s, ds);
        euler_step(sys, s, ds, cfg.dt);
        t = static_cast<double>(k + 1) * cfg.dt;
        check_finite(sys, s, t);
    }
    const double rest = t_end - static_cast<double>(full_steps) * cfg.dt;
    if (rest > 0.0) {
        sys.rhs(s, ds);
        euler_step(sys, s, ds, rest);
        check_finite(sys, s, t_end);
    }
    return s;
}

FixedPointResult solve_fixed_point(const OdeSystem& sys, State s, const IntegratorConfig& cfg) {
    cfg.validate();
    check_dim(sys, s);

    FixedPointResult r;
    State ds(sys.dim);
    std::size_t k = 0;
    double t = 0.0;
    for (;;) {
        sys.rhs(s, ds);
        check_finite(sys, ds, t);
        const double res = sup_norm(ds);
        if (res < cfg.tol) {
            r.converged = true;
            r.residual = res;
            break;
        }
        if (t >= cfg.t_max) {
            r.residual = res;
            break;
        }
        euler_step(sys, s, ds, cfg.dt);
        ++k;
        t = static_cast<double>(k) * cfg.dt;
        check_finite(sys, s, t);
    }
    r.state = std::move(s);
    r.t_used = t;
    r.steps = k;
    return r;
}

}  // namespace redq
