#pragma once

#include <limits>
#include <span>
#include <vector>

#include "redq/model.hpp"
#include "redq/ode.hpp"

namespace redq {

/// Discipline-independent mean-field model. The integrated coordinates are
/// q(1..xmax); q(0) is always 1 - sum, so the flat state has xmax entries.
namespace meanfield {

/// Full q(0..xmax) from the integrated coordinates.
std::vector<double> expand(std::span<const double> s);

/// Writes dq(x)/dt for x = 1..xmax into `out`.
void rhs(std::span<const double> s, const ModelParams& p, std::span<double> out);

OdeSystem system(const ModelParams& p);

/// Left-hand side of the fixed-point equation for the mean queue length:
/// sum_{x>=1} (d lambda)^x / prod_{l<=x} (1 + lambda (d-1) l / qbar).
/// Throws SolverError if the series has not settled within `max_terms`
/// terms while still below `stop_above`.
double qbar_series(double lambda, int d, double qbar, int max_terms,
                   double stop_above = std::numeric_limits<double>::infinity());

/// Unique root qbar of qbar_series(qbar) = lambda / (1 - lambda).
double solve_qbar(const ModelParams& p);

}  // namespace meanfield

/// dq(x)/dt for x = 0..xmax given q(0..xmax); q(0) is taken as 1 - sum.
std::vector<double> mf_rhs(std::span<const double> q_full, const ModelParams& p);

/// Closed-form fixed point. q(0) = 1 - lambda; the truncated tail is not
/// renormalized, so xmax must be large enough for the lost mass to stay
/// below QueueDist::kNormTol.
QueueDist mf_fixed_point(const ModelParams& p);

struct GammaIdentity {
    double series = 0.0;
    double gamma_form = 0.0;
};

/// Both sides of sum_{x>=1} a^x / prod_{l<=x}(1 + b l)
///   = (a/b)^(-1/b) e^(a/b) lower_gamma(1 + 1/b, a/b),
/// each computed on its own path.
GammaIdentity gamma_series_identity(double a, double b);

}  // namespace redq
