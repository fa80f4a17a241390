#include "redq/meanfield.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

namespace redq {
namespace meanfield {

std::vector<double> expand(std::span<const double> s) {
    std::vector<double> q(s.size() + 1);
    double sum = 0.0;
    for (std::size_t x = 0; x < s.size(); ++x) {
        q[x + 1] = s[x];
        sum += s[x];
    }
    q[0] = 1.0 - sum;
    return q;
}

void rhs(std::span<const double> s, const ModelParams& p, std::span<double> out) {
    const std::size_t xmax = s.size();
    const double lambda = p.lambda;
    const double dl = p.d * lambda;

    double sum = 0.0;
    double qbar = 0.0;
    for (std::size_t x = 1; x <= xmax; ++x) {
        sum += s[x - 1];
        qbar += static_cast<double>(x) * s[x - 1];
    }
    const double q0 = 1.0 - sum;
    // An empty system has no buddies to lose.
    const double buddy = qbar > 0.0 ? (1.0 - q0) * (p.d - 1) / qbar : 0.0;

    auto q = [&](std::size_t x) -> double {
        if (x == 0) return q0;
        return x <= xmax ? s[x - 1] : 0.0;
    };
    for (std::size_t x = 1; x <= xmax; ++x) {
        const double xd = static_cast<double>(x);
        out[x - 1] = dl * (q(x - 1) - q(x)) + q(x + 1) - q(x) +
                     buddy * ((xd + 1.0) * q(x + 1) - xd * q(x));
    }
}

OdeSystem system(const ModelParams& p) {
    OdeSystem sys;
    sys.dim = static_cast<std::size_t>(p.xmax);
    sys.rhs = [p](std::span<const double> s, std::span<double> out) { rhs(s, p, out); };
    sys.label = [](std::size_t i) { return "q(" + std::to_string(i + 1) + ")"; };
    return sys;
}

double qbar_series(double lambda, int d, double qbar, int max_terms, double stop_above) {
    const double a = d * lambda;
    const double b = lambda * (d - 1) / qbar;
    double term = 1.0;
    double sum = 0.0;
    for (int l = 1; l <= max_terms; ++l) {
        term *= a / (1.0 + b * l);
        sum += term;
        if (sum > stop_above) return sum;
        // Terms shrink monotonically once the ratio drops below one.
        if (term < 1e-16 && a < 1.0 + b * l) return sum;
    }
    throw SolverError("mean-field series did not converge within " + std::to_string(max_terms) +
                      " terms (qbar=" + std::to_string(qbar) + ")");
}

double solve_qbar(const ModelParams& p) {
    validate_params(p);
    if (p.d == 1) {
        // No buddies: the series no longer depends on qbar; plain M/M/1 mean.
        return p.lambda / (1.0 - p.lambda);
    }
    const double target = p.lambda / (1.0 - p.lambda);
    const int max_terms = 4 * p.xmax;
    auto residual = [&](double qbar) {
        return qbar_series(p.lambda, p.d, qbar, max_terms, 2.0 * target + 1.0) - target;
    };

    double lo = 1e-9;
    double hi = 1.0;
    int doublings = 0;
    while (residual(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 60) throw SolverError("mean-field bisection: could not bracket qbar");
    }
    if (residual(lo) > 0.0) throw SolverError("mean-field bisection: residual positive at lower end");
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (residual(mid) < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace meanfield

std::vector<double> mf_rhs(std::span<const double> q_full, const ModelParams& p) {
    std::vector<double> out(q_full.size(), 0.0);
    meanfield::rhs(q_full.subspan(1), p, std::span<double>(out).subspan(1));
    for (std::size_t x = 1; x < out.size(); ++x) out[0] -= out[x];
    return out;
}

QueueDist mf_fixed_point(const ModelParams& p) {
    validate_params(p);
    const double qbar = meanfield::solve_qbar(p);
    const double a = p.d * p.lambda;
    const double b = p.lambda * (p.d - 1) / qbar;
    std::vector<double> q(static_cast<std::size_t>(p.xmax) + 1);
    q[0] = 1.0 - p.lambda;
    for (std::size_t x = 1; x < q.size(); ++x) {
        q[x] = q[x - 1] * a / (1.0 + b * static_cast<double>(x));
    }
    double sum = 0.0;
    for (double v : q) sum += v;
    if (std::abs(sum - 1.0) > QueueDist::kNormTol) {
        throw SolverError("mean-field fixed point loses " + std::to_string(1.0 - sum) +
                          " probability mass beyond xmax=" + std::to_string(p.xmax) +
                          "; increase xmax");
    }
    return QueueDist(std::move(q));
}

GammaIdentity gamma_series_identity(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw ParamError("a", "gamma identity needs a > 0 and b > 0");
    GammaIdentity r;

    double term = 1.0;
    for (int l = 1; l < 1000000; ++l) {
        term *= a / (1.0 + b * l);
        r.series += term;
        if (a < 1.0 + b * l && term < 1e-17 * r.series) break;
    }

    const double z = a / b;
    const double s = 1.0 + 1.0 / b;
    const double log_lower =
        std::log(boost::math::gamma_p(s, z)) + boost::math::lgamma(s);
    r.gamma_form = std::exp(-std::log(z) / b + z + log_lower);
    return r;
}

}  // namespace redq
