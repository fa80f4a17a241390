#include "redq/pair_ps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace redq {

PairState::PairState(int xmax)
    : xmax_(xmax), data_(static_cast<std::size_t>(xmax) * static_cast<std::size_t>(xmax), 0.0) {
    if (xmax < 1) throw ParamError("xmax", "PairState needs xmax >= 1");
}

PairState::PairState(int xmax, std::vector<double> values) : xmax_(xmax), data_(std::move(values)) {
    if (data_.size() != static_cast<std::size_t>(xmax) * static_cast<std::size_t>(xmax)) {
        throw ParamError("xmax", "PairState value count does not match xmax^2");
    }
}

double PairState::row_sum(int x) const {
    if (x < 1 || x > xmax_) return 0.0;
    const auto row = std::span<const double>(data_).subspan(index(x, 1), static_cast<std::size_t>(xmax_));
    return std::accumulate(row.begin(), row.end(), 0.0);
}

std::vector<double> PairState::queue_lengths() const {
    std::vector<double> q(static_cast<std::size_t>(xmax_) + 1, 0.0);
    double sum = 0.0;
    for (int x = 1; x <= xmax_; ++x) {
        q[x] = 2.0 * row_sum(x) / x;
        sum += q[x];
    }
    q[0] = 1.0 - sum;
    return q;
}

double PairState::mean() const { return 2.0 * std::accumulate(data_.begin(), data_.end(), 0.0); }

double PairState::max_asymmetry() const {
    double m = 0.0;
    for (int x = 1; x <= xmax_; ++x) {
        for (int y = x + 1; y <= xmax_; ++y) m = std::max(m, std::abs(at(x, y) - at(y, x)));
    }
    return m;
}

double ps_buddy_rate(const PairState& s, int x) {
    if (x <= 1 || x > s.xmax()) return 0.0;
    const double px = s.row_sum(x);
    if (px < kEmptyClass) return 0.0;
    double g = 0.0;
    for (int y = 1; y <= s.xmax(); ++y) g += s.at(x, y) / y;
    return (x - 1) * g / px;
}

namespace pair_ps {

void rhs(std::span<const double> s, int xmax, double lambda, std::span<double> out) {
    const int X = xmax;
    const std::size_t W = static_cast<std::size_t>(X) + 2;
    // Padded copy: indices 0 and X+1 hold the zero boundary.
    std::vector<double> pi(W * W, 0.0);
    for (int x = 1; x <= X; ++x) {
        for (int y = 1; y <= X; ++y) pi[x * W + y] = s[static_cast<std::size_t>(x - 1) * X + (y - 1)];
    }
    auto P = [&](int x, int y) { return pi[x * W + y]; };

    std::vector<double> row(W, 0.0), q(W, 0.0), h(W, 0.0);
    double mass = 0.0;
    for (int x = 1; x <= X; ++x) {
        double r = 0.0, g = 0.0;
        for (int y = 1; y <= X; ++y) {
            r += P(x, y);
            g += P(x, y) / y;
        }
        row[x] = r;
        q[x] = 2.0 * r / x;
        mass += q[x];
        h[x] = r < kEmptyClass ? 0.0 : (x - 1) * g / r;
    }
    q[0] = 1.0 - mass;

    const double two_l = 2.0 * lambda;
    for (int x = 1; x <= X; ++x) {
        const double stay_x = static_cast<double>(x) / (x + 1);
        for (int y = 1; y <= X; ++y) {
            const double stay_y = static_cast<double>(y) / (y + 1);
            const double here = P(x, y);
            // Mirrored terms are summed pairwise so (x,y) and (y,x) round identically.
            const double create = lambda * (q[x - 1] * q[y - 1]);
            const double arrive = two_l * ((P(x - 1, y) + P(x, y - 1)) - 2.0 * here);
            const double shrink =
                P(x + 1, y) * (h[x + 1] + stay_x) + P(x, y + 1) * (h[y + 1] + stay_y);
            const double leave = here * (2.0 + (h[x] + h[y]));
            out[static_cast<std::size_t>(x - 1) * X + (y - 1)] = create + arrive + shrink - leave;
        }
    }
}

OdeSystem system(const ModelParams& p) {
    OdeSystem sys;
    const int X = p.xmax;
    sys.dim = static_cast<std::size_t>(X) * static_cast<std::size_t>(X);
    sys.rhs = [X, lambda = p.lambda](std::span<const double> s, std::span<double> out) {
        rhs(s, X, lambda, out);
    };
    sys.project = clamp_nonnegative;
    sys.label = [X](std::size_t i) {
        return "pi(" + std::to_string(i / X + 1) + "," + std::to_string(i % X + 1) + ")";
    };
    return sys;
}

}  // namespace pair_ps

PairState pair_ps_rhs(const PairState& s, const ModelParams& p) {
    PairState out(s.xmax());
    pair_ps::rhs(s.values(), s.xmax(), p.lambda, out.values());
    return out;
}

PairSolution pair_ps_fixed_point(const ModelParams& p, const IntegratorConfig& cfg) {
    validate_params(p);
    if (p.d != 2) throw ParamError("d", "pair_ps_fixed_point is the d=2 model; use pair_ps_d_fixed_point");
    const auto sys = pair_ps::system(p);
    auto r = solve_fixed_point(sys, State(sys.dim, 0.0), cfg);
    PairState state(p.xmax, std::move(r.state));
    QueueDist dist(state.queue_lengths());
    return {std::move(state), std::move(dist), r.info()};
}

std::string to_csv(const PairState& s) {
    std::ostringstream os;
    os.precision(17);
    os << "x,y,pi\n";
    for (int x = 1; x <= s.xmax(); ++x) {
        for (int y = 1; y <= s.xmax(); ++y) os << x << ',' << y << ',' << s.at(x, y) << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// d-dimensional generalization

namespace {

std::size_t checked_volume(int d, int xmax) {
    if (d < 2) throw ParamError("d", "PairStateD needs d >= 2");
    if (xmax < 1) throw ParamError("xmax", "PairStateD needs xmax >= 1");
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) {
        n *= static_cast<std::size_t>(xmax);
        if (n > (std::size_t{1} << 28)) throw ParamError("xmax", "PairStateD tensor too large");
    }
    return n;
}

}  // namespace

PairStateD::PairStateD(int d, int xmax) : d_(d), xmax_(xmax), data_(checked_volume(d, xmax), 0.0) {}

PairStateD::PairStateD(int d, int xmax, std::vector<double> values)
    : d_(d), xmax_(xmax), data_(std::move(values)) {
    if (data_.size() != checked_volume(d, xmax)) {
        throw ParamError("xmax", "PairStateD value count does not match xmax^d");
    }
}

std::size_t PairStateD::index(std::span<const int> x) const {
    std::size_t idx = 0;
    for (int i = 0; i < d_; ++i) idx = idx * static_cast<std::size_t>(xmax_) + static_cast<std::size_t>(x[i] - 1);
    return idx;
}

void PairStateD::decode(std::size_t flat, std::span<int> x) const {
    for (int i = d_ - 1; i >= 0; --i) {
        x[i] = static_cast<int>(flat % static_cast<std::size_t>(xmax_)) + 1;
        flat /= static_cast<std::size_t>(xmax_);
    }
}

double PairStateD::at(std::span<const int> x) const {
    for (int i = 0; i < d_; ++i) {
        if (x[i] < 1 || x[i] > xmax_) return 0.0;
    }
    return data_[index(x)];
}

std::vector<double> PairStateD::marginal() const {
    std::vector<double> m(static_cast<std::size_t>(xmax_) + 1, 0.0);
    const std::size_t stride = data_.size() / static_cast<std::size_t>(xmax_);
    for (int x = 1; x <= xmax_; ++x) {
        const auto block = std::span<const double>(data_).subspan((x - 1) * stride, stride);
        m[x] = std::accumulate(block.begin(), block.end(), 0.0);
    }
    return m;
}

std::vector<double> PairStateD::queue_lengths() const {
    const auto m = marginal();
    std::vector<double> q(m.size(), 0.0);
    double sum = 0.0;
    for (int x = 1; x <= xmax_; ++x) {
        q[x] = d_ * m[x] / x;
        sum += q[x];
    }
    q[0] = 1.0 - sum;
    return q;
}

double PairStateD::max_asymmetry() const {
    std::vector<int> x(d_), y(d_);
    double worst = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        decode(i, x);
        y = x;
        std::sort(y.begin(), y.end());
        worst = std::max(worst, std::abs(data_[i] - data_[index(y)]));
    }
    return worst;
}

namespace pair_ps_d {

void rhs(std::span<const double> s, int d, int xmax, double lambda, std::span<double> out) {
    const int X = xmax;
    const PairStateD view(d, X, std::vector<double>(s.begin(), s.end()));
    const std::size_t n = view.size();
    const std::size_t stride1 = n / X;        // block of one leading coordinate
    const std::size_t stride2 = stride1 / X;  // block of two leading coordinates

    // pi(x) and the two-coordinate marginal pi(x, y).
    std::vector<double> m1(X + 2, 0.0);
    std::vector<double> g(X + 2, 0.0);
    for (int x = 1; x <= X; ++x) {
        for (int y = 1; y <= X; ++y) {
            const std::size_t base = (x - 1) * stride1 + (y - 1) * stride2;
            double pair = 0.0;
            for (std::size_t k = 0; k < stride2; ++k) pair += s[base + k];
            m1[x] += pair;
            g[x] += pair / y;
        }
    }
    std::vector<double> q(X + 2, 0.0), h(X + 2, 0.0);
    double mass = 0.0;
    for (int x = 1; x <= X; ++x) {
        q[x] = d * m1[x] / x;
        mass += q[x];
        h[x] = m1[x] < kEmptyClass ? 0.0 : (x - 1) * (d - 1) * g[x] / m1[x];
    }
    q[0] = 1.0 - mass;

    const double dl = d * lambda;
    std::vector<int> x(d), nb(d), perm(d);
    std::vector<double> terms(d);
    for (std::size_t i = 0; i < n; ++i) {
        view.decode(i, x);
        if (!std::is_sorted(x.begin(), x.end())) continue;

        double create = lambda;
        for (int a = 0; a < d; ++a) create *= q[x[a] - 1];

        double lower = 0.0, upper = 0.0, hsum = 0.0;
        for (int a = 0; a < d; ++a) {
            nb = x;
            nb[a] = x[a] - 1;
            lower += view.at(nb);
            nb[a] = x[a] + 1;
            upper += view.at(nb) * (h[x[a] + 1] + static_cast<double>(x[a]) / (x[a] + 1));
            hsum += h[x[a]];
        }
        const double here = s[i];
        const double value = create + dl * (lower - d * here) + upper - here * (d + hsum);

        // Evaluate once per multiset and scatter, so permutation symmetry is exact.
        perm = x;
        do {
            out[view.index(perm)] = value;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

OdeSystem system(const ModelParams& p) {
    OdeSystem sys;
    const int d = p.d, X = p.xmax;
    sys.dim = checked_volume(d, X);
    sys.rhs = [d, X, lambda = p.lambda](std::span<const double> s, std::span<double> out) {
        rhs(s, d, X, lambda, out);
    };
    sys.project = clamp_nonnegative;
    sys.label = [d, X](std::size_t i) {
        const PairStateD shape(d, X);
        std::vector<int> x(d);
        shape.decode(i, x);
        std::string out = "pi(";
        for (int a = 0; a < d; ++a) out += (a ? "," : "") + std::to_string(x[a]);
        return out + ")";
    };
    return sys;
}

}  // namespace pair_ps_d

PairStateD pair_ps_rhs_d(const PairStateD& s, const ModelParams& p) {
    PairStateD out(s.d(), s.xmax());
    pair_ps_d::rhs(s.values(), s.d(), s.xmax(), p.lambda, out.values());
    return out;
}

double pair_ps_d_stable_dt(int d, int xmax, double lambda) {
    const double outflow = d * d * lambda + d + static_cast<double>(d) * (d - 1) * (xmax - 1);
    return 0.95 / outflow;
}

PairSolutionD pair_ps_d_fixed_point(const ModelParams& p, const IntegratorConfig& cfg) {
    validate_params(p);
    if (p.d < 2) throw ParamError("d", "pair approximation needs d >= 2");
    const auto sys = pair_ps_d::system(p);
    IntegratorConfig c = cfg;
    c.dt = std::min(cfg.dt, pair_ps_d_stable_dt(p.d, p.xmax, p.lambda));
    auto r = solve_fixed_point(sys, State(sys.dim, 0.0), c);
    PairStateD state(p.d, p.xmax, std::move(r.state));
    QueueDist dist(state.queue_lengths());
    return {std::move(state), std::move(dist), r.info()};
}

}  // namespace redq
