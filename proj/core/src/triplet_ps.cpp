#include "redq/triplet_ps.hpp"

#include <algorithm>
#include <cmath>

#include "redq/pair_ps.hpp"

namespace redq {

std::size_t TripletState::flat_size(int xmax) {
    const auto X = static_cast<std::size_t>(xmax);
    return X * (X - 1) * X + 1;
}

TripletState::TripletState(int xmax) : xmax_(xmax) {
    if (xmax < 2) throw ParamError("xmax", "TripletState needs xmax >= 2");
    data_.assign(flat_size(xmax), 0.0);
}

TripletState::TripletState(int xmax, std::vector<double> values) : xmax_(xmax), data_(std::move(values)) {
    if (xmax < 2) throw ParamError("xmax", "TripletState needs xmax >= 2");
    if (data_.size() != flat_size(xmax)) throw ParamError("xmax", "TripletState value count does not match xmax");
}

namespace {

/// Marginals of a triplet state on a zero-padded grid.
struct Marginals {
    int X = 0;
    std::size_t W = 0;
    double pi11 = 0.0;
    std::vector<double> S;    // S(x,y) = sum_z c(x,y,z)
    std::vector<double> A;    // A(x,y) = sum_z c(x,y,z) / z
    std::vector<double> mid;  // sum_x S(x,y)
    std::vector<double> q;    // q(0..X), zero beyond

    double s(int x, int y) const { return S[x * W + y]; }
    double a(int x, int y) const { return A[x * W + y]; }

    Marginals(std::span<const double> c, int xmax) : X(xmax), W(static_cast<std::size_t>(xmax) + 2) {
        S.assign(W * W, 0.0);
        A.assign(W * W, 0.0);
        mid.assign(W, 0.0);
        q.assign(W, 0.0);
        pi11 = c.back();
        std::size_t i = 0;
        for (int x = 1; x <= X; ++x) {
            for (int y = 2; y <= X; ++y) {
                double sum = 0.0, inv = 0.0;
                for (int z = 1; z <= X; ++z, ++i) {
                    sum += c[i];
                    inv += c[i] / z;
                }
                S[x * W + y] = sum;
                A[x * W + y] = inv;
                mid[y] += sum;
            }
        }
        double mass = 0.0;
        double q1 = 2.0 * pi11;
        for (int x = 2; x <= X; ++x) q1 += 2.0 * s(1, x) / (x - 1);
        q[1] = q1;
        mass += q1;
        for (int y = 2; y <= X; ++y) {
            q[y] = 2.0 * mid[y] / (static_cast<double>(y) * (y - 1));
            mass += q[y];
        }
        q[0] = 1.0 - mass;
    }

    /// c(x|y).
    double cond(int x, int y) const {
        if (x < 1 || x > X || y < 1 || y > X) return 0.0;
        if (y >= 2) return mid[y] < kEmptyClass ? 0.0 : s(x, y) / mid[y];
        if (q[1] < kEmptyClass) return 0.0;
        if (x == 1) return 2.0 * pi11 / q[1];
        return 2.0 * s(1, x) / ((x - 1) * q[1]);
    }

    /// sum_v c(v|y,x) (x-1)/v with x the middle of (y,x,v).
    double end_rate(int y, int x) const {
        if (x < 2 || x > X || y < 1 || y > X) return 0.0;
        const double den = s(y, x);
        return den < kEmptyClass ? 0.0 : (x - 1) * a(y, x) / den;
    }

    /// sum_v c(v|x,y,z) (y-2)/v.
    double mid_rate(int x, int y, int z) const {
        if (y < 3 || y > X) return 0.0;
        const double den = s(x, y) + s(z, y);
        return den < kEmptyClass ? 0.0 : (y - 2) * (a(x, y) + a(z, y)) / den;
    }
};

}  // namespace

double TripletState::pair(int x, int y) const {
    if (x < 1 || y < 1 || x > xmax_ || y > xmax_) return 0.0;
    if (x == 1 && y == 1) return pi11();
    if (y == 1) std::swap(x, y);
    double sum = 0.0;
    for (int z = 1; z <= xmax_; ++z) sum += at(x, y, z);
    return sum / (y - 1);
}

std::vector<double> TripletState::queue_lengths() const {
    const Marginals m(data_, xmax_);
    return {m.q.begin(), m.q.begin() + xmax_ + 1};
}

double TripletState::max_asymmetry() const {
    double worst = 0.0;
    for (int y = 2; y <= xmax_; ++y) {
        for (int x = 1; x <= xmax_; ++x) {
            for (int z = x + 1; z <= xmax_; ++z) worst = std::max(worst, std::abs(at(x, y, z) - at(z, y, x)));
        }
    }
    return worst;
}

double cond_degree(const TripletState& s, int x, int y) {
    return Marginals(s.values(), s.xmax()).cond(x, y);
}

double cond_degree_triplet(const TripletState& s, int v, int x, int y, int z) {
    if (y < 2) return 0.0;
    double den = 0.0;
    for (int w = 1; w <= s.xmax(); ++w) den += s.at(x, y, w) + s.at(w, y, z);
    if (den < kEmptyClass) return 0.0;
    return (s.at(x, y, v) + s.at(v, y, z)) / den;
}

double triplet_end_rate(const TripletState& s, int y, int x) {
    double den = 0.0;
    for (int w = 1; w <= s.xmax(); ++w) den += s.at(y, x, w);
    if (den < kEmptyClass) return 0.0;
    double rate = 0.0;
    for (int v = 1; v <= s.xmax(); ++v) rate += s.at(y, x, v) / den * (x - 1) / v;
    return rate;
}

double triplet_middle_rate(const TripletState& s, int x, int y) {
    const double pxy = s.pair(x, y);
    if (y < 2 || pxy < kEmptyClass) return 0.0;
    double total = 0.0;
    for (int z = 1; z <= s.xmax(); ++z) {
        const double c = s.at(x, y, z);
        if (c == 0.0) continue;
        double inner = 0.0;
        for (int v = 1; v <= s.xmax(); ++v) inner += cond_degree_triplet(s, v, x, y, z) / v;
        total += c * inner;
    }
    return total / pxy;
}

namespace triplet_ps {

void rhs(std::span<const double> s, int xmax, double lambda, std::span<double> out) {
    const int X = xmax;
    const Marginals m(s, X);
    const std::size_t W = m.W;

    // Zero-padded copy so that neighbours outside the stored range read 0.
    std::vector<double> c(W * W * W, 0.0);
    auto at = [&](int x, int y, int z) -> double& { return c[(x * W + y) * W + z]; };
    {
        std::size_t i = 0;
        for (int x = 1; x <= X; ++x) {
            for (int y = 2; y <= X; ++y) {
                for (int z = 1; z <= X; ++z, ++i) at(x, y, z) = s[i];
            }
        }
    }

    // k(y, x) for end degree x = 1..X+1 next to a middle degree y.
    std::vector<double> k(W * W, 0.0);
    for (int y = 2; y <= X; ++y) {
        for (int x = 1; x <= X; ++x) k[y * W + x] = m.end_rate(y, x);
    }

    const double six_l = 6.0 * lambda, two_l = 2.0 * lambda;
    std::size_t i = 0;
    for (int x = 1; x <= X; ++x) {
        const double stay_x = static_cast<double>(x) / (x + 1);
        for (int y = 2; y <= X; ++y) {
            const double born = lambda * (y - 1) * m.q[y - 1];
            const double stay_y = static_cast<double>(y - 1) / (y + 1);
            for (int z = 1; z <= X; ++z, ++i) {
                const double stay_z = static_cast<double>(z) / (z + 1);
                const double here = at(x, y, z);
                const double up_x = at(x + 1, y, z), up_z = at(x, y, z + 1), up_y = at(x, y + 1, z);

                const double create =
                    born * (m.q[x - 1] * m.cond(z, y - 1) + m.q[z - 1] * m.cond(x, y - 1));
                const double arrive =
                    two_l * ((at(x - 1, y, z) + at(x, y, z - 1)) + at(x, y - 1, z)) - six_l * here;
                const double serve = (up_x * stay_x + up_z * stay_z) + up_y * stay_y - 3.0 * here;
                const double outside =
                    (up_x * k[y * W + x + 1] + up_z * k[y * W + z + 1]) + up_y * m.mid_rate(x, y + 1, z) -
                    here * ((k[y * W + x] + k[y * W + z]) + m.mid_rate(x, y, z));
                out[i] = create + arrive + serve + outside;
            }
        }
    }

    double inflow = 0.0;
    for (int z = 1; z <= X; ++z) inflow += at(1, 2, z) * (0.5 + 1.0 / z);
    out[i] = lambda * m.q[0] * m.q[0] - (2.0 + 4.0 * lambda) * m.pi11 + 2.0 * inflow;
}

OdeSystem system(const ModelParams& p) {
    OdeSystem sys;
    const int X = p.xmax;
    sys.dim = TripletState::flat_size(X);
    sys.rhs = [X, lambda = p.lambda](std::span<const double> s, std::span<double> out) {
        rhs(s, X, lambda, out);
    };
    sys.project = clamp_nonnegative;
    sys.label = [X, n = sys.dim](std::size_t i) -> std::string {
        if (i + 1 == n) return "pi(1,1)";
        const auto Xs = static_cast<std::size_t>(X);
        const std::size_t z = i % Xs, rest = i / Xs;
        const std::size_t y = rest % (Xs - 1), x = rest / (Xs - 1);
        return "c(" + std::to_string(x + 1) + "," + std::to_string(y + 2) + "," + std::to_string(z + 1) + ")";
    };
    return sys;
}

}  // namespace triplet_ps

TripletState triplet_rhs(const TripletState& s, const ModelParams& p) {
    TripletState out(s.xmax());
    triplet_ps::rhs(s.values(), s.xmax(), p.lambda, out.values());
    return out;
}

TripletSolution triplet_fixed_point(const ModelParams& p, const IntegratorConfig& cfg) {
    validate_params(p);
    if (p.d != 2) throw ParamError("d", "the triplet approximation is defined for d = 2 only");
    const auto sys = triplet_ps::system(p);
    auto r = solve_fixed_point(sys, State(sys.dim, 0.0), cfg);
    TripletState state(p.xmax, std::move(r.state));
    QueueDist dist(state.queue_lengths());
    return {std::move(state), std::move(dist), r.info()};
}

}  // namespace redq
