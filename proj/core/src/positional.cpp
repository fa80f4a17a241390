#include "redq/positional.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "redq/pair_ps.hpp"

namespace redq {

PositionalLayout::PositionalLayout(Discipline discipline, int K, int xmax)
    : discipline_(discipline), K_(K), xmax_(xmax), stride_(static_cast<std::size_t>(xmax) + 1) {
    if (discipline == Discipline::PS) throw ParamError("discipline", "PS has no positional model");
    if (xmax < 1) throw ParamError("xmax", "xmax must be >= 1");
    if (discipline == Discipline::LPS && K < 1) throw ParamError("K", "LPS needs K >= 1");
    if (discipline != Discipline::LPS) K_ = 1;
    slot_.assign(stride_ * stride_, -1);
    for (int len = 1; len <= xmax; ++len) {
        const int top = discipline == Discipline::LPS ? std::max(1, len - K_ + 1) : len;
        for (int pos = 1; pos <= top; ++pos) {
            slot_[static_cast<std::size_t>(pos) * stride_ + static_cast<std::size_t>(len)] =
                static_cast<int>(pos_.size());
            pos_.push_back(pos);
            len_.push_back(len);
        }
    }
}

int PositionalLayout::entry_position(int len) const {
    switch (discipline_) {
        case Discipline::FCFS: return len;
        case Discipline::LCFS: return 1;
        case Discipline::LPS: return 1 + std::max(0, len - K_);
        case Discipline::PS: break;
    }
    return 1;
}

double lps_p1(int K, int x) {
    if (x < 1 || K < 1) return 0.0;
    return std::min(static_cast<double>(x - 1) / x, static_cast<double>(K - 1) / K);
}

namespace {

/// Buddy-completion tables derived from one state.
struct Rates {
    const PositionalLayout& L;
    int P;
    std::size_t W;
    std::vector<double> m2;
    std::vector<double> head;  // weighted mass with the buddy in position 1
    std::vector<double> rr;    // head / m2
    std::vector<double> cum;   // kappa (FCFS, LCFS) or psi (LPS) at [xa * W + xb]

    Rates(std::span<const double> v, const PositionalLayout& layout)
        : L(layout), P(layout.slots()), W(static_cast<std::size_t>(layout.xmax()) + 2) {
        const int K = L.K();
        const bool lps = L.discipline() == Discipline::LPS;
        std::vector<double> w(P);
        for (int b = 0; b < P; ++b) w[b] = L.pos(b) == 1 ? (lps ? 1.0 / std::min(K, L.len(b)) : 1.0) : 0.0;

        m2.assign(P, 0.0);
        head.assign(P, 0.0);
        rr.assign(P, 0.0);
        for (int a = 0; a < P; ++a) {
            const double* row = v.data() + static_cast<std::size_t>(a) * P;
            double sum = 0.0, h = 0.0;
            for (int b = 0; b < P; ++b) {
                sum += row[b];
                h += row[b] * w[b];
            }
            m2[a] = sum;
            head[a] = h;
            rr[a] = sum < kEmptyClass ? 0.0 : h / sum;
        }

        cum.assign(W * W, 0.0);
        for (int xb = 1; xb <= L.xmax(); ++xb) {
            double acc = 0.0;
            for (int xa = 1; xa <= L.xmax() + 1; ++xa) {
                const int a = L.slot(xa, xb);
                const double r = a >= 0 ? rr[a] : 0.0;
                if (lps && xa == 1) {
                    // In-service slot: min(K, xb) jobs share it, K of them once xb > K.
                    cum[1 * W + xb] = std::min(K, xb) * r;
                    acc = K * r;
                    continue;
                }
                acc += r;
                cum[xa * W + xb] = acc;
            }
        }
    }

    double cumulative(int xa, int xb) const {
        if (xa < 1 || xb < 1 || xb > L.xmax()) return 0.0;
        return cum[std::min<std::size_t>(static_cast<std::size_t>(xa), W - 1) * W + xb];
    }
    double rate(int pos, int len) const {
        const int a = L.slot(pos, len);
        return a >= 0 ? rr[a] : 0.0;
    }
    /// Total buddy-completion rate of all other jobs in the queue of slot a.
    double top_cumulative(int len) const {
        return cumulative(L.discipline() == Discipline::LPS ? std::max(1, len - L.K() + 1) : len, len);
    }
};

std::shared_ptr<const PositionalLayout> make_layout(const ModelParams& p) {
    return std::make_shared<const PositionalLayout>(p.discipline, p.K, p.xmax);
}

}  // namespace

// ---------------------------------------------------------------------------

PositionalState::PositionalState(std::shared_ptr<const PositionalLayout> layout) : layout_(std::move(layout)) {
    const auto P = static_cast<std::size_t>(layout_->slots());
    data_.assign(P * P, 0.0);
}

PositionalState::PositionalState(std::shared_ptr<const PositionalLayout> layout, std::vector<double> values)
    : layout_(std::move(layout)), data_(std::move(values)) {
    const auto P = static_cast<std::size_t>(layout_->slots());
    if (data_.size() != P * P) throw ParamError("xmax", "PositionalState value count does not match layout");
}

double PositionalState::at(int x1, int y1, int x2, int y2) const {
    const int a = layout_->slot(x1, x2), b = layout_->slot(y1, y2);
    if (a < 0 || b < 0) return 0.0;
    return data_[static_cast<std::size_t>(a) * layout_->slots() + b];
}

void PositionalState::set(int x1, int y1, int x2, int y2, double v) {
    const int a = layout_->slot(x1, x2), b = layout_->slot(y1, y2);
    if (a < 0 || b < 0) throw ParamError("xmax", "coordinate outside the feasibility mask");
    data_[static_cast<std::size_t>(a) * layout_->slots() + b] = v;
}

void PositionalState::set_sym(int x1, int y1, int x2, int y2, double v) {
    set(x1, y1, x2, y2, v);
    set(y1, x1, y2, x2, v);
}

PositionalMarginals positional_marginals(const PositionalState& s) {
    const auto& L = s.layout();
    const int P = L.slots(), X = L.xmax();
    const Rates r(s.values(), L);
    PositionalMarginals m;
    m.m2 = r.m2;
    m.m3_head.assign(P, 0.0);
    for (int a = 0; a < P; ++a) {
        for (int b = 0; b < P; ++b) {
            if (L.pos(b) == 1) m.m3_head[a] += s.values()[static_cast<std::size_t>(a) * P + b];
        }
    }
    m.pos.assign(X + 2, 0.0);
    m.ql.assign(X + 2, 0.0);
    for (int a = 0; a < P; ++a) {
        m.pos[L.pos(a)] += m.m2[a];
        m.ql[L.len(a)] += m.m2[a];
    }
    m.q.assign(X + 1, 0.0);
    m.q_from_pos.assign(X + 1, 0.0);
    double sum = 0.0, sum_pos = 0.0;
    for (int x = 1; x <= X; ++x) {
        m.q[x] = 2.0 * m.ql[x] / x;
        m.q_from_pos[x] = 2.0 * (m.pos[x] - m.pos[x + 1]);
        sum += m.q[x];
        sum_pos += m.q_from_pos[x];
    }
    m.q[0] = 1.0 - sum;
    m.q_from_pos[0] = 1.0 - sum_pos;
    return m;
}

std::vector<double> PositionalState::queue_lengths() const { return positional_marginals(*this).q; }

double PositionalState::max_asymmetry() const {
    const int P = layout_->slots();
    double worst = 0.0;
    for (int a = 0; a < P; ++a) {
        for (int b = a + 1; b < P; ++b) {
            worst = std::max(worst, std::abs(data_[static_cast<std::size_t>(a) * P + b] -
                                             data_[static_cast<std::size_t>(b) * P + a]));
        }
    }
    return worst;
}

double kappa(const PositionalState& s, int x_a, int x_b) {
    if (s.layout().discipline() == Discipline::LPS) throw ParamError("discipline", "kappa is defined for FCFS and LCFS");
    if (x_a < 1) return 0.0;
    return Rates(s.values(), s.layout()).cumulative(x_a, x_b);
}

double lps_rate(const PositionalState& s, int x_prime, int x2) {
    if (s.layout().discipline() != Discipline::LPS) throw ParamError("discipline", "lps_rate needs an LPS state");
    return Rates(s.values(), s.layout()).rate(x_prime, x2);
}

double lps_psi(const PositionalState& s, int x_a, int x_b) {
    if (s.layout().discipline() != Discipline::LPS) throw ParamError("discipline", "lps_psi needs an LPS state");
    return Rates(s.values(), s.layout()).cumulative(x_a, x_b);
}

namespace positional {

void rhs(std::span<const double> s, const PositionalLayout& L, double lambda, std::span<double> out) {
    const int P = L.slots();
    const int X = L.xmax();
    const bool lps = L.discipline() == Discipline::LPS;
    const bool lcfs = L.discipline() == Discipline::LCFS;
    const Rates R(s, L);

    std::vector<double> q(X + 1, 0.0);
    {
        std::vector<double> ql(X + 1, 0.0);
        for (int a = 0; a < P; ++a) ql[L.len(a)] += R.m2[a];
        double mass = 0.0;
        for (int x = 1; x <= X; ++x) {
            q[x] = 2.0 * ql[x] / x;
            mass += q[x];
        }
        q[0] = 1.0 - mass;
    }

    // Per-slot transitions. Index P stands for "no source" and reads zero.
    std::vector<int> arrive(P), shift(P), shrink(P);
    std::vector<double> shift_rate(P), shrink_rate(P), leave(P), create(P);
    for (int a = 0; a < P; ++a) {
        const int x1 = L.pos(a), x2 = L.len(a);
        auto or_none = [P](int i) { return i >= 0 ? i : P; };
        arrive[a] = or_none(lcfs ? L.slot(x1 - 1, x2 - 1) : L.slot(x1, x2 - 1));
        shift[a] = or_none(L.slot(x1 + 1, x2 + 1));
        shrink[a] = or_none(L.slot(x1, x2 + 1));
        shift_rate[a] = 1.0 + R.cumulative(x1, x2 + 1);
        const double others = R.top_cumulative(x2 + 1);
        if (lps && x1 == 1) {
            shrink_rate[a] = lps_p1(L.K(), x2 + 1) + others - R.rate(1, x2 + 1);
        } else {
            shrink_rate[a] = others - R.cumulative(x1, x2 + 1);
        }
        leave[a] = R.top_cumulative(x2) - R.rr[a];
        create[a] = x1 == L.entry_position(x2) ? q[x2 - 1] : 0.0;
    }

    const std::size_t Pp = static_cast<std::size_t>(P) + 1;
    std::vector<double> v(Pp * Pp, 0.0);
    for (int a = 0; a < P; ++a) {
        std::copy_n(s.data() + static_cast<std::size_t>(a) * P, P, v.data() + a * Pp);
    }

    const double two_l = 2.0 * lambda;
    const double base = 4.0 * lambda + 2.0;
    for (int a = 0; a < P; ++a) {
        const double* row = v.data() + a * Pp;
        const double* row_arr = v.data() + arrive[a] * Pp;
        const double* row_shift = v.data() + shift[a] * Pp;
        const double* row_shrink = v.data() + shrink[a] * Pp;
        const double ca = create[a], sa = shift_rate[a], ha = shrink_rate[a], la = leave[a];
        double* dst = out.data() + static_cast<std::size_t>(a) * P;
        for (int b = 0; b < P; ++b) {
            // Mirrored contributions are grouped so that (a,b) and (b,a) round identically.
            const double born = lambda * (ca * create[b]);
            const double arr = two_l * (row_arr[b] + row[arrive[b]]);
            const double side_a = row_shift[b] * sa + row_shrink[b] * ha;
            const double side_b = row[shift[b]] * shift_rate[b] + row[shrink[b]] * shrink_rate[b];
            dst[b] = born + arr + (side_a + side_b) - row[b] * (base + (la + leave[b]));
        }
    }
}

std::shared_ptr<const PositionalLayout> layout_for(const ModelParams& p) { return make_layout(p); }

OdeSystem system(const ModelParams& p) {
    auto layout = make_layout(p);
    OdeSystem sys;
    const auto P = static_cast<std::size_t>(layout->slots());
    sys.dim = P * P;
    sys.rhs = [layout, lambda = p.lambda](std::span<const double> s, std::span<double> out) {
        rhs(s, *layout, lambda, out);
    };
    sys.project = clamp_nonnegative;
    sys.label = [layout, P](std::size_t i) {
        const int a = static_cast<int>(i / P), b = static_cast<int>(i % P);
        return "v(" + std::to_string(layout->pos(a)) + "," + std::to_string(layout->pos(b)) + "," +
               std::to_string(layout->len(a)) + "," + std::to_string(layout->len(b)) + ")";
    };
    return sys;
}

}  // namespace positional

PositionalState positional_rhs(const PositionalState& s, const ModelParams& p) {
    PositionalState out(s.layout_ptr());
    positional::rhs(s.values(), s.layout(), p.lambda, out.values());
    return out;
}

PositionalSolution positional_fixed_point(const ModelParams& p, const IntegratorConfig& cfg) {
    validate_params(p);
    if (p.d != 2) throw ParamError("d", "positional models are defined for d = 2 only");
    auto layout = make_layout(p);
    const auto sys = positional::system(p);
    auto r = solve_fixed_point(sys, State(sys.dim, 0.0), cfg);
    PositionalState state(layout, std::move(r.state));
    QueueDist dist(state.queue_lengths());
    return {std::move(state), std::move(dist), r.info()};
}

std::string to_csv(const PositionalState& s) {
    const auto& L = s.layout();
    const int P = L.slots();
    std::ostringstream os;
    os.precision(17);
    os << "x1,y1,x2,y2,value\n";
    for (int a = 0; a < P; ++a) {
        for (int b = 0; b < P; ++b) {
            const double v = s.values()[static_cast<std::size_t>(a) * P + b];
            if (v == 0.0) continue;
            os << L.pos(a) << ',' << L.pos(b) << ',' << L.len(a) << ',' << L.len(b) << ',' << v << '\n';
        }
    }
    return os.str();
}

}  // namespace redq
