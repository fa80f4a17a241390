// Acceptance runner. Usage: redq_acceptance [criterion ...]
// Prints detail lines followed by exactly one PASS/FAIL line per criterion and
// exits non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "properties.hpp"
#include "redq/exact_small.hpp"
#include "redq/meanfield.hpp"
#include "redq/pair_ps.hpp"
#include "redq/positional.hpp"
#include "redq/simulator.hpp"
#include "redq/triplet_ps.hpp"
#include "reference.hpp"

using namespace redq;
using redq::testing::close_to;

namespace {

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Verdict {
    bool ok = true;
    std::string note;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!note.empty()) note += "; ";
            note += what;
        }
    }
};

void detail(const char* fmt, auto... args) {
    std::printf("  ");
    std::printf(fmt, args...);
    std::printf("\n");
    std::fflush(stdout);
}

int hw_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Mean within mean_tol and each listed probability within max(5e-4, 1%).
bool check_row(const char* label, const QueueDist& q, const ref::Row& r, double mean_tol, bool probabilities,
               Verdict& v) {
    bool ok = std::abs(q.mean() - r.mean) <= mean_tol;
    detail("%s lambda=%.1f mean %.6f (ref %.5g, |diff| %.2e, tol %.0e)", label, r.lambda, q.mean(), r.mean,
           std::abs(q.mean() - r.mean), mean_tol);
    if (probabilities) {
        for (std::size_t i = 0; i < ref::kListedX.size(); ++i) {
            const int x = ref::kListedX[i];
            const bool pi_ok = close_to(q[x], r.q[i], 5e-4, 0.01);
            if (!pi_ok) detail("%s lambda=%.1f q(%d) %.6e vs ref %.5e out of tolerance", label, r.lambda, x, q[x], r.q[i]);
            ok = ok && pi_ok;
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s at lambda=%.1f", label, r.lambda);
    v.require(ok, buf);
    return ok;
}

Verdict criterion1() {
    Verdict v;
    Stopwatch sw;
    const double half5 = 0.5e-5, half4 = 0.5e-4;

    const auto ps = ps_n3_stationary(0.5, 20);
    detail("PS chain Kcap=20: mean %.6f (ref %.5f, |diff| %.1e, tol %.0e)", ps.mean(), ref::kN3PsMean,
           std::abs(ps.mean() - ref::kN3PsMean), half5);
    v.require(std::abs(ps.mean() - ref::kN3PsMean) <= half5, "PS mean");
    for (int x = 1; x <= 7; ++x) {
        const double d = std::abs(ps[x] - ref::kN3PsQ[x - 1]);
        detail("PS q(%d) %.6f ref %.5f |diff| %.1e", x, ps[x], ref::kN3PsQ[x - 1], d);
        v.require(d <= half5, "PS q(" + std::to_string(x) + ")");
    }
    double listed_mean = 0.0;
    for (int x = 1; x <= 7; ++x) listed_mean += x * ref::kN3PsQ[x - 1];
    for (int x = 8; x < static_cast<int>(ps.size()); ++x) listed_mean += x * ps[x];
    detail("info: reference q(1..7) plus chain tail give mean %.5f; reference simulation mean %.5f", listed_mean,
           ref::kN3PsSimMean);

    const int mcap = 12;
    const auto fcfs = fcfs_n3_stationary(0.5, mcap);
    detail("FCFS truncated chain Mcap=%d: mean %.6f (ref %.5f, |diff| %.1e, tol %.0e)", mcap, fcfs.mean(),
           ref::kN3FcfsMean, std::abs(fcfs.mean() - ref::kN3FcfsMean), half4);
    v.require(std::abs(fcfs.mean() - ref::kN3FcfsMean) <= half4, "FCFS mean (truncated chain)");
    for (int x = 1; x <= 7; ++x) {
        const double d = std::abs(fcfs[x] - ref::kN3FcfsQ[x - 1]);
        detail("FCFS q(%d) %.6f ref %.5f |diff| %.1e", x, fcfs[x], ref::kN3FcfsQ[x - 1], d);
        v.require(d <= half4, "FCFS q(" + std::to_string(x) + ")");
    }
    const auto pf = fcfs_n3_product_form(0.5);
    std::string qs;
    for (int x = 1; x <= 7; ++x) {
        char b[16];
        std::snprintf(b, sizeof b, " %.5f", pf[x]);
        qs += b;
    }
    detail("info: untruncated product form mean %.5f, q(1..7)%s", pf.mean(), qs.c_str());

    detail("runtime %.1f s (limit 30 s)", sw.seconds());
    v.require(sw.seconds() < 30.0, "runtime");
    return v;
}

Verdict criterion2() {
    Verdict v;
    Stopwatch sw;
    for (const auto& r : ref::kMeanField) {
        ModelParams p;
        p.lambda = r.lambda;
        check_row("mean field", mf_fixed_point(p), r, 1e-3, true, v);
    }
    detail("runtime %.3f s (limit 1 s)", sw.seconds());
    v.require(sw.seconds() < 1.0, "runtime");
    return v;
}

Verdict criterion3() {
    Verdict v;
    for (const auto& r : ref::kPairPs) {
        Stopwatch sw;
        ModelParams p;
        p.lambda = r.lambda;
        p.xmax = 50;
        const auto s = pair_ps_fixed_point(p);
        check_row("pair-PS", s.dist, r, 2e-3, true, v);
        detail("converged=%d t=%.1f runtime %.2f s (limit 120 s)", s.info.converged, s.info.t_used, sw.seconds());
        v.require(s.info.converged && sw.seconds() < 120.0, "pair-PS convergence/runtime");
    }
    return v;
}

Verdict criterion4() {
    Verdict v;
    for (const auto& r : ref::kTripletPs) {
        Stopwatch sw;
        ModelParams p;
        p.lambda = r.lambda;
        p.xmax = 30;
        const auto s = triplet_fixed_point(p);
        check_row("triplet xmax=30", s.dist, r, 3e-3, false, v);
        detail("converged=%d runtime %.1f s (limit 1800 s)", s.info.converged, sw.seconds());
        v.require(s.info.converged && sw.seconds() < 1800.0, "triplet convergence/runtime");
    }
    for (const auto& r : ref::kTripletPs) {
        Stopwatch sw;
        ModelParams p;
        p.lambda = r.lambda;
        p.xmax = 20;
        const auto s = triplet_fixed_point(p);
        check_row("triplet xmax=20", s.dist, r, 1e-2, false, v);
        detail("runtime %.1f s (limit 180 s)", sw.seconds());
        v.require(sw.seconds() < 180.0, "triplet smoke runtime");
    }
    return v;
}

Verdict criterion5() {
    Verdict v;
    struct Set {
        const char* label;
        Discipline d;
        int K;
        const std::array<ref::Row, 3>* rows;
    };
    const Set sets[] = {{"pair-FCFS", Discipline::FCFS, 1, &ref::kPairFcfs},
                        {"pair-LPS(2)", Discipline::LPS, 2, &ref::kPairLps2},
                        {"pair-LCFS", Discipline::LCFS, 1, &ref::kPairLcfs}};
    for (const auto& set : sets) {
        for (const auto& r : *set.rows) {
            Stopwatch sw;
            ModelParams p;
            p.lambda = r.lambda;
            p.discipline = set.d;
            p.K = set.K;
            p.xmax = 40;
            const auto s = positional_fixed_point(p);
            check_row(set.label, s.dist, r, 3e-3, true, v);
            detail("converged=%d runtime %.1f s (limit 1200 s)", s.info.converged, sw.seconds());
            v.require(s.info.converged && sw.seconds() < 1200.0, "positional convergence/runtime");
        }
    }
    return v;
}

Verdict criterion6() {
    Verdict v;
    for (const auto& r : ref::kFcfsAsymptotic) {
        const double a = fcfs_asymptotic_mean(r.lambda);
        detail("2 lambda E[T] at lambda=%.1f: %.6f (ref %.5g, |diff| %.1e)", r.lambda, a, r.mean, std::abs(a - r.mean));
        v.require(std::abs(a - r.mean) <= 0.5e-4, "asymptotic mean");
        ModelParams p;
        p.lambda = r.lambda;
        p.discipline = Discipline::FCFS;
        p.xmax = 40;
        const auto s = positional_fixed_point(p);
        const double rel = std::abs(s.dist.mean() - a) / a;
        detail("pair-FCFS mean %.6f differs from it by %.3f%% (limit 1%%)", s.dist.mean(), 100.0 * rel);
        v.require(rel < 0.01, "pair-FCFS vs asymptotic");
    }
    return v;
}

SimStats simulate(Discipline d, int K, double lambda, int n, int reps, double horizon) {
    SimConfig cfg;
    cfg.params.lambda = lambda;
    cfg.params.d = 2;
    cfg.params.discipline = d;
    cfg.params.K = K;
    cfg.n = n;
    cfg.horizon = horizon;
    cfg.replications = reps;
    cfg.seed = 20240901;
    cfg.threads = hw_threads();
    return run_replications(cfg);
}

Verdict criterion7() {
    Verdict v;
    Stopwatch total;
    for (const auto& r : ref::kSimN1000) {
        Stopwatch sw;
        const auto d = *parse_discipline(r.discipline);
        const auto s = simulate(d, r.K, 0.9, 1000, 4, 1e5);
        const double tol = std::max(s.ci_halfwidth, 0.01 * r.mean);
        detail("sim %s n=1000: mean %.4f +- %.4f (ref %.4f, |diff| %.4f, tol %.4f) %.0f s", std::string(r.discipline).c_str(),
               s.mean, s.ci_halfwidth, r.mean, std::abs(s.mean - r.mean), tol, sw.seconds());
        v.require(std::abs(s.mean - r.mean) <= tol, std::string(r.discipline));
    }
    detail("runtime %.0f s (limit 1800 s)", total.seconds());
    v.require(total.seconds() < 1800.0, "runtime");
    return v;
}

Verdict criterion8() {
    Verdict v;
    ModelParams p;
    p.lambda = 0.9;
    const double pair = pair_ps_fixed_point(p).dist.mean();
    // The expected gap is ~0.007; four replications give a half-width near
    // 0.005, too wide to resolve it at 3 CI, so this check uses 32.
    const auto s = simulate(Discipline::PS, 1, 0.9, 1000, 32, 1e5);
    const double gap = s.mean - pair;
    detail("sim PS n=1000 (%d reps) mean %.4f +- %.4f, pair %.4f, gap %.4f, 3 x CI %.4f", s.replications, s.mean, s.ci_halfwidth, pair, gap,
           3.0 * s.ci_halfwidth);
    v.require(gap > 0.0, "simulation not above pair");
    v.require(std::abs(gap) > 3.0 * s.ci_halfwidth, "gap within 3 CI half-widths");
    return v;
}

Verdict criterion9() {
    Verdict v;
    Stopwatch sw;
    using namespace redq::testing;

    // Fixed points shared by the mass and ordering checks.
    struct Solved {
        double lambda;
        double mf_q0, ps_q0, fcfs_q0, lps_q0, lcfs_q0;
        double ps_mean, fcfs_mean, lps_mean, lcfs_mean;
        double asym;
    };
    std::vector<Solved> solved;
    for (double lambda : {0.7, 0.9}) {
        Solved s{};
        s.lambda = lambda;
        ModelParams p;
        p.lambda = lambda;
        s.mf_q0 = mf_fixed_point(p).q()[0];
        const auto ps = pair_ps_fixed_point(p);
        s.ps_q0 = ps.dist[0];
        s.ps_mean = ps.dist.mean();
        s.asym = ps.state.max_asymmetry();
        p.xmax = 40;
        auto run = [&](Discipline d, int K, double& q0, double& mean) {
            p.discipline = d;
            p.K = K;
            const auto r = positional_fixed_point(p);
            q0 = r.dist[0];
            mean = r.dist.mean();
            s.asym = std::max(s.asym, r.state.max_asymmetry());
        };
        run(Discipline::FCFS, 1, s.fcfs_q0, s.fcfs_mean);
        run(Discipline::LPS, 2, s.lps_q0, s.lps_mean);
        run(Discipline::LCFS, 1, s.lcfs_q0, s.lcfs_mean);
        solved.push_back(s);
    }

    for (const auto& s : solved) {
        const double target = 1.0 - s.lambda;
        const double worst = std::max({std::abs(s.mf_q0 - target), std::abs(s.ps_q0 - target),
                                       std::abs(s.fcfs_q0 - target), std::abs(s.lps_q0 - target),
                                       std::abs(s.lcfs_q0 - target)});
        detail("q(0) - (1-lambda) at lambda=%.1f: mf %.1e pair-ps %.1e fcfs %.1e lps2 %.1e lcfs %.1e", s.lambda,
               s.mf_q0 - target, s.ps_q0 - target, s.fcfs_q0 - target, s.lps_q0 - target, s.lcfs_q0 - target);
        v.require(worst < 1e-5, "fixed-point q(0)");
        const bool ordered = s.fcfs_mean <= s.lps_mean && s.lps_mean <= s.ps_mean && s.ps_mean <= s.lcfs_mean;
        detail("ordering at lambda=%.1f: fcfs %.4f <= lps2 %.4f <= ps %.4f <= lcfs %.4f", s.lambda, s.fcfs_mean,
               s.lps_mean, s.ps_mean, s.lcfs_mean);
        v.require(ordered, "discipline ordering");
        detail("fixed-point asymmetry (pair, positional) %.1e", s.asym);
        v.require(s.asym < 1e-12, "symmetry at fixed points");
    }

    // Symmetry along trajectories.
    {
        ModelParams p;
        p.lambda = 0.9;
        p.xmax = 30;
        IntegratorConfig cfg;
        double worst = 0.0;
        auto pair_sys = pair_ps::system(p);
        auto ts = State(pair_sys.dim, 0.0);
        for (double span : {1.0, 9.0, 90.0}) {
            ts = euler_integrate(pair_sys, ts, cfg, span);
            worst = std::max(worst, PairState(p.xmax, ts).max_asymmetry());
        }
        p.xmax = 15;
        auto tri_sys = triplet_ps::system(p);
        auto tr = euler_integrate(tri_sys, State(tri_sys.dim, 0.0), cfg, 50.0);
        worst = std::max(worst, TripletState(p.xmax, tr).max_asymmetry());
        for (Discipline d : {Discipline::FCFS, Discipline::LPS, Discipline::LCFS}) {
            p.discipline = d;
            p.K = 2;
            auto sys = positional::system(p);
            auto st = euler_integrate(sys, State(sys.dim, 0.0), cfg, 50.0);
            worst = std::max(worst, PositionalState(positional::layout_for(p), st).max_asymmetry());
        }
        detail("trajectory asymmetry (pair, triplet, positional) %.1e", worst);
        v.require(worst < 1e-12, "symmetry along trajectories");
    }

    // Transient mass balance on trajectory snapshots.
    {
        ModelParams p;
        p.lambda = 0.9;
        p.xmax = 20;
        IntegratorConfig cfg;
        double ratio = 0.0;
        auto sys = pair_ps::system(p);
        for (double t : {0.5, 5.0, 50.0}) {
            const PairState s(p.xmax, euler_integrate(sys, State(sys.dim, 0.0), cfg, t));
            const auto mb = pair_mass_balance(s, p.lambda);
            ratio = std::max(ratio, mb.error / mb.bound);
        }
        for (Discipline d : {Discipline::FCFS, Discipline::LPS, Discipline::LCFS}) {
            p.discipline = d;
            p.K = 2;
            auto psys = positional::system(p);
            for (double t : {0.5, 5.0, 50.0}) {
                const PositionalState s(positional::layout_for(p), euler_integrate(psys, State(psys.dim, 0.0), cfg, t));
                const auto mb = positional_mass_balance(s, p.lambda);
                ratio = std::max(ratio, mb.error / mb.bound);
            }
        }
        detail("mass balance: worst error / (2 x boundary flux) = %.3f", ratio);
        v.require(ratio <= 1.0, "transient mass balance");
    }

    // Mean-field collapse on product-form states.
    {
        const auto q = geometric_q(60, 0.5);
        const double e_pair = pair_mean_field_collapse(q, 0.9, 50);
        const double e_fcfs = positional_mean_field_collapse(q, 0.9, Discipline::FCFS, 50);
        detail("mean-field collapse: pair-PS %.1e, pair-FCFS %.1e (tol 1e-10)", e_pair, e_fcfs);
        v.require(e_pair < 1e-10 && e_fcfs < 1e-10, "mean-field collapse");
    }

    // Pair recovery from pair-factorized triplet states.
    {
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 3; ++seed) worst = std::max(worst, pair_recovery_error(random_pair(12, seed)));
        detail("m = k = h on pair-factorized states: max deviation %.1e (tol 1e-10)", worst);
        v.require(worst < 1e-10, "pair recovery identity");
    }

    // LPS limits.
    {
        ModelParams fp;
        fp.lambda = 0.8;
        fp.xmax = 12;
        fp.discipline = Discipline::FCFS;
        ModelParams lp = fp;
        lp.discipline = Discipline::LPS;
        lp.K = 1;
        const auto layout = positional::layout_for(fp);
        double kernel = 0.0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto s = random_positional(layout, seed);
            const auto a = positional_rhs(s, fp);
            const auto b = positional_rhs(PositionalState(positional::layout_for(lp), {s.values().begin(), s.values().end()}), lp);
            for (std::size_t i = 0; i < a.values().size(); ++i) kernel = std::max(kernel, std::abs(a.values()[i] - b.values()[i]));
        }
        detail("LPS(1) vs FCFS kernel at 20 random states: max |diff| %.1e", kernel);
        v.require(kernel == 0.0, "LPS(1) kernel equals FCFS");

        ModelParams big;
        big.lambda = 0.7;
        big.xmax = 30;
        big.discipline = Discipline::LPS;
        big.K = 30;
        const auto lps = positional_fixed_point(big);
        ModelParams ps;
        ps.lambda = 0.7;
        ps.xmax = 30;
        const auto pair = pair_ps_fixed_point(ps);
        double diff = 0.0;
        for (int x = 0; x <= 30; ++x) diff = std::max(diff, std::abs(lps.dist[x] - pair.dist[x]));
        detail("LPS(K=xmax) vs pair-PS marginal: max |diff| %.1e (tol 1e-6)", diff);
        v.require(diff < 1e-6, "LPS(K>=xmax) limit");
    }

    // Gamma-series identity.
    {
        double worst = 0.0;
        for (auto [a, b] : {std::pair{1.0, 1.0}, {1.8, 0.37}, {0.5, 2.0}, {2.7, 0.2}}) {
            const auto g = gamma_series_identity(a, b);
            worst = std::max(worst, std::abs(g.series - g.gamma_form));
        }
        detail("gamma-series identity: max |series - gamma form| %.1e (tol 1e-6)", worst);
        v.require(worst < 1e-6, "gamma identity");
    }

    // d = 1 simulation against the M/M/1 geometric law.
    {
        SimConfig cfg;
        cfg.params.lambda = 0.5;
        cfg.params.d = 1;
        cfg.n = 1000;
        cfg.horizon = 2000;
        cfg.replications = 8;
        cfg.seed = 11;
        cfg.threads = hw_threads();
        const auto s = run_replications(cfg);
        double worst = 0.0;
        for (int k = 0; k <= 6; ++k) worst = std::max(worst, std::abs(s.qdist[k] - 0.5 * std::pow(0.5, k)));
        detail("d=1 simulation: mean %.4f +- %.4f (oracle 1), max |q(k) - geometric| %.1e", s.mean, s.ci_halfwidth,
               worst);
        v.require(std::abs(s.mean - 1.0) <= 2.0 * s.ci_halfwidth && worst < 5e-3, "d=1 geometric oracle");
    }

    detail("runtime %.0f s (limit 300 s)", sw.seconds());
    v.require(sw.seconds() < 300.0, "runtime");
    return v;
}

const char* kTitles[] = {
    "",
    "exact n=3 references at lambda=0.5",
    "mean-field fixed points",
    "pair-PS fixed points",
    "triplet-PS fixed points",
    "positional fixed points (FCFS, LPS(2), LCFS)",
    "asymptotic FCFS mean cross-check",
    "simulation at n=1000",
    "pair approximation is optimistic at n=1000",
    "property suites",
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};

    const std::function<Verdict()> run[] = {nullptr,     criterion1, criterion2, criterion3, criterion4,
                                            criterion5, criterion6, criterion7, criterion8, criterion9};
    int failures = 0;
    for (int c : selected) {
        if (c < 1 || c > 9) {
            std::fprintf(stderr, "unknown criterion %d\n", c);
            return 2;
        }
        std::printf("criterion %d: %s\n", c, kTitles[c]);
        Verdict v;
        try {
            v = run[c]();
        } catch (const std::exception& e) {
            v.ok = false;
            v.note = std::string("exception: ") + e.what();
        }
        std::printf("criterion %d %s%s%s\n", c, v.ok ? "PASS" : "FAIL", v.ok ? "" : ": ", v.note.c_str());
        std::fflush(stdout);
        failures += v.ok ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
