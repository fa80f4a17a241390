#include "redq/analysis.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "redq/exact_small.hpp"
#include "redq/meanfield.hpp"
#include "redq/triplet_ps.hpp"

namespace redq {

std::vector<double> buddy_rate_curve_ps(const PairState& pi) {
    std::vector<double> h(static_cast<std::size_t>(pi.xmax()) + 1, 0.0);
    for (int x = 1; x <= pi.xmax(); ++x) h[x] = ps_buddy_rate(pi, x);
    return h;
}

PositionalBuddyCurves buddy_rate_curves_positional(const PositionalState& s) {
    const auto& L = s.layout();
    if (L.discipline() == Discipline::LPS) throw ParamError("discipline", "buddy curves are defined for FCFS and LCFS");
    const auto m = positional_marginals(s);
    const int X = L.xmax();
    std::vector<double> head_pos(X + 1, 0.0), all_pos(X + 1, 0.0), head_len(X + 1, 0.0), all_len(X + 1, 0.0);
    for (int a = 0; a < L.slots(); ++a) {
        head_pos[L.pos(a)] += m.m3_head[a];
        all_pos[L.pos(a)] += m.m2[a];
        head_len[L.len(a)] += m.m3_head[a];
        all_len[L.len(a)] += m.m2[a];
    }
    PositionalBuddyCurves c;
    c.by_position.assign(X + 1, 0.0);
    c.by_length.assign(X + 1, 0.0);
    for (int x = 1; x <= X; ++x) {
        c.by_position[x] = all_pos[x] < kEmptyClass ? 0.0 : head_pos[x] / all_pos[x];
        c.by_length[x] = all_len[x] < kEmptyClass ? 0.0 : head_len[x] / all_len[x];
    }
    return c;
}

const ComparisonCell* ComparisonRow::find(const std::string& model, int K) const {
    for (const auto& c : cells) {
        if (c.model == model && (K == 0 || c.K == K)) return &c;
    }
    return nullptr;
}

namespace {

void run_tasks(std::vector<std::function<void()>>& tasks, int threads) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) tasks[i]();
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
    if (workers == 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

void fill(ComparisonCell& cell, const QueueDist& dist, bool converged) {
    cell.mean = dist.mean();
    cell.q.assign(dist.q().begin(), dist.q().end());
    cell.converged = converged;
}

}  // namespace

std::vector<ComparisonRow> compare_disciplines(const CompareOptions& opt) {
    std::vector<ComparisonRow> rows;
    for (double lambda : opt.lambdas) {
        if (!(lambda > 0.0 && lambda < 1.0)) throw ParamError("lambda", "every lambda must lie in (0, 1)");
        ComparisonRow row;
        row.lambda = lambda;
        auto add = [&](std::string model, Discipline d, int K) {
            ComparisonCell c;
            c.model = std::move(model);
            c.discipline = d;
            c.K = K;
            row.cells.push_back(std::move(c));
        };
        add("mf", Discipline::PS, 1);
        add("pair-ps", Discipline::PS, 1);
        if (opt.with_triplet) add("triplet-ps", Discipline::PS, 1);
        add("pair-fcfs", Discipline::FCFS, 1);
        for (int K : opt.lps_K) add("pair-lps", Discipline::LPS, K);
        add("pair-lcfs", Discipline::LCFS, 1);
        add("fcfs-asymptotic", Discipline::FCFS, 1);
        if (opt.with_sim) {
            add("sim-ps", Discipline::PS, 1);
            add("sim-fcfs", Discipline::FCFS, 1);
            for (int K : opt.lps_K) add("sim-lps", Discipline::LPS, K);
            add("sim-lcfs", Discipline::LCFS, 1);
        }
        rows.push_back(std::move(row));
    }

    std::vector<std::function<void()>> tasks;
    for (auto& row : rows) {
        for (auto& cell : row.cells) {
            const double lambda = row.lambda;
            ComparisonCell* c = &cell;
            tasks.emplace_back([c, lambda, &opt] {
                try {
                    ModelParams p;
                    p.lambda = lambda;
                    p.d = 2;
                    p.discipline = c->discipline;
                    p.K = c->K;
                    p.xmax = opt.xmax;
                    if (c->model == "mf") {
                        fill(*c, mf_fixed_point(p), true);
                    } else if (c->model == "pair-ps") {
                        const auto r = pair_ps_fixed_point(p, opt.integrator);
                        fill(*c, r.dist, r.info.converged);
                    } else if (c->model == "triplet-ps") {
                        p.xmax = opt.triplet_xmax;
                        const auto r = triplet_fixed_point(p, opt.integrator);
                        fill(*c, r.dist, r.info.converged);
                    } else if (c->model.rfind("pair-", 0) == 0) {
                        p.xmax = opt.positional_xmax;
                        const auto r = positional_fixed_point(p, opt.integrator);
                        fill(*c, r.dist, r.info.converged);
                    } else if (c->model == "fcfs-asymptotic") {
                        c->mean = fcfs_asymptotic_mean(lambda);
                    } else {
                        SimConfig cfg = opt.sim;
                        cfg.params.lambda = lambda;
                        cfg.params.d = 2;
                        cfg.params.discipline = c->discipline;
                        cfg.params.K = c->K;
                        cfg.threads = 1;
                        const auto s = run_replications(cfg);
                        fill(*c, s.qdist, true);
                        c->mean = s.mean;
                        c->ci_halfwidth = s.ci_halfwidth;
                    }
                } catch (const std::exception& e) {
                    c->error = e.what();
                    c->converged = false;
                    c->mean = std::numeric_limits<double>::quiet_NaN();
                }
            });
        }
    }
    run_tasks(tasks, opt.threads);

    for (auto& row : rows) {
        const ComparisonCell* fcfs = row.find("pair-fcfs");
        const double base = fcfs ? fcfs->mean : std::numeric_limits<double>::quiet_NaN();
        for (auto& c : row.cells) c.ratio_to_fcfs = c.mean / base;
    }
    return rows;
}

namespace {

std::ostringstream csv_stream() {
    std::ostringstream os;
    os.precision(12);
    return os;
}

}  // namespace

std::string compare_csv(const std::vector<ComparisonRow>& rows) {
    auto os = csv_stream();
    os << "lambda,discipline,K,mean,ratio_to_fcfs\n";
    for (const auto& r : rows) {
        for (const auto& c : r.cells) os << r.lambda << ',' << c.model << ',' << c.K << ',' << c.mean << ',' << c.ratio_to_fcfs << '\n';
    }
    return os.str();
}

std::string dist_csv(const std::vector<ComparisonRow>& rows) {
    auto os = csv_stream();
    os << "lambda,discipline,x,q\n";
    for (const auto& r : rows) {
        for (const auto& c : r.cells) {
            const std::string label = c.model == "pair-lps" || c.model == "sim-lps" ? c.model + "(" + std::to_string(c.K) + ")" : c.model;
            for (std::size_t x = 0; x < c.q.size(); ++x) os << r.lambda << ',' << label << ',' << x << ',' << c.q[x] << '\n';
        }
    }
    return os.str();
}

std::string buddy_csv(const std::vector<BuddyCurveSet>& curves) {
    auto os = csv_stream();
    os << "discipline,index_kind,index,rate\n";
    for (const auto& c : curves) {
        for (std::size_t i = 1; i < c.rate.size(); ++i) {
            os << to_string(c.discipline) << ',' << c.index_kind << ',' << i << ',' << c.rate[i] << '\n';
        }
    }
    return os.str();
}

}  // namespace redq
