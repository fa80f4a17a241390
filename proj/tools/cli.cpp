#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "redq/analysis.hpp"
#include "redq/exact_small.hpp"
#include "redq/meanfield.hpp"
#include "redq/pair_ps.hpp"
#include "redq/positional.hpp"
#include "redq/simulator.hpp"
#include "redq/triplet_ps.hpp"

namespace redq::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct Options {
    double lambda = 0.9;
    int d = 2;
    int K = 2;
    std::optional<int> xmax;
    double dt = 0.05;
    double tol = 1e-10;
    double tmax = 1e4;
    std::string out;
    std::string format;
    std::string discipline = "ps";
    int n = 1000;
    double horizon = 1e5;
    double warmup = 0.3;
    std::uint64_t seed = 1;
    int reps = 4;
    int threads = 1;
    std::vector<double> lambdas{0.5, 0.7, 0.9};
    std::vector<int> lps_K{2};
    bool with_sim = false;
    int kcap = 20;
    int mcap = 11;
};

struct Outcome {
    double mean = std::nan("");
    bool converged = true;
    ordered_json extra = ordered_json::object();
};

bool want_json(const Options& o) {
    if (!o.format.empty()) return o.format == "json";
    return std::filesystem::path(o.out).extension() == ".json";
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path);
}

IntegratorConfig integrator(const Options& o) {
    IntegratorConfig c;
    c.dt = o.dt;
    c.tol = o.tol;
    c.t_max = o.tmax;
    c.validate();
    return c;
}

ModelParams params(const Options& o, Discipline d) {
    ModelParams p;
    p.lambda = o.lambda;
    p.d = o.d;
    p.discipline = d;
    p.K = d == Discipline::LPS ? o.K : 1;
    p.xmax = o.xmax.value_or(default_xmax(o.d));
    validate_params(p);
    return p;
}

Outcome emit_dist(const Options& o, const QueueDist& dist, DistMeta meta) {
    if (!o.out.empty()) write_file(o.out, want_json(o) ? to_json(dist, meta) + "\n" : to_csv(dist));
    Outcome r;
    r.mean = dist.mean();
    r.converged = meta.converged.value_or(true);
    if (dist.truncation_warning()) {
        std::cerr << "warning: tail mass " << dist.tail_mass() << " near xmax; consider a larger --xmax\n";
    }
    return r;
}

DistMeta meta_for(const ModelParams& p, std::optional<bool> converged) {
    DistMeta m;
    m.lambda = p.lambda;
    m.d = p.d;
    m.discipline = p.discipline;
    m.K = p.K;
    m.converged = converged;
    return m;
}

Outcome cmd_mf(const Options& o) {
    const auto p = params(o, Discipline::PS);
    return emit_dist(o, mf_fixed_point(p), meta_for(p, true));
}

Outcome cmd_pair_ps(const Options& o) {
    const auto p = params(o, Discipline::PS);
    if (p.d == 2) {
        const auto r = pair_ps_fixed_point(p, integrator(o));
        return emit_dist(o, r.dist, meta_for(p, r.info.converged));
    }
    const auto r = pair_ps_d_fixed_point(p, integrator(o));
    return emit_dist(o, r.dist, meta_for(p, r.info.converged));
}

Outcome cmd_triplet(const Options& o) {
    const auto p = params(o, Discipline::PS);
    const auto r = triplet_fixed_point(p, integrator(o));
    return emit_dist(o, r.dist, meta_for(p, r.info.converged));
}

Outcome cmd_positional(const Options& o, Discipline d) {
    const auto p = params(o, d);
    const auto r = positional_fixed_point(p, integrator(o));
    return emit_dist(o, r.dist, meta_for(p, r.info.converged));
}

Outcome cmd_simulate(const Options& o) {
    const auto disc = parse_discipline(o.discipline);
    if (!disc) throw ParamError("discipline", "unknown discipline '" + o.discipline + "'");
    SimConfig cfg;
    cfg.params = params(o, *disc);
    cfg.n = o.n;
    cfg.horizon = o.horizon;
    cfg.warmup_fraction = o.warmup;
    cfg.seed = o.seed;
    cfg.replications = o.reps;
    cfg.threads = o.threads;
    const auto s = run_replications(cfg);
    auto meta = meta_for(cfg.params, std::nullopt);
    meta.ci_halfwidth = s.ci_halfwidth;
    meta.replications = s.replications;
    Outcome r = emit_dist(o, s.qdist, meta);
    r.mean = s.mean;
    r.extra["ci_halfwidth"] = std::isfinite(s.ci_halfwidth) ? ordered_json(s.ci_halfwidth) : ordered_json();
    r.extra["replications"] = s.replications;
    return r;
}

Outcome cmd_exact3(const Options& o) {
    const auto ps = ps_n3_stationary(o.lambda, o.kcap);
    const auto fcfs = fcfs_n3_stationary(o.lambda, o.mcap);
    // The product form is exact; the chain is truncated at --mcap.
    const auto exact = fcfs_n3_product_form(o.lambda);
    auto head = [](const QueueDist& q) {
        std::vector<double> v;
        for (std::size_t x = 0; x < std::min<std::size_t>(q.size(), 8); ++x) v.push_back(q[x]);
        return v;
    };
    ordered_json j;
    j["lambda"] = o.lambda;
    j["kcap"] = o.kcap;
    j["mcap"] = o.mcap;
    j["ps_mean"] = ps.mean();
    j["fcfs_mean"] = exact.mean();
    j["fcfs_chain_mean"] = fcfs.mean();
    j["ps_q"] = head(ps);
    j["fcfs_q"] = head(exact);
    j["fcfs_chain_q"] = head(fcfs);
    if (!o.out.empty()) write_file(o.out, j.dump(2) + "\n");
    Outcome r;
    r.mean = ps.mean();
    r.extra["ps_mean"] = ps.mean();
    r.extra["fcfs_mean"] = exact.mean();
    r.extra["fcfs_chain_mean"] = fcfs.mean();
    return r;
}

std::filesystem::path out_dir(const Options& o) {
    std::filesystem::path dir = o.out.empty() ? std::filesystem::path(".") : std::filesystem::path(o.out);
    std::filesystem::create_directories(dir);
    return dir;
}

Outcome cmd_compare(const Options& o) {
    CompareOptions c;
    c.lambdas = o.lambdas;
    c.lps_K = o.lps_K;
    if (o.xmax) {
        c.xmax = c.positional_xmax = c.triplet_xmax = *o.xmax;
    }
    c.integrator = integrator(o);
    c.with_sim = o.with_sim;
    c.sim.n = o.n;
    c.sim.horizon = o.horizon;
    c.sim.warmup_fraction = o.warmup;
    c.sim.seed = o.seed;
    c.sim.replications = o.reps;
    c.threads = o.threads;
    const auto rows = compare_disciplines(c);
    const auto dir = out_dir(o);
    write_file((dir / "compare.csv").string(), compare_csv(rows));
    write_file((dir / "dist.csv").string(), dist_csv(rows));

    Outcome r;
    r.converged = true;
    for (const auto& row : rows) {
        for (const auto& cell : row.cells) {
            if (!cell.converged) r.converged = false;
            if (!cell.error.empty()) std::cerr << "lambda=" << row.lambda << " " << cell.model << ": " << cell.error << '\n';
        }
    }
    if (!rows.empty()) {
        if (const auto* ps = rows.back().find("pair-ps")) r.mean = ps->mean;
    }
    return r;
}

Outcome cmd_buddy(const Options& o) {
    std::vector<BuddyCurveSet> curves;
    Outcome r;
    {
        const auto p = params(o, Discipline::PS);
        const auto s = pair_ps_fixed_point(p, integrator(o));
        curves.push_back({Discipline::PS, "length", buddy_rate_curve_ps(s.state)});
        r.converged = r.converged && s.info.converged;
        r.mean = s.dist.mean();
    }
    for (Discipline d : {Discipline::FCFS, Discipline::LCFS}) {
        const auto p = params(o, d);
        const auto s = positional_fixed_point(p, integrator(o));
        const auto c = buddy_rate_curves_positional(s.state);
        curves.push_back({d, "position", c.by_position});
        curves.push_back({d, "length", c.by_length});
        r.converged = r.converged && s.info.converged;
    }
    const auto dir = out_dir(o);
    write_file((dir / "buddy.csv").string(), buddy_csv(curves));
    return r;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Redundancy-d queueing with cancel-on-complete: fixed points, simulation, exact references"};
    app.name("redq");
    app.set_config("--config", "", "Key-value file whose keys mirror the long flag names; flags override it");
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--lambda", o.lambda, "Arrival rate per server, in (0,1)")->capture_default_str();
    app.add_option("--d", o.d, "Replicas per job")->capture_default_str();
    app.add_option("--K", o.K, "LPS service slots")->capture_default_str();
    app.add_option("--xmax", o.xmax, "Queue-length truncation (default 50 for d<=2, 30 otherwise)");
    app.add_option("--dt", o.dt, "Euler step")->capture_default_str();
    app.add_option("--tol", o.tol, "Fixed-point tolerance on sup|rhs|")->capture_default_str();
    app.add_option("--tmax", o.tmax, "Integration horizon")->capture_default_str();
    app.add_option("--out", o.out, "Output file (directory for compare and buddy)");
    app.add_option("--format", o.format, "Output format for distributions")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--discipline", o.discipline, "ps, fcfs, lcfs or lps (simulate)")->capture_default_str();
    app.add_option("--n", o.n, "Servers (simulate)")->capture_default_str();
    app.add_option("--horizon", o.horizon, "Simulated time per replication")->capture_default_str();
    app.add_option("--warmup", o.warmup, "Discarded fraction of the horizon")->capture_default_str();
    app.add_option("--seed", o.seed, "Master seed")->capture_default_str();
    app.add_option("--reps", o.reps, "Replications")->capture_default_str();
    app.add_option("--threads", o.threads, "Worker threads for replications and compare")->capture_default_str();
    app.add_option("--lambdas", o.lambdas, "Arrival rates for compare")->delimiter(',')->capture_default_str();
    app.add_option("--K-list", o.lps_K, "LPS slot counts for compare")->delimiter(',')->capture_default_str();
    app.add_flag("--with-sim", o.with_sim, "Add simulation cells to compare");
    app.add_option("--kcap", o.kcap, "Per-class cap of the n=3 PS chain (exact3)")->capture_default_str();
    app.add_option("--mcap", o.mcap, "Sequence-length cap of the n=3 FCFS chain (exact3)")->capture_default_str();

    struct Command {
        const char* name;
        const char* help;
    };
    const std::vector<Command> commands = {
        {"mf", "Mean-field fixed point"},
        {"pair-ps", "Pair approximation, PS (any d >= 2)"},
        {"triplet-ps", "Triplet approximation, PS, d = 2"},
        {"pair-fcfs", "Positional pair approximation, FCFS"},
        {"pair-lps", "Positional pair approximation, LPS(K)"},
        {"pair-lcfs", "Positional pair approximation, LCFS"},
        {"simulate", "Discrete-event simulation"},
        {"exact3", "Exact n = 3 references for PS and FCFS"},
        {"compare", "All models over --lambdas; writes compare.csv and dist.csv"},
        {"buddy", "Buddy-disappearance curves for PS, FCFS, LCFS; writes buddy.csv"},
    };
    for (const auto& c : commands) app.add_subcommand(c.name, c.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    const auto start = std::chrono::steady_clock::now();
    Outcome r;
    try {
        if (name == "mf") r = cmd_mf(o);
        else if (name == "pair-ps") r = cmd_pair_ps(o);
        else if (name == "triplet-ps") r = cmd_triplet(o);
        else if (name == "pair-fcfs") r = cmd_positional(o, Discipline::FCFS);
        else if (name == "pair-lps") r = cmd_positional(o, Discipline::LPS);
        else if (name == "pair-lcfs") r = cmd_positional(o, Discipline::LCFS);
        else if (name == "simulate") r = cmd_simulate(o);
        else if (name == "exact3") r = cmd_exact3(o);
        else if (name == "compare") r = cmd_compare(o);
        else r = cmd_buddy(o);
    } catch (const ParamError& e) {
        err << "invalid " << e.field() << ": " << e.what() << '\n';
        return kInvalidInput;
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return kNotConverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    ordered_json summary;
    summary["command"] = name;
    summary["mean"] = std::isfinite(r.mean) ? ordered_json(r.mean) : ordered_json();
    summary["converged"] = r.converged;
    summary["wall_time"] = wall;
    for (auto& [k, v] : r.extra.items()) summary[k] = v;
    out << summary.dump() << '\n';
    if (!r.converged) {
        err << "warning: fixed point did not reach the tolerance within --tmax\n";
        return kNotConverged;
    }
    return kOk;
}

}  // namespace redq::cli
