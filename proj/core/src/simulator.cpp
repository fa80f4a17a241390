#include "redq/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace redq {

void SimConfig::validate() const {
    validate_params(params);
    if (n < params.d) throw ParamError("n", "n must be at least d to place replicas on distinct servers");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParamError("horizon", "horizon must be > 0");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
        throw ParamError("warmup", "warmup fraction must lie in [0, 1)");
    }
    if (replications < 1) throw ParamError("reps", "replications must be >= 1");
    if (threads < 1) throw ParamError("threads", "threads must be >= 1");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class Engine {
public:
    Engine(const SimConfig& cfg, std::uint64_t seed)
        : p_(cfg.params),
          n_(static_cast<std::uint32_t>(cfg.n)),
          d_(static_cast<std::uint32_t>(cfg.params.d)),
          horizon_(cfg.horizon),
          t_warm_(cfg.warmup_fraction * cfg.horizon),
          check_(cfg.check_invariants),
          rng_(seed),
          queues_(n_),
          busy_slot_(n_, kIdle) {
        count_.assign(2, 0.0);
        count_[0] = n_;
        area_.assign(2, 0.0);
        stamp_.assign(2, t_warm_);
    }

    SimStats run(const SimTrace& trace) {
        const double arrival_rate = p_.lambda * n_;
        double t = 0.0;
        std::uint64_t events = 0;
        for (;;) {
            const double total = arrival_rate + static_cast<double>(busy_.size());
            t += exponential() / total;
            if (t >= horizon_) break;
            const double u = uniform() * total;
            SimEvent ev;
            ev.t = t;
            if (u < arrival_rate || busy_.empty()) {
                ev.arrival = true;
                ev.job = arrive(t);
            } else {
                auto k = static_cast<std::size_t>(u - arrival_rate);
                if (k >= busy_.size()) k = busy_.size() - 1;
                ev.server = busy_[k];
                ev.job = complete(ev.server, t);
            }
            ++events;
            if (check_) verify();
            if (trace) trace(ev);
        }

        std::vector<double> q(count_.size(), 0.0);
        const double window = horizon_ - t_warm_;
        for (std::size_t k = 0; k < count_.size(); ++k) {
            touch(k, horizon_);
            q[k] = area_[k] / (static_cast<double>(n_) * window);
        }
        while (q.size() > 2 && q.back() == 0.0) q.pop_back();
        // Renormalize away floating-point drift in the accumulated areas.
        const double total = std::accumulate(q.begin(), q.end(), 0.0);
        for (double& v : q) v /= total;

        SimStats s;
        s.qdist = QueueDist(std::move(q));
        s.mean = s.qdist.mean();
        s.replication_means = {s.mean};
        s.ci_halfwidth = std::numeric_limits<double>::infinity();
        s.replications = 1;
        s.events = events;
        return s;
    }

private:
    static constexpr std::uint32_t kIdle = std::numeric_limits<std::uint32_t>::max();

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double exponential() { return -std::log(1.0 - uniform()); }
    std::uint32_t pick(std::uint32_t m) {
        auto i = static_cast<std::uint32_t>(uniform() * m);
        return i < m ? i : m - 1;
    }

    void touch(std::size_t level, double t) {
        if (t > t_warm_) area_[level] += count_[level] * (t - std::max(stamp_[level], t_warm_));
        stamp_[level] = t;
    }

    void move_level(std::size_t from, std::size_t to, double t) {
        if (to >= count_.size()) {
            count_.resize(to + 1, 0.0);
            area_.resize(to + 1, 0.0);
            stamp_.resize(to + 1, t);
        }
        touch(from, t);
        touch(to, t);
        count_[from] -= 1.0;
        count_[to] += 1.0;
    }

    std::uint32_t new_job() {
        if (!free_.empty()) {
            const std::uint32_t j = free_.back();
            free_.pop_back();
            return j;
        }
        const auto j = static_cast<std::uint32_t>(job_servers_.size() / d_);
        job_servers_.resize(job_servers_.size() + d_);
        job_id_.push_back(0);
        return j;
    }

    std::uint64_t arrive(double t) {
        const std::uint32_t j = new_job();
        job_id_[j] = next_id_++;
        std::uint32_t* srv = &job_servers_[static_cast<std::size_t>(j) * d_];
        for (std::uint32_t i = 0; i < d_; ++i) {
            std::uint32_t s;
            do {
                s = pick(n_);
            } while (std::find(srv, srv + i, s) != srv + i);
            srv[i] = s;
        }
        for (std::uint32_t i = 0; i < d_; ++i) {
            const std::uint32_t s = srv[i];
            auto& qs = queues_[s];
            move_level(qs.size(), qs.size() + 1, t);
            if (qs.empty()) {
                busy_slot_[s] = static_cast<std::uint32_t>(busy_.size());
                busy_.push_back(s);
            }
            qs.push_back(j);
        }
        ++live_;
        return job_id_[j];
    }

    std::uint64_t complete(std::uint32_t server, double t) {
        const auto& qs = queues_[server];
        const auto len = static_cast<std::uint32_t>(qs.size());
        // One draw per completion for every discipline keeps RNG streams aligned.
        const double u = uniform();
        std::uint32_t idx = 0;
        switch (p_.discipline) {
            case Discipline::FCFS: idx = 0; break;
            case Discipline::LCFS: idx = len - 1; break;
            case Discipline::PS: idx = std::min(static_cast<std::uint32_t>(u * len), len - 1); break;
            case Discipline::LPS: {
                const auto m = std::min(static_cast<std::uint32_t>(p_.K), len);
                idx = std::min(static_cast<std::uint32_t>(u * m), m - 1);
                break;
            }
        }
        const std::uint32_t j = qs[idx];
        const std::uint32_t* srv = &job_servers_[static_cast<std::size_t>(j) * d_];
        for (std::uint32_t i = 0; i < d_; ++i) {
            const std::uint32_t s = srv[i];
            auto& q = queues_[s];
            q.erase(std::find(q.begin(), q.end(), j));
            move_level(q.size() + 1, q.size(), t);
            if (q.empty()) {
                const std::uint32_t slot = busy_slot_[s];
                busy_[slot] = busy_.back();
                busy_slot_[busy_[slot]] = slot;
                busy_.pop_back();
                busy_slot_[s] = kIdle;
            }
        }
        free_.push_back(j);
        --live_;
        return job_id_[j];
    }

    void verify() const {
        std::size_t replicas = 0;
        std::vector<double> levels(count_.size(), 0.0);
        for (std::uint32_t s = 0; s < n_; ++s) {
            replicas += queues_[s].size();
            if (queues_[s].size() >= levels.size()) throw SolverError("level histogram out of range");
            levels[queues_[s].size()] += 1.0;
            if (queues_[s].empty() != (busy_slot_[s] == kIdle)) throw SolverError("busy list out of sync");
            for (std::uint32_t j : queues_[s]) {
                const std::uint32_t* srv = &job_servers_[static_cast<std::size_t>(j) * d_];
                if (std::count(srv, srv + d_, s) != 1) throw SolverError("replica on a server not owned by its job");
            }
        }
        if (replicas != live_ * d_) throw SolverError("replica count differs from d x live jobs");
        if (levels != count_) throw SolverError("level counts out of sync");
        for (std::size_t j = 0; j < job_servers_.size() / d_; ++j) {
            if (std::find(free_.begin(), free_.end(), j) != free_.end()) continue;
            const std::uint32_t* srv = &job_servers_[j * d_];
            for (std::uint32_t i = 0; i < d_; ++i) {
                if (std::find(srv, srv + i, srv[i]) != srv + i) throw SolverError("job replicas share a server");
            }
        }
    }

    ModelParams p_;
    std::uint32_t n_, d_;
    double horizon_, t_warm_;
    bool check_;
    std::mt19937_64 rng_;

    std::vector<std::vector<std::uint32_t>> queues_;
    std::vector<std::uint32_t> busy_;
    std::vector<std::uint32_t> busy_slot_;

    std::vector<std::uint32_t> job_servers_;
    std::vector<std::uint64_t> job_id_;
    std::vector<std::uint32_t> free_;
    std::uint64_t next_id_ = 0;
    std::size_t live_ = 0;

    std::vector<double> count_, area_, stamp_;
};

}  // namespace

std::uint64_t replication_seed(std::uint64_t seed, int index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(index) + 1)));
}

double t_halfwidth(const std::vector<double>& values) {
    const std::size_t m = values.size();
    if (m < 2) return std::numeric_limits<double>::infinity();
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / m;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (m - 1));
    const boost::math::students_t dist(static_cast<double>(m - 1));
    return boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(static_cast<double>(m));
}

SimStats run_simulation(const SimConfig& cfg, std::uint64_t rep_seed, const SimTrace& trace) {
    cfg.validate();
    Engine engine(cfg, rep_seed);
    return engine.run(trace);
}

SimStats run_replications(const SimConfig& cfg) {
    cfg.validate();
    const int reps = cfg.replications;
    std::vector<SimStats> runs(reps);
    std::vector<std::exception_ptr> errors(reps);
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < reps; i = next++) {
            try {
                runs[i] = run_simulation(cfg, replication_seed(cfg.seed, i));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int workers = std::min(cfg.threads, reps);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    std::size_t width = 0;
    for (const auto& r : runs) width = std::max(width, r.qdist.size());
    std::vector<double> q(width, 0.0);
    SimStats out;
    for (const auto& r : runs) {
        for (std::size_t k = 0; k < r.qdist.size(); ++k) q[k] += r.qdist[k] / reps;
        out.replication_means.push_back(r.mean);
        out.events += r.events;
    }
    const double total = std::accumulate(q.begin(), q.end(), 0.0);
    for (double& v : q) v /= total;
    out.qdist = QueueDist(std::move(q));
    out.mean = std::accumulate(out.replication_means.begin(), out.replication_means.end(), 0.0) / reps;
    out.ci_halfwidth = t_halfwidth(out.replication_means);
    out.replications = reps;
    return out;
}

}  // namespace redq
