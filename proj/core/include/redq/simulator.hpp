#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "redq/model.hpp"

namespace redq {

struct SimConfig {
    ModelParams params;
    int n = 1000;
    double horizon = 1e5;
    double warmup_fraction = 0.3;
    std::uint64_t seed = 1;
    int replications = 4;
    /// Worker threads for run_replications; results do not depend on it.
    int threads = 1;
    /// Re-check the replica bookkeeping after every event (slow).
    bool check_invariants = false;

    void validate() const;
};

struct SimEvent {
    double t = 0.0;
    bool arrival = false;
    /// Server whose completion fired (unused for arrivals).
    std::uint32_t server = 0;
    /// Job created or completed.
    std::uint64_t job = 0;
};

using SimTrace = std::function<void(const SimEvent&)>;

struct SimStats {
    QueueDist qdist;
    double mean = 0.0;
    std::vector<double> replication_means;
    /// 95% Student-t half-width across replication means; +inf for one
    /// replication.
    double ci_halfwidth = 0.0;
    int replications = 0;
    std::uint64_t events = 0;
};

/// Seed of replication `index` derived from the master seed.
std::uint64_t replication_seed(std::uint64_t seed, int index);

/// One replication driven by `rep_seed`. `trace`, when set, sees every event.
SimStats run_simulation(const SimConfig& cfg, std::uint64_t rep_seed, const SimTrace& trace = {});

/// cfg.replications independent runs seeded by replication_seed(cfg.seed, i),
/// averaged in replication order.
SimStats run_replications(const SimConfig& cfg);

/// 95% Student-t half-width of the sample mean; +inf for fewer than two values.
double t_halfwidth(const std::vector<double>& values);

}  // namespace redq
