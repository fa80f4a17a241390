#pragma once

#include <optional>
#include <string>
#include <vector>

#include "redq/model.hpp"
#include "redq/ode.hpp"
#include "redq/pair_ps.hpp"
#include "redq/positional.hpp"
#include "redq/simulator.hpp"

namespace redq {

/// h(x) for x = 0..xmax (h(0) = h(1) = 0).
std::vector<double> buddy_rate_curve_ps(const PairState& pi);

/// Probability that the buddy of a job is in service position 1, given the
/// job's own position (by_position[x1]) or its queue length (by_length[x2]).
/// Index 0 is unused and zero.
struct PositionalBuddyCurves {
    std::vector<double> by_position;
    std::vector<double> by_length;
};

/// FCFS or LCFS states.
PositionalBuddyCurves buddy_rate_curves_positional(const PositionalState& s);

/// One model evaluated at one arrival rate.
struct ComparisonCell {
    /// "mf", "pair-ps", "triplet-ps", "pair-fcfs", "pair-lps", "pair-lcfs",
    /// "fcfs-asymptotic" or "sim-<discipline>".
    std::string model;
    Discipline discipline = Discipline::PS;
    int K = 1;
    double mean = 0.0;
    double ratio_to_fcfs = 0.0;
    bool converged = true;
    std::optional<double> ci_halfwidth;
    /// Non-empty when the solver failed; mean is then NaN.
    std::string error;
    /// Empty for fcfs-asymptotic and failed cells.
    std::vector<double> q;
};

struct ComparisonRow {
    double lambda = 0.0;
    std::vector<ComparisonCell> cells;

    /// nullptr when the model is absent.
    const ComparisonCell* find(const std::string& model, int K = 0) const;
};

struct CompareOptions {
    std::vector<double> lambdas{0.5, 0.7, 0.9};
    std::vector<int> lps_K{2};
    int xmax = 50;
    int positional_xmax = 40;
    int triplet_xmax = 30;
    bool with_triplet = true;
    bool with_sim = false;
    /// Template for simulations; params.lambda and params.discipline are set per cell.
    SimConfig sim;
    IntegratorConfig integrator;
    int threads = 1;
};

/// Runs every model per lambda. Failures are recorded in the cell.
std::vector<ComparisonRow> compare_disciplines(const CompareOptions& opt);

/// `lambda,discipline,K,mean,ratio_to_fcfs`
std::string compare_csv(const std::vector<ComparisonRow>& rows);
/// `lambda,discipline,x,q`
std::string dist_csv(const std::vector<ComparisonRow>& rows);

struct BuddyCurveSet {
    Discipline discipline;
    /// "length" for PS; "position" or "length" for FCFS and LCFS.
    std::string index_kind;
    std::vector<double> rate;
};

/// `discipline,index_kind,index,rate`
std::string buddy_csv(const std::vector<BuddyCurveSet>& curves);

}  // namespace redq
