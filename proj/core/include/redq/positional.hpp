#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "redq/model.hpp"
#include "redq/ode.hpp"

namespace redq {

/// Feasible (position, queue length) pairs for one replica.
///
/// FCFS: position counted from the head, 1 <= pos <= len.
/// LCFS: position counted from the back, 1 <= pos <= len.
/// LPS(K): pos = 1 while in service, pos = j > 1 for the j-th waiting slot
///         (absolute position K + j - 1), so pos <= max(1, len - K + 1).
class PositionalLayout {
public:
    PositionalLayout(Discipline discipline, int K, int xmax);

    Discipline discipline() const noexcept { return discipline_; }
    int K() const noexcept { return K_; }
    int xmax() const noexcept { return xmax_; }
    /// Number of feasible (pos, len) pairs.
    int slots() const noexcept { return static_cast<int>(pos_.size()); }

    /// Slot of (pos, len) or -1 when infeasible or out of range.
    int slot(int pos, int len) const {
        if (pos < 1 || len < 1 || pos > xmax_ || len > xmax_) return -1;
        return slot_[static_cast<std::size_t>(pos) * stride_ + static_cast<std::size_t>(len)];
    }
    bool feasible(int pos, int len) const { return slot(pos, len) >= 0; }
    int pos(int a) const { return pos_[a]; }
    int len(int a) const { return len_[a]; }

    /// Position at which a replica joining a queue (now of length len) starts.
    int entry_position(int len) const;

private:
    Discipline discipline_;
    int K_;
    int xmax_;
    std::size_t stride_;
    std::vector<int> slot_;
    std::vector<int> pos_, len_;
};

/// Scaled job counts v(x1,y1,x2,y2) over pairs of feasible slots, stored
/// dense as v[a * slots + b] for slot a = (x1,x2) and slot b = (y1,y2).
class PositionalState {
public:
    PositionalState() = default;
    explicit PositionalState(std::shared_ptr<const PositionalLayout> layout);
    PositionalState(std::shared_ptr<const PositionalLayout> layout, std::vector<double> values);

    const PositionalLayout& layout() const { return *layout_; }
    std::shared_ptr<const PositionalLayout> layout_ptr() const { return layout_; }

    /// Zero outside the mask.
    double at(int x1, int y1, int x2, int y2) const;
    void set(int x1, int y1, int x2, int y2, double v);
    /// Sets v(x1,y1,x2,y2) and v(y1,x1,y2,x2).
    void set_sym(int x1, int y1, int x2, int y2, double v);

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    /// q(0..xmax) with q(x) = 2 ql(x) / x.
    std::vector<double> queue_lengths() const;
    double max_asymmetry() const;

private:
    std::shared_ptr<const PositionalLayout> layout_;
    std::vector<double> data_;
};

struct PositionalMarginals {
    /// m2(x1,x2) per slot.
    std::vector<double> m2;
    /// m3(x1,1,x2) per slot: mass whose buddy is in position 1.
    std::vector<double> m3_head;
    /// pos(x) and ql(x) for x = 0..xmax+1 (index 0 and xmax+1 are zero).
    std::vector<double> pos;
    std::vector<double> ql;
    /// q(0..xmax) from ql.
    std::vector<double> q;
    /// q(x) = 2(pos(x) - pos(x+1)); equals q for FCFS and LCFS.
    std::vector<double> q_from_pos;
};

PositionalMarginals positional_marginals(const PositionalState& s);

/// Partial sum over positions 1..x_a of the probability that the buddy of
/// the job at that position in a queue of length x_b is in position 1.
/// FCFS and LCFS only.
double kappa(const PositionalState& s, int x_a, int x_b);

/// Completion rate of the buddy of the job in LPS slot x' of a queue of
/// length x2: sum_y' v(x',1,x2,y') / (m2(x',x2) min(K,y')).
double lps_rate(const PositionalState& s, int x_prime, int x2);
/// Cumulative buddy completion rate of slots 1..x_a, counting all
/// min(K, x_b) in-service jobs for slot 1.
double lps_psi(const PositionalState& s, int x_a, int x_b);
/// Probability that a completion at a server with x jobs in LPS(K) is not a
/// given in-service job: min((x-1)/x, (K-1)/K).
double lps_p1(int K, int x);

namespace positional {
void rhs(std::span<const double> s, const PositionalLayout& layout, double lambda, std::span<double> out);
OdeSystem system(const ModelParams& p);
std::shared_ptr<const PositionalLayout> layout_for(const ModelParams& p);
}  // namespace positional

PositionalState positional_rhs(const PositionalState& s, const ModelParams& p);

struct PositionalSolution {
    PositionalState state;
    QueueDist dist;
    SolveInfo info;
};

/// p.discipline selects FCFS, LCFS or LPS (with p.K).
PositionalSolution positional_fixed_point(const ModelParams& p, const IntegratorConfig& cfg = {});

/// CSV `x1,y1,x2,y2,value`, nonzero entries only.
std::string to_csv(const PositionalState& s);

}  // namespace redq
