#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "redq/model.hpp"
#include "redq/ode.hpp"

namespace redq {

/// Scaled counts pi(x, y) of jobs whose two replicas sit in queues of length
/// x and y, for 1 <= x, y <= xmax. Stored as a full symmetric matrix.
class PairState {
public:
    PairState() = default;
    explicit PairState(int xmax);
    PairState(int xmax, std::vector<double> values);

    int xmax() const noexcept { return xmax_; }
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(x - 1) * static_cast<std::size_t>(xmax_) +
               static_cast<std::size_t>(y - 1);
    }
    /// Zero outside 1..xmax.
    double at(int x, int y) const {
        if (x < 1 || y < 1 || x > xmax_ || y > xmax_) return 0.0;
        return data_[index(x, y)];
    }
    void set(int x, int y, double v) { data_[index(x, y)] = v; }
    /// Sets (x,y) and (y,x).
    void set_sym(int x, int y, double v) {
        data_[index(x, y)] = v;
        data_[index(y, x)] = v;
    }

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    /// pi(x) = sum_y pi(x, y).
    double row_sum(int x) const;
    /// q(0..xmax) with q(x) = 2 pi(x) / x and q(0) = 1 - sum.
    std::vector<double> queue_lengths() const;
    /// sum_x x q(x) = 2 sum_{x,y} pi(x,y).
    double mean() const;
    double max_asymmetry() const;

private:
    int xmax_ = 0;
    std::vector<double> data_;
};

/// Denominators below this are treated as an empty class.
inline constexpr double kEmptyClass = 1e-14;

/// Buddy-loss rate h(x) = (x-1) sum_y pi(y|x) / y; zero for an empty class.
double ps_buddy_rate(const PairState& s, int x);

/// dpi/dt of the PS pair approximation (d = 2).
PairState pair_ps_rhs(const PairState& s, const ModelParams& p);

namespace pair_ps {
void rhs(std::span<const double> s, int xmax, double lambda, std::span<double> out);
OdeSystem system(const ModelParams& p);
}  // namespace pair_ps

struct PairSolution {
    PairState state;
    QueueDist dist;
    SolveInfo info;
};

/// Euler iteration from the empty system to the fixed point.
PairSolution pair_ps_fixed_point(const ModelParams& p, const IntegratorConfig& cfg = {});

/// CSV `x,y,pi`.
std::string to_csv(const PairState& s);

/// Order-d symmetric tensor pi(x_1..x_d) on {1..xmax}^d (PS, d >= 2).
class PairStateD {
public:
    PairStateD() = default;
    PairStateD(int d, int xmax);
    PairStateD(int d, int xmax, std::vector<double> values);

    int d() const noexcept { return d_; }
    int xmax() const noexcept { return xmax_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::size_t index(std::span<const int> x) const;
    void decode(std::size_t flat, std::span<int> x) const;
    double at(std::span<const int> x) const;
    void set(std::span<const int> x, double v) { data_[index(x)] = v; }

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    /// pi(x) summed over the remaining d-1 coordinates.
    std::vector<double> marginal() const;
    /// q(0..xmax) with q(x) = d pi(x) / x.
    std::vector<double> queue_lengths() const;
    double max_asymmetry() const;

private:
    int d_ = 0;
    int xmax_ = 0;
    std::vector<double> data_;
};

PairStateD pair_ps_rhs_d(const PairStateD& s, const ModelParams& p);

namespace pair_ps_d {
void rhs(std::span<const double> s, int d, int xmax, double lambda, std::span<double> out);
OdeSystem system(const ModelParams& p);
}  // namespace pair_ps_d

struct PairSolutionD {
    PairStateD state;
    QueueDist dist;
    SolveInfo info;
};

/// Largest Euler step for which every coordinate's outflow rate times dt stays
/// below 0.95, using h(x) <= (x-1)(d-1). The buddy rate grows with d and xmax,
/// so the shared default step is unstable for d = 3 at xmax = 30.
double pair_ps_d_stable_dt(int d, int xmax, double lambda);

/// Integrates with min(cfg.dt, pair_ps_d_stable_dt(...)).
PairSolutionD pair_ps_d_fixed_point(const ModelParams& p, const IntegratorConfig& cfg = {});

}  // namespace redq
