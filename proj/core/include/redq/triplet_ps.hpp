#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "redq/model.hpp"
#include "redq/ode.hpp"

namespace redq {

/// Scaled triplet counts c(x,y,z) of paths end-middle-end with node degrees
/// x, y, z, stored for 1 <= x,z <= xmax and 2 <= y <= xmax, followed by the
/// scalar pi(1,1) for isolated edges between two degree-one nodes.
class TripletState {
public:
    TripletState() = default;
    explicit TripletState(int xmax);
    TripletState(int xmax, std::vector<double> values);

    int xmax() const noexcept { return xmax_; }
    /// Flat size: xmax * (xmax-1) * xmax + 1.
    static std::size_t flat_size(int xmax);

    std::size_t index(int x, int y, int z) const {
        const auto X = static_cast<std::size_t>(xmax_);
        return (static_cast<std::size_t>(x - 1) * (X - 1) + static_cast<std::size_t>(y - 2)) * X +
               static_cast<std::size_t>(z - 1);
    }
    /// Zero for y < 2 or any index outside the stored range.
    double at(int x, int y, int z) const {
        if (x < 1 || z < 1 || y < 2 || x > xmax_ || y > xmax_ || z > xmax_) return 0.0;
        return data_[index(x, y, z)];
    }
    void set(int x, int y, int z, double v) { data_[index(x, y, z)] = v; }
    /// Sets c(x,y,z) and c(z,y,x).
    void set_sym(int x, int y, int z, double v) {
        data_[index(x, y, z)] = v;
        data_[index(z, y, x)] = v;
    }
    double pi11() const { return data_.back(); }
    void set_pi11(double v) { data_.back() = v; }

    std::span<const double> values() const noexcept { return data_; }
    std::span<double> values() noexcept { return data_; }

    /// pi(x, y) for y >= 2 (sum over the far end divided by y-1); pi(1,1) for
    /// (1,1); pi(x,1) through symmetry otherwise.
    double pair(int x, int y) const;
    /// q(0..xmax) from the triplet counts.
    std::vector<double> queue_lengths() const;
    double max_asymmetry() const;

private:
    int xmax_ = 0;
    std::vector<double> data_;
};

/// Probability that a random neighbour of a degree-y node has degree x.
double cond_degree(const TripletState& s, int x, int y);

/// Degree distribution of a further neighbour of the middle node of an
/// (x,y,z) triplet, pooled over both ends.
double cond_degree_triplet(const TripletState& s, int v, int x, int y, int z);

/// Loss rate of an end node of degree x whose neighbour on the triplet has
/// degree y: sum_v c(v|y,x) (x-1)/v. Evaluated by enumeration.
double triplet_end_rate(const TripletState& s, int y, int x);

/// Per-pair middle-node loss rate
/// sum_z c(x,y,z) sum_v c(v|x,y,z) / v / pi(x,y), evaluated by enumeration.
/// Written without the (y-2) prefactor so it stays defined at y = 2.
double triplet_middle_rate(const TripletState& s, int x, int y);

namespace triplet_ps {
void rhs(std::span<const double> s, int xmax, double lambda, std::span<double> out);
OdeSystem system(const ModelParams& p);
}  // namespace triplet_ps

TripletState triplet_rhs(const TripletState& s, const ModelParams& p);

struct TripletSolution {
    TripletState state;
    QueueDist dist;
    SolveInfo info;
};

TripletSolution triplet_fixed_point(const ModelParams& p, const IntegratorConfig& cfg = {});

}  // namespace redq
