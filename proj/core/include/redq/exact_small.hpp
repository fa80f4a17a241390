#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "redq/model.hpp"

namespace redq {

/// Finite continuous-time Markov chain given by its off-diagonal rates.
struct Ctmc {
    struct Rate {
        std::uint32_t from;
        std::uint32_t to;
        double rate;
    };

    std::size_t states = 0;
    std::vector<Rate> rates;

    void add(std::size_t from, std::size_t to, double rate);

    /// Sparse LU on the balance equations with one row replaced by the
    /// normalization. Throws SolverError if the factorization fails.
    std::vector<double> stationary_direct() const;

    /// Gauss-Seidel sweeps over the balance equations, renormalized after each
    /// sweep, until the balance residual drops below `tol`.
    std::vector<double> stationary_iterative(double tol = 1e-10, std::size_t max_sweeps = 200000) const;

    /// sup_j |(pi Q)_j|.
    double residual(const std::vector<double>& pi) const;
};

/// Transition rates of the three-server PS chain truncated at Kcap jobs per
/// class. State (s1,s2,s3) has index (s1 * (Kcap+1) + s2) * (Kcap+1) + s3.
Ctmc ps_n3_chain(double lambda, int Kcap);

/// Per-server queue-length distribution of the n = 3, d = 2 PS system.
QueueDist ps_n3_stationary(double lambda, int Kcap = 20);

/// Central-queue FCFS chain on job-class sequences of length <= Mcap.
/// Class c occupies servers c and c+1 (mod 3).
class FcfsSequenceSpace {
public:
    explicit FcfsSequenceSpace(int Mcap);

    int max_length() const noexcept { return mcap_; }
    std::size_t size() const noexcept { return offset_.back(); }
    std::size_t index(const std::vector<int>& seq) const;
    std::vector<int> decode(std::size_t index) const;

    Ctmc chain(double lambda) const;

private:
    int mcap_;
    std::vector<std::size_t> offset_;  // first index of each length, plus total
    std::vector<std::size_t> pow3_;
};

QueueDist fcfs_n3_stationary(double lambda, int Mcap = 11);

/// Untruncated per-server distribution of the same central-queue system from
/// its product-form stationary law, pi(c_1..c_m) proportional to
/// prod_i lambda / |servers used by c_1..c_i|. Summed until the remaining
/// weight is below `tail_tol`.
QueueDist fcfs_n3_product_form(double lambda, double tail_tol = 1e-16);

/// 2(ln(1/(1-lambda)) - lambda) / lambda.
double fcfs_asymptotic_mean(double lambda);

}  // namespace redq
