#include "redq/exact_small.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace redq {

void Ctmc::add(std::size_t from, std::size_t to, double rate) {
    if (rate <= 0.0 || from == to) return;
    rates.push_back({static_cast<std::uint32_t>(from), static_cast<std::uint32_t>(to), rate});
}

std::vector<double> Ctmc::stationary_direct() const {
    using SpMat = Eigen::SparseMatrix<double>;
    const auto n = static_cast<Eigen::Index>(states);
    const Eigen::Index last = n - 1;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * rates.size() + states);
    // Rows are balance equations (pi Q)^T = 0; the last one is replaced by sum(pi) = 1.
    for (const auto& r : rates) {
        if (r.to != last) t.emplace_back(r.to, r.from, r.rate);
        if (r.from != last) t.emplace_back(r.from, r.from, -r.rate);
    }
    for (Eigen::Index j = 0; j < n; ++j) t.emplace_back(last, j, 1.0);
    SpMat A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();

    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization of the generator failed");
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(last) = 1.0;
    const Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success) throw SolverError("sparse LU solve of the generator failed");

    std::vector<double> pi(x.data(), x.data() + n);
    for (double& v : pi) v = std::max(v, 0.0);
    const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
    for (double& v : pi) v /= total;
    return pi;
}

namespace {

struct Incoming {
    std::vector<std::size_t> start;
    std::vector<std::uint32_t> from;
    std::vector<double> rate;
    std::vector<double> out;
};

Incoming incoming(const Ctmc& c) {
    Incoming in;
    in.start.assign(c.states + 1, 0);
    in.out.assign(c.states, 0.0);
    for (const auto& r : c.rates) {
        ++in.start[r.to + 1];
        in.out[r.from] += r.rate;
    }
    std::partial_sum(in.start.begin(), in.start.end(), in.start.begin());
    in.from.resize(c.rates.size());
    in.rate.resize(c.rates.size());
    std::vector<std::size_t> fill(in.start.begin(), in.start.end() - 1);
    for (const auto& r : c.rates) {
        const std::size_t k = fill[r.to]++;
        in.from[k] = r.from;
        in.rate[k] = r.rate;
    }
    return in;
}

double balance_residual(const Incoming& in, const std::vector<double>& pi) {
    double worst = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
        double flow = 0.0;
        for (std::size_t k = in.start[j]; k < in.start[j + 1]; ++k) flow += pi[in.from[k]] * in.rate[k];
        worst = std::max(worst, std::abs(flow - pi[j] * in.out[j]));
    }
    return worst;
}

}  // namespace

double Ctmc::residual(const std::vector<double>& pi) const { return balance_residual(incoming(*this), pi); }

std::vector<double> Ctmc::stationary_iterative(double tol, std::size_t max_sweeps) const {
    const Incoming in = incoming(*this);
    std::vector<double> pi(states, 1.0 / static_cast<double>(states));
    for (std::size_t sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (std::size_t j = 0; j < states; ++j) {
            if (in.out[j] <= 0.0) throw SolverError("absorbing state in an irreducible chain");
            double flow = 0.0;
            for (std::size_t k = in.start[j]; k < in.start[j + 1]; ++k) flow += pi[in.from[k]] * in.rate[k];
            pi[j] = flow / in.out[j];
        }
        const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
        for (double& v : pi) v /= total;
        if (sweep % 10 == 0 && balance_residual(in, pi) < tol) return pi;
    }
    throw SolverError("Gauss-Seidel did not reach the balance tolerance");
}

// ---------------------------------------------------------------------------
// PS, three servers, one job class per pair of neighbouring servers

Ctmc ps_n3_chain(double lambda, int Kcap) {
    const int S = Kcap + 1;
    Ctmc c;
    c.states = static_cast<std::size_t>(S) * S * S;
    c.rates.reserve(c.states * 6);
    auto idx = [S](const int* s) { return (static_cast<std::size_t>(s[0]) * S + s[1]) * S + s[2]; };
    int s[3];
    for (s[0] = 0; s[0] <= Kcap; ++s[0]) {
        for (s[1] = 0; s[1] <= Kcap; ++s[1]) {
            for (s[2] = 0; s[2] <= Kcap; ++s[2]) {
                const std::size_t from = idx(s);
                for (int i = 0; i < 3; ++i) {
                    int t[3] = {s[0], s[1], s[2]};
                    if (s[i] < Kcap) {
                        t[i] = s[i] + 1;
                        c.add(from, idx(t), lambda);
                    }
                    if (s[i] > 0) {
                        const int next = s[(i + 1) % 3], prev = s[(i + 2) % 3];
                        const double rate = static_cast<double>(s[i]) / (s[i] + next) +
                                            static_cast<double>(s[i]) / (s[i] + prev);
                        t[i] = s[i] - 1;
                        c.add(from, idx(t), rate);
                    }
                }
            }
        }
    }
    return c;
}

QueueDist ps_n3_stationary(double lambda, int Kcap) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ParamError("lambda", "lambda must lie in (0, 1)");
    if (Kcap < 5) throw ParamError("Kcap", "Kcap must be >= 5");
    const Ctmc c = ps_n3_chain(lambda, Kcap);
    const auto pi = c.stationary_direct();
    const int S = Kcap + 1;
    std::vector<double> q(2 * Kcap + 1, 0.0);
    for (int a = 0; a <= Kcap; ++a) {
        for (int b = 0; b <= Kcap; ++b) {
            for (int d = 0; d <= Kcap; ++d) {
                const double w = pi[(static_cast<std::size_t>(a) * S + b) * S + d] / 3.0;
                // Server i hosts classes i-1 and i.
                q[d + a] += w;
                q[a + b] += w;
                q[b + d] += w;
            }
        }
    }
    return QueueDist(std::move(q));
}

// ---------------------------------------------------------------------------
// FCFS central queue

FcfsSequenceSpace::FcfsSequenceSpace(int Mcap) : mcap_(Mcap) {
    if (Mcap < 1 || Mcap > 12) throw ParamError("Mcap", "Mcap must lie in 1..12");
    pow3_.assign(Mcap + 1, 1);
    for (int m = 1; m <= Mcap; ++m) pow3_[m] = pow3_[m - 1] * 3;
    offset_.assign(Mcap + 2, 0);
    for (int m = 0; m <= Mcap; ++m) offset_[m + 1] = offset_[m] + pow3_[m];
}

std::size_t FcfsSequenceSpace::index(const std::vector<int>& seq) const {
    if (seq.size() > static_cast<std::size_t>(mcap_)) throw ParamError("Mcap", "sequence longer than Mcap");
    std::size_t code = 0;
    for (int c : seq) code = code * 3 + static_cast<std::size_t>(c);
    return offset_[seq.size()] + code;
}

std::vector<int> FcfsSequenceSpace::decode(std::size_t index) const {
    int m = 0;
    while (index >= offset_[m + 1]) ++m;
    std::size_t code = index - offset_[m];
    std::vector<int> seq(m);
    for (int k = m - 1; k >= 0; --k) {
        seq[k] = static_cast<int>(code % 3);
        code /= 3;
    }
    return seq;
}

Ctmc FcfsSequenceSpace::chain(double lambda) const {
    Ctmc c;
    c.states = size();
    c.rates.reserve(c.states * 6);
    std::vector<int> seq;
    for (int m = 0; m <= mcap_; ++m) {
        seq.assign(m, 0);
        for (std::size_t code = 0; code < pow3_[m]; ++code) {
            std::size_t rest = code;
            for (int k = m - 1; k >= 0; --k) {
                seq[k] = static_cast<int>(rest % 3);
                rest /= 3;
            }
            const std::size_t from = offset_[m] + code;
            if (m < mcap_) {
                for (int cls = 0; cls < 3; ++cls) c.add(from, offset_[m + 1] + code * 3 + cls, lambda);
            }
            // Each server works on the earliest job it hosts.
            unsigned claimed = 0;
            for (int i = 0; i < m && claimed != 7u; ++i) {
                const unsigned mine = (1u << seq[i]) | (1u << ((seq[i] + 1) % 3));
                const int free = std::popcount(mine & ~claimed);
                claimed |= mine;
                if (free == 0) continue;
                const std::size_t hi = code / pow3_[m - i], lo = code % pow3_[m - 1 - i];
                c.add(from, offset_[m - 1] + hi * pow3_[m - 1 - i] + lo, static_cast<double>(free));
            }
        }
    }
    return c;
}

QueueDist fcfs_n3_stationary(double lambda, int Mcap) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ParamError("lambda", "lambda must lie in (0, 1)");
    if (Mcap < 8) throw ParamError("Mcap", "Mcap must be >= 8");
    const FcfsSequenceSpace space(Mcap);
    const auto pi = space.chain(lambda).stationary_iterative();
    std::vector<double> q(Mcap + 1, 0.0);
    for (std::size_t i = 0; i < pi.size(); ++i) {
        int len[3] = {0, 0, 0};
        for (int cls : space.decode(i)) {
            ++len[cls];
            ++len[(cls + 1) % 3];
        }
        for (int s = 0; s < 3; ++s) q[len[s]] += pi[i] / 3.0;
    }
    return QueueDist(std::move(q));
}

QueueDist fcfs_n3_product_form(double lambda, double tail_tol) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ParamError("lambda", "lambda must lie in (0, 1)");
    // A sequence starts with a run of k >= 1 jobs of one class (two busy
    // servers, factor lambda/2 each). Its first job of another class makes all
    // three servers busy (factor lambda/3); each later job has three equally
    // weighted classes, so a tail of m jobs weighs lambda^m in total and
    // covers a given server Binomial(m, 2/3) times.
    const double a = lambda / 2.0;
    int kmax = 1;
    while (std::pow(a, kmax) > tail_tol) ++kmax;
    int mmax = 1;
    while (std::pow(lambda, mmax) * mmax > tail_tol) ++mmax;

    std::vector<double> tail(mmax + 1, 0.0);  // sum_m lambda^m P(Bin(m,2/3) = i)
    std::vector<double> pmf{1.0};
    double lam_m = 1.0, tail_weight = 0.0;
    for (int m = 0; m <= mmax; ++m) {
        for (int i = 0; i <= m; ++i) tail[i] += lam_m * pmf[i];
        tail_weight += lam_m;
        std::vector<double> next(m + 2, 0.0);
        for (int i = 0; i <= m; ++i) {
            next[i] += pmf[i] / 3.0;
            next[i + 1] += pmf[i] * 2.0 / 3.0;
        }
        pmf = std::move(next);
        lam_m *= lambda;
    }

    std::vector<double> q(kmax + mmax + 3, 0.0);
    double z = 1.0;
    q[0] += 1.0;
    double ak = 1.0;
    for (int k = 1; k <= kmax; ++k) {
        ak *= a;
        // Entries of q collect the three per-server lengths of each state with
        // weight 1/3. Run only: two servers hold k jobs, the third is idle.
        z += 3.0 * ak;
        q[k] += 2.0 * ak;
        q[0] += ak;
        // Run, switch job, tail: before the tail the servers hold k, k+1 and 1.
        const double w = 6.0 * (lambda / 3.0) * ak;
        z += w * tail_weight;
        for (int i = 0; i <= mmax; ++i) {
            const double t = w / 3.0 * tail[i];
            q[k + i] += t;
            q[k + 1 + i] += t;
            q[1 + i] += t;
        }
    }
    for (double& v : q) v /= z;
    return QueueDist(std::move(q));
}

double fcfs_asymptotic_mean(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw ParamError("lambda", "lambda must lie in (0, 1)");
    return 2.0 * (-std::log1p(-lambda) - lambda) / lambda;
}

}  // namespace redq
