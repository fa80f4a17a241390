#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace redq {

enum class Discipline { PS, FCFS, LCFS, LPS };

std::string_view to_string(Discipline d);
/// Case-insensitive; accepts "ps", "fcfs", "lcfs", "lps".
std::optional<Discipline> parse_discipline(std::string_view s);

/// Raised when model parameters fall outside their valid region. `field()`
/// names the offending parameter ("lambda", "d", "K", "xmax", ...).
class ParamError : public std::invalid_argument {
public:
    ParamError(std::string field, const std::string& what)
        : std::invalid_argument(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised by numerical routines that cannot produce a result (bracket
/// failure, singular solve, non-finite iterate, ...).
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ModelParams {
    double lambda = 0.9;
    int d = 2;
    Discipline discipline = Discipline::PS;
    int K = 1;
    int xmax = 50;
};

/// Default truncation bound for a replication factor.
constexpr int default_xmax(int d) { return d <= 2 ? 50 : 30; }

/// Throws ParamError naming the first violated field.
void validate_params(const ModelParams& p);

/// Truncated per-server queue-length distribution q(0..xmax).
class QueueDist {
public:
    static constexpr double kNormTol = 1e-9;
    static constexpr double kTailWarn = 1e-8;

    QueueDist() = default;
    /// Validates nonnegativity (entries above -1e-12 are clamped to zero) and
    /// |sum - 1| <= kNormTol. Throws SolverError otherwise.
    explicit QueueDist(std::vector<double> q);

    std::span<const double> q() const noexcept { return q_; }
    double operator[](std::size_t x) const { return x < q_.size() ? q_[x] : 0.0; }
    std::size_t size() const noexcept { return q_.size(); }
    int xmax() const noexcept { return static_cast<int>(q_.size()) - 1; }

    double mean() const;
    double total() const;
    /// Mass at indices >= xmax - 5.
    double tail_mass() const;
    bool truncation_warning() const { return tail_mass() > kTailWarn; }

private:
    std::vector<double> q_;
};

double dist_mean(const QueueDist& dist);

/// Metadata carried alongside a distribution when it is serialized.
struct DistMeta {
    double lambda = 0.0;
    int d = 2;
    Discipline discipline = Discipline::PS;
    int K = 1;
    std::optional<bool> converged;
    std::optional<double> ci_halfwidth;
    std::optional<int> replications;
};

/// CSV with header `x,q`.
std::string to_csv(const QueueDist& dist);
/// JSON object `{lambda, d, discipline, K, mean, q: [...]}` plus the optional
/// fields present in `meta`.
std::string to_json(const QueueDist& dist, const DistMeta& meta);

}  // namespace redq
