#include "redq/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace redq {

std::string_view to_string(Discipline d) {
    switch (d) {
        case Discipline::PS: return "PS";
        case Discipline::FCFS: return "FCFS";
        case Discipline::LCFS: return "LCFS";
        case Discipline::LPS: return "LPS";
    }
    return "?";
}

std::optional<Discipline> parse_discipline(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "ps") return Discipline::PS;
    if (lower == "fcfs") return Discipline::FCFS;
    if (lower == "lcfs") return Discipline::LCFS;
    if (lower == "lps") return Discipline::LPS;
    return std::nullopt;
}

void validate_params(const ModelParams& p) {
    if (!(p.lambda > 0.0 && p.lambda < 1.0)) {
        throw ParamError("lambda", "lambda must lie in (0,1), got " + std::to_string(p.lambda));
    }
    if (p.d < 1) throw ParamError("d", "d must be >= 1, got " + std::to_string(p.d));
    if (p.K < 1) throw ParamError("K", "K must be >= 1, got " + std::to_string(p.K));
    if (p.xmax < 2) throw ParamError("xmax", "xmax must be >= 2, got " + std::to_string(p.xmax));
}

QueueDist::QueueDist(std::vector<double> q) : q_(std::move(q)) {
    if (q_.empty()) throw SolverError("empty queue-length distribution");
    double sum = 0.0;
    for (std::size_t x = 0; x < q_.size(); ++x) {
        double& v = q_[x];
        if (!std::isfinite(v)) throw SolverError("non-finite q(" + std::to_string(x) + ")");
        if (v < 0.0) {
            if (v < -1e-12) {
                throw SolverError("negative q(" + std::to_string(x) + ") = " + std::to_string(v));
            }
            v = 0.0;
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kNormTol) {
        std::ostringstream os;
        os.precision(17);
        os << "distribution not normalized: sum = " << sum;
        throw SolverError(os.str());
    }
}

double QueueDist::mean() const {
    double m = 0.0;
    for (std::size_t x = 1; x < q_.size(); ++x) m += static_cast<double>(x) * q_[x];
    return m;
}

double QueueDist::total() const {
    double s = 0.0;
    for (double v : q_) s += v;
    return s;
}

double QueueDist::tail_mass() const {
    const std::size_t from = q_.size() > 6 ? q_.size() - 6 : 0;
    double s = 0.0;
    for (std::size_t x = from; x < q_.size(); ++x) s += q_[x];
    return s;
}

double dist_mean(const QueueDist& dist) { return dist.mean(); }

std::string to_csv(const QueueDist& dist) {
    std::ostringstream os;
    os.precision(17);
    os << "x,q\n";
    for (std::size_t x = 0; x < dist.size(); ++x) os << x << ',' << dist[x] << '\n';
    return os.str();
}

std::string to_json(const QueueDist& dist, const DistMeta& meta) {
    nlohmann::ordered_json j;
    j["lambda"] = meta.lambda;
    j["d"] = meta.d;
    j["discipline"] = std::string(to_string(meta.discipline));
    j["K"] = meta.K;
    j["mean"] = dist.mean();
    j["tail_mass"] = dist.tail_mass();
    if (meta.converged) j["converged"] = *meta.converged;
    if (meta.ci_halfwidth) {
        if (std::isfinite(*meta.ci_halfwidth)) {
            j["ci_halfwidth"] = *meta.ci_halfwidth;
        } else {
            j["ci_halfwidth"] = nullptr;
        }
    }
    if (meta.replications) j["replications"] = *meta.replications;
    j["q"] = std::vector<double>(dist.q().begin(), dist.q().end());
    return j.dump(2);
}

}  // namespace redq
