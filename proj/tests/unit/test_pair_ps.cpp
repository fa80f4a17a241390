#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "properties.hpp"
#include "redq/meanfield.hpp"
#include "redq/pair_ps.hpp"
#include "reference.hpp"

using namespace redq;
using redq::testing::close_to;

TEST(BuddyRate, ZeroForSingleJobQueues) {
    const auto s = redq::testing::random_pair(8, 3);
    EXPECT_EQ(ps_buddy_rate(s, 1), 0.0);
}

TEST(BuddyRate, SingleTypeState) {
    PairState s(5);
    s.set(2, 2, 0.3);
    EXPECT_DOUBLE_EQ(ps_buddy_rate(s, 2), 0.5);
    EXPECT_EQ(ps_buddy_rate(s, 3), 0.0);  // empty class
}

TEST(BuddyRate, ProductFormIsLinear) {
    const auto q = redq::testing::geometric_q(40, 0.6);
    const auto s = redq::testing::product_form_pair(q);
    double qbar = 0.0;
    for (int x = 1; x <= 40; ++x) qbar += x * q[x];
    for (int x = 1; x <= 40; ++x) EXPECT_NEAR(ps_buddy_rate(s, x), (x - 1) * (1.0 - q[0]) / qbar, 1e-12) << x;
}

TEST(PairRhs, EmptyStateCreatesOneOne) {
    ModelParams p;
    p.lambda = 0.9;
    p.xmax = 10;
    const auto d = pair_ps_rhs(PairState(10), p);
    EXPECT_DOUBLE_EQ(d.at(1, 1), 0.9);
    for (int x = 1; x <= 10; ++x) {
        for (int y = 1; y <= 10; ++y) {
            if (x + y > 2) EXPECT_EQ(d.at(x, y), 0.0);
        }
    }
}

namespace {

// Direct transcription of the pair ODE, one coordinate at a time.
double reference_rhs(const PairState& s, double lambda, int x, int y) {
    const auto q = s.queue_lengths();
    auto qq = [&](int k) { return k >= 0 && k < static_cast<int>(q.size()) ? q[k] : 0.0; };
    auto h = [&](int k) { return k >= 1 && k <= s.xmax() ? ps_buddy_rate(s, k) : 0.0; };
    return lambda * qq(x - 1) * qq(y - 1) + 2 * lambda * (s.at(x - 1, y) + s.at(x, y - 1) - 2 * s.at(x, y)) +
           s.at(x + 1, y) * (h(x + 1) + static_cast<double>(x) / (x + 1)) +
           s.at(x, y + 1) * (h(y + 1) + static_cast<double>(y) / (y + 1)) - s.at(x, y) * (2 + h(x) + h(y));
}

}  // namespace

TEST(PairRhs, MatchesTranscription) {
    ModelParams p;
    p.lambda = 0.8;
    p.xmax = 9;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto s = redq::testing::random_pair(9, seed);
        const auto d = pair_ps_rhs(s, p);
        for (int x = 1; x <= 9; ++x) {
            for (int y = 1; y <= 9; ++y) EXPECT_NEAR(d.at(x, y), reference_rhs(s, 0.8, x, y), 1e-14);
        }
    }
}

TEST(PairRhs, SymmetricInSymmetricOut) {
    ModelParams p;
    p.lambda = 0.9;
    p.xmax = 15;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto d = pair_ps_rhs(redq::testing::random_pair(15, seed), p);
        EXPECT_EQ(d.max_asymmetry(), 0.0);
    }
}

TEST(PairRhs, MeanFieldCollapse) {
    const auto q = redq::testing::geometric_q(60, 0.5);
    EXPECT_LT(redq::testing::pair_mean_field_collapse(q, 0.9, 50), 1e-10);
    EXPECT_LT(redq::testing::pair_mean_field_collapse(q, 0.4, 50), 1e-10);
}

TEST(PairRhs, TransientMassBalance) {
    ModelParams p;
    p.lambda = 0.9;
    p.xmax = 20;
    const auto sys = pair_ps::system(p);
    State s(sys.dim, 0.0);
    for (double span : {0.2, 1.0, 5.0, 20.0, 100.0}) {
        s = euler_integrate(sys, s, {}, span);
        const auto mb = redq::testing::pair_mass_balance(PairState(20, s), 0.9);
        EXPECT_LE(mb.error, mb.bound) << span;
        EXPECT_LT(PairState(20, s).max_asymmetry(), 1e-12);
    }
}

TEST(PairFixedPoint, PublishedRows) {
    for (const auto& r : ref::kPairPs) {
        ModelParams p;
        p.lambda = r.lambda;
        const auto s = pair_ps_fixed_point(p);
        ASSERT_TRUE(s.info.converged);
        EXPECT_NEAR(s.dist.mean(), r.mean, 2e-3) << r.lambda;
        for (std::size_t i = 0; i < ref::kListedX.size(); ++i) {
            EXPECT_TRUE(close_to(s.dist[ref::kListedX[i]], r.q[i], 5e-4, 0.01)) << r.lambda << " x=" << ref::kListedX[i];
        }
        EXPECT_NEAR(s.dist[0], 1.0 - r.lambda, 1e-6);
        EXPECT_LT(s.state.max_asymmetry(), 1e-12);
        EXPECT_FALSE(s.dist.truncation_warning());
    }
}

TEST(PairFixedPoint, ResidualBelowTolerance) {
    ModelParams p;
    p.lambda = 0.9;
    const auto s = pair_ps_fixed_point(p);
    const auto d = pair_ps_rhs(s.state, p);
    double worst = 0.0;
    for (double v : d.values()) worst = std::max(worst, std::abs(v));
    EXPECT_LT(worst, 1e-9);
}

TEST(PairFixedPoint, RejectsOtherD) {
    ModelParams p;
    p.d = 3;
    EXPECT_THROW(pair_ps_fixed_point(p), ParamError);
}

TEST(PairTensor, ReducesToMatrixModelForD2) {
    ModelParams p;
    p.lambda = 0.85;
    p.xmax = 12;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto s = redq::testing::random_pair(12, seed);
        PairStateD t(2, 12, std::vector<double>(s.values().begin(), s.values().end()));
        const auto a = pair_ps_rhs(s, p);
        const auto b = pair_ps_rhs_d(t, p);
        for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-15);
    }
}

TEST(PairTensor, EmptyStateCreatesOneOneOne) {
    ModelParams p;
    p.lambda = 0.7;
    p.d = 3;
    p.xmax = 6;
    const auto d = pair_ps_rhs_d(PairStateD(3, 6), p);
    const std::vector<int> one{1, 1, 1};
    EXPECT_DOUBLE_EQ(d.at(one), 0.7);
    double rest = 0.0;
    for (double v : d.values()) rest += v;
    EXPECT_DOUBLE_EQ(rest, 0.7);
}

TEST(PairTensor, PermutationSymmetryPreserved) {
    ModelParams p;
    p.lambda = 0.8;
    p.d = 3;
    p.xmax = 8;
    const auto sys = pair_ps_d::system(p);
    IntegratorConfig cfg;
    cfg.dt = pair_ps_d_stable_dt(3, 8, 0.8);
    const auto s = euler_integrate(sys, State(sys.dim, 0.0), cfg, 20.0);
    EXPECT_LT(PairStateD(3, 8, s).max_asymmetry(), 1e-12);
}

TEST(PairTensor, ThreeReplicaRow) {
    ModelParams p;
    p.lambda = ref::kPairPsD3.lambda;
    p.d = 3;
    p.xmax = 30;
    const auto s = pair_ps_d_fixed_point(p);
    ASSERT_TRUE(s.info.converged);
    EXPECT_NEAR(s.dist.mean(), ref::kPairPsD3.mean, 2e-3);
    for (std::size_t i = 0; i < ref::kListedX.size(); ++i) {
        EXPECT_TRUE(close_to(s.dist[ref::kListedX[i]], ref::kPairPsD3.q[i], 5e-4, 0.01)) << ref::kListedX[i];
    }
    EXPECT_NEAR(s.dist[0], 1.0 - p.lambda, 1e-6);
}

TEST(PairTensor, StableStepShrinksWithSize) {
    EXPECT_LT(pair_ps_d_stable_dt(3, 30, 0.9), pair_ps_d_stable_dt(3, 10, 0.9));
    EXPECT_LT(pair_ps_d_stable_dt(4, 10, 0.9), pair_ps_d_stable_dt(3, 10, 0.9));
}

TEST(PairCsv, Header) {
    PairState s(3);
    s.set_sym(1, 2, 0.125);
    const auto csv = to_csv(s);
    EXPECT_EQ(csv.substr(0, 7), "x,y,pi\n");
    EXPECT_NE(csv.find("1,2,0.125"), std::string::npos);
}
