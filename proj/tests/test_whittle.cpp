#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <sstream>

#include "fair_rmab/arm.hpp"
#include "fair_rmab/rng.hpp"
#include "fair_rmab/whittle.hpp"

using namespace fair_rmab;

namespace {

ArmParams random_arm(SplitMix64& rng) {
    InstanceSpec spec;
    spec.n_arms = 1;
    spec.budget = 1;
    spec.horizon = 1;
    spec.seed = rng.next();
    return generate_instance(spec)[0];
}

}  // namespace

TEST_CASE("residual-horizon anchors: lambda_0 = 0 and lambda_1 = W_1") {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const ArmParams a = random_arm(rng);
        const int s = static_cast<int>(rng.uniform_int(2));
        const int u = 1 + static_cast<int>(rng.uniform_int(6));
        const double beta = rng.uniform(0.5, 0.99);
        CHECK(exact_finite_whittle(a, s, u, beta, 0).lambda == 0.0);
        const double w1 = w1_index(a, belief_u_step(s, u, a), beta);
        const BisectionResult r = exact_finite_whittle(a, s, u, beta, 1);
        REQUIRE(r.bracketed);
        CHECK(r.lambda == doctest::Approx(w1).epsilon(1e-7));
        CHECK(w1 > 0.0);
    }
}

TEST_CASE("W_1 closed form evaluates the stated example") {
    // beta=0.9, omega=1: only the s=1 row matters.
    const ArmParams a = ArmParams::make(0.4, 0.9, 0.2, 0.6);
    CHECK(w1_index(a, 1.0, 0.9) == doctest::Approx(0.27).epsilon(1e-12));
}

TEST_CASE("fast sweep agrees with the bisection oracle") {
    SplitMix64 rng(22);
    const int L = 40;
    for (int trial = 0; trial < 30; ++trial) {
        const ArmParams a = random_arm(rng);
        const FastWhittleResult fw = fast_whittle_infinite(a, L);
        CHECK_FALSE(fw.fallback);
        for (const auto& [s, u] : {std::pair{0, 1}, {1, 1}, {0, 3}, {1, 3}, {0, 7}, {1, 7}}) {
            const BisectionResult r = whittle_binary_search(a, s, u, kAvgRewardProxyBeta, L);
            if (!r.bracketed) continue;
            CHECK(std::abs(r.lambda - fw.table.at(s, u)) <= 1e-3);
        }
        for (int s = 0; s < 2; ++s) {
            for (int u = 1; u <= L; ++u) CHECK(std::isfinite(fw.table.at(s, u)));
        }
    }
}

TEST_CASE("above the index the oracle prefers passive") {
    SplitMix64 rng(23);
    const int L = 30;
    for (int trial = 0; trial < 10; ++trial) {
        const ArmParams a = random_arm(rng);
        const FastWhittleResult fw = fast_whittle_infinite(a, L);
        for (const auto& [s, u] : {std::pair{0, 2}, {1, 2}}) {
            const double lam = fw.table.at(s, u) + 1e-3;
            BeliefChainMDP mdp = BeliefChainMDP::make(a, L, kAvgRewardProxyBeta, lam);
            const ChainSolution sol = solve_infinite(mdp);
            const StateQ q = state_q(mdp, sol, s, u);
            CHECK(q.q_passive >= q.q_active - 1e-9);
        }
    }
}

TEST_CASE("negatively correlated arms take the bisection fallback") {
    const ArmParams neg = ArmParams::make(0.9, 0.5, 0.8, 0.2);
    const FastWhittleResult fw = fast_whittle_infinite(neg, 10);
    CHECK(fw.fallback);
    for (int s = 0; s < 2; ++s) {
        for (int u = 1; u <= 10; ++u) CHECK(std::isfinite(fw.table.at(s, u)));
    }
}

TEST_CASE("logistic finite-horizon interpolation") {
    SplitMix64 rng(24);
    for (int trial = 0; trial < 200; ++trial) {
        const ArmParams a = random_arm(rng);
        const double omega = rng.next_double();
        const double beta = rng.uniform(0.5, 0.99);
        const double w1 = w1_index(a, omega, beta);
        const double tw = w1 * rng.uniform(1.05, 4.0);  // proper logistic regime
        const FiniteWhittleValue w0 = finite_whittle(a, omega, beta, 0.0, tw);
        CHECK(w0.value == 0.0);
        CHECK(w0.fit == FiniteWhittleValue::Fit::logistic);
        const FiniteWhittleValue at1 = finite_whittle(a, omega, beta, 1.0, tw);
        CHECK(std::abs(at1.value - w1) <= 1e-12);
        const FiniteWhittleValue far = finite_whittle(a, omega, beta, 1e6, tw);
        CHECK(std::abs(far.value - tw) <= 1e-6);
        // Monotone in T and bounded by tw.
        double prev = 0.0;
        for (double T = 0.0; T <= 40.0; T += 1.0) {
            const double v = finite_whittle(a, omega, beta, T, tw).value;
            CHECK(v >= prev - 1e-12);
            CHECK(v <= tw + 1e-12);
            prev = v;
        }
    }
}

TEST_CASE("degenerate logistic fits") {
    const ArmParams a = ArmParams::make(0.4, 0.9, 0.2, 0.8);
    const double w1 = w1_index(a, 0.5, 0.95);
    // tw <= 0: flagged degenerate, index 0.
    const FiniteWhittleValue d = finite_whittle(a, 0.5, 0.95, 5.0, -0.1);
    CHECK(d.value == 0.0);
    CHECK(d.fit == FiniteWhittleValue::Fit::degenerate);
    // 0 < tw <= W_1: linear-capped fallback.
    const double tw = 0.5 * w1;
    const FiniteWhittleValue lc = finite_whittle(a, 0.5, 0.95, 3.0, tw);
    CHECK(lc.fit == FiniteWhittleValue::Fit::linear_capped);
    CHECK(lc.value == doctest::Approx(std::min(3.0 * w1, tw)));
    CHECK(finite_whittle(a, 0.5, 0.95, 0.0, tw).value == 0.0);
}

TEST_CASE("threshold policy occupancy closed form") {
    SplitMix64 rng(25);
    for (int trial = 0; trial < 100; ++trial) {
        const ArmParams a = random_arm(rng);
        const int L = 20;
        const int b0 = 1 + static_cast<int>(rng.uniform_int(L));
        const int b1 = 1 + static_cast<int>(rng.uniform_int(L));
        const double lam = rng.uniform(-1.0, 1.0);
        const ThresholdPolicyEval ev = eval_threshold_policy(a, b0, b1, lam, L);
        CHECK(ev.occupancy_a >= 0.0);
        CHECK(ev.occupancy_a <= 1.0);
        CHECK(ev.occupancy_b >= 0.0);
        CHECK(ev.occupancy_b <= 1.0);
        // Occupancy over visited states sums to one.
        CHECK(ev.occupancy_a * b0 + ev.occupancy_b * b1 == doctest::Approx(1.0).epsilon(1e-9));
        // Subsidy enters linearly through the passive fraction.
        const ThresholdPolicyEval ev2 = eval_threshold_policy(a, b0, b1, lam + 1.0, L);
        CHECK(ev2.avg_reward - ev.avg_reward ==
              doctest::Approx(1.0 - ev.occupancy_a - ev.occupancy_b).epsilon(1e-9));
    }
    CHECK_THROWS_AS(eval_threshold_policy(ArmParams::make(0.4, 0.9, 0.2, 0.8), 0, 1, 0.0, 10),
                    std::invalid_argument);
}

TEST_CASE("threshold-policy average reward is stationary under simulation") {
    // Long-run empirical frequency of a (b0,b1) policy matches the closed
    // form, tying ThresholdPolicyEval to the chain dynamics it models.
    const ArmParams a = ArmParams::make(0.45, 0.9, 0.25, 0.8);
    const int b0 = 4, b1 = 2, L = 10;
    const ThresholdPolicyEval ev = eval_threshold_policy(a, b0, b1, 0.0, L);
    SplitMix64 rng(321);
    int s = 1, u = 1;
    long visits_a = 0, visits_b = 0, steps = 0;
    double reward_acc = 0.0;
    const long horizon = 400000;
    for (long t = 0; t < horizon; ++t) {
        const double omega = belief_u_step(s, u, a);
        reward_acc += omega;
        if (s == 0) ++visits_a; else ++visits_b;
        const bool act = (s == 0 && u >= b0) || (s == 1 && u >= b1);
        if (act) {
            s = rng.bernoulli(omega) ? 1 : 0;
            u = 1;
        } else {
            ++u;
        }
        ++steps;
    }
    CHECK(static_cast<double>(visits_a) / steps ==
          doctest::Approx(ev.occupancy_a * b0).epsilon(0.02));
    CHECK(static_cast<double>(visits_b) / steps ==
          doctest::Approx(ev.occupancy_b * b1).epsilon(0.02));
    CHECK(reward_acc / steps == doctest::Approx(ev.avg_reward).epsilon(0.02));
}

TEST_CASE("fully observable index") {
    SplitMix64 rng(26);
    for (int trial = 0; trial < 20; ++trial) {
        const ArmParams a = random_arm(rng);
        const double i0 = fully_observable_index(a, 0, 0.95);
        const double i1 = fully_observable_index(a, 1, 0.95);
        // Acting helps in both rows, so both subsidies are positive.
        CHECK(i0 > 0.0);
        CHECK(i1 > 0.0);
    }
}

TEST_CASE("index table lookup clamps the elapsed time") {
    const ArmParams a = ArmParams::make(0.4, 0.9, 0.2, 0.8);
    const FastWhittleResult fw = fast_whittle_infinite(a, 12);
    CHECK(fw.table.at(0, 100) == fw.table.at(0, 12));
    CHECK(fw.table.at(1, -3) == fw.table.at(1, 1));
}

TEST_CASE("index csv export shape") {
    const ArmParams a = ArmParams::make(0.4, 0.9, 0.2, 0.8);
    std::vector<IndexTable> tables = {fast_whittle_infinite(a, 5).table};
    std::ostringstream os;
    write_index_csv(os, tables);
    std::istringstream is(os.str());
    std::string line;
    int lines = 0;
    while (std::getline(is, line)) ++lines;
    CHECK(lines == 1 + 2 * 5);
    CHECK(os.str().rfind("arm_id,s,u,horizon,index", 0) == 0);
}

TEST_CASE("single-state index matches the table") {
    SplitMix64 rng(27);
    for (int trial = 0; trial < 10; ++trial) {
        const ArmParams a = random_arm(rng);
        const int L = 25;
        const FastWhittleResult fw = fast_whittle_infinite(a, L);
        for (const auto& [s, u] : {std::pair{0, 1}, {1, 2}, {0, 5}}) {
            CHECK(std::abs(infinite_state_index(a, s, u, L) - fw.table.at(s, u)) <= 1e-3);
        }
    }
}
