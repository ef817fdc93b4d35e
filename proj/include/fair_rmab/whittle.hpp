#pragma once

#include <optional>
#include <vector>

#include "fair_rmab/arm.hpp"
#include "fair_rmab/belief_chain.hpp"

namespace fair_rmab {

// Discount used as the beta->1 proxy when computing the infinite-horizon
// production index and when cross-checking against the bisection oracle.
inline constexpr double kAvgRewardProxyBeta = 0.999;

struct IndexTable {
    enum class Horizon { infinite, finite };
    Horizon horizon = Horizon::infinite;
    int finite_T = 0;  // populated for finite tables
    int window = 0;    // L
    // values[s][u-1], u in 1..window
    std::array<std::vector<double>, 2> values;

    double at(int s, int u) const;  // u clamped into [1, window]
};

struct BisectionResult {
    double lambda = 0.0;
    bool bracketed = true;  // false: no sign change, non-indexable suspect
    double lo = 0.0, hi = 0.0;
    int iterations = 0;
};

// Reference index solver: bisection on the subsidy with the indifference gap
// evaluated through the chain-MDP optimum. The structure-free oracle that
// anchors the fast sweep's tests.
BisectionResult whittle_binary_search(const ArmParams& arm, int s, int u, double beta,
                                      int chain_len, double tol = 1e-8, int max_iter = 200);

// Finite-horizon exact index (test-scale solver, residual horizon T in the
// W_T subscript convention: T = 0 prices the final decision epoch, so the
// value recursion runs T+1 backups). Intended for T <= ~8.
BisectionResult exact_finite_whittle(const ArmParams& arm, int s, int u, double beta, int T,
                                     double tol = 1e-8, int max_iter = 200);

// W_1(omega) = beta(omega (P^a_11 - P^p_11) + (1-omega)(P^a_01 - P^p_01)).
double w1_index(const ArmParams& arm, double omega, double beta);

// Production infinite-horizon index table over (s,u), u in 1..L.
//
// Adaptive threshold sweep: peel states in ascending index order; the index
// of the state at the frontier is the subsidy equating the values of the two
// adjacent policies that differ only in that state's action, evaluated in
// closed form (policy values are affine in the subsidy). On arms with the
// forward-threshold structure the visited policy pairs are exactly the
// adjacent (B_0,B_1) threshold policies. Exact for indexable arms.
//
// Non positively correlated arms fall back to whittle_binary_search per
// state; `fallback` is set on the result.
struct FastWhittleResult {
    IndexTable table;
    bool fallback = false;
};
FastWhittleResult fast_whittle_infinite(const ArmParams& arm, int L,
                                        double beta = kAvgRewardProxyBeta);

// Single-state flavor used by per-epoch posterior-sampling policies, where a
// full table per sampled parameter set would be wasted work.
double infinite_state_index(const ArmParams& arm, int s, int u, int chain_len,
                            double beta = kAvgRewardProxyBeta, double tol = 1e-7);

// Finite-horizon index via the logistic interpolation
//   W_T = A / (1 + e^{-kT}) + C,  A = 2 tw, C = -tw,
// with k fitted so W_1 is exact. tw is the infinite-horizon index for the
// same belief. Degenerate fits (tw <= 0 or W_1 <= 0) return 0; tw <= W_1
// falls back to the linear-capped min(W_1 T, tw).
struct FiniteWhittleValue {
    double value = 0.0;
    enum class Fit { logistic, linear_capped, degenerate } fit = Fit::logistic;
};
FiniteWhittleValue finite_whittle(const ArmParams& arm, double omega, double beta, double T,
                                  double tw);

// Materialized finite-horizon table at a fixed residual horizon; entries are
// finite_whittle at each chain state, anchored on the infinite table.
IndexTable finite_whittle_table(const ArmParams& arm, double beta, int residual_T,
                                const IndexTable& infinite);

// Average reward of the forward threshold policy (act at positions b0 / b1 of
// the two chains) under subsidy lambda, through the closed-form occupancy
// frequencies.
struct ThresholdPolicyEval {
    int b0 = 1, b1 = 1;
    double occupancy_a = 0.0;  // per-state frequency, chain 0 positions 1..b0
    double occupancy_b = 0.0;  // chain 1 positions 1..b1
    double avg_reward = 0.0;   // R_lambda
};
ThresholdPolicyEval eval_threshold_policy(const ArmParams& arm, int b0, int b1, double lambda,
                                          int L);

// Fully observable index (two-state MDP): least subsidy at which the passive
// action is optimal in state s.
double fully_observable_index(const ArmParams& arm, int s, double beta,
                              double tol = 1e-9);

// Index table CSV `arm_id,s,u,horizon,index` (9 decimals).
void write_index_csv(std::ostream& out, const std::vector<IndexTable>& tables);

}  // namespace fair_rmab
