#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fair_rmab/arm.hpp"

namespace fair_rmab {

// Single-arm subsidy MDP over the two belief chains of a partially observed
// arm. State (s,u): last observed state s, u >= 1 epochs since activation,
// belief omega_s(u). Passive moves (s,u) -> (s, min(u+1, chain_len)) and pays
// subsidy + belief; the tail self-loops with its belief held at
// omega_s(chain_len). Active collapses to (1,1) w.p. omega and (0,1) w.p.
// 1-omega and pays belief only.
struct BeliefChainMDP {
    ArmParams arm;
    int chain_len = 1;     // U_max
    double discount = 0.95;
    double subsidy = 0.0;  // lambda

    // omega_s(u) for u in 1..chain_len, index u-1.
    std::array<std::vector<double>, 2> beliefs;

    static BeliefChainMDP make(const ArmParams& arm, int chain_len, double discount,
                               double subsidy);
    double belief(int s, int u) const { return beliefs[s][u - 1]; }
};

struct ChainSolution {
    // value[s][u-1], active[s][u-1] (optimal action, 1 = activate).
    std::array<std::vector<double>, 2> value;
    std::array<std::vector<std::uint8_t>, 2> active;
    double bellman_residual = 0.0;
    int iterations = 0;
};

// Exact T-step backup (V_0 = 0). Ties broken toward passive.
ChainSolution value_iteration_finite(const BeliefChainMDP& mdp, int horizon);

// Infinite-horizon optimal solution. Policy iteration with exact policy
// evaluation (each chain's values are affine in the two head values, so
// evaluation is an O(chain_len) sweep plus a 2x2 solve); the returned
// Bellman residual is checked against tol. Throws std::invalid_argument when
// discount >= 1.
ChainSolution solve_infinite(const BeliefChainMDP& mdp, double tol = 1e-10);

// Q-values at one state under a given continuation value function.
struct StateQ {
    double q_passive = 0.0;
    double q_active = 0.0;
};
StateQ state_q(const BeliefChainMDP& mdp, const ChainSolution& sol, int s, int u);

// Exact discounted value of a fixed subset policy (active[s][u-1] == 1 means
// activate), affine in the subsidy: value = base + subsidy * slope. Used by
// the index sweep in whittle.cpp.
struct AffineValues {
    std::array<std::vector<double>, 2> base;
    std::array<std::vector<double>, 2> slope;
};
AffineValues eval_subset_policy(const BeliefChainMDP& mdp,
                                const std::array<std::vector<std::uint8_t>, 2>& active);

// V_{lambda,T}(omega) for an arbitrary belief: exact finite-horizon optimum
// via dynamic programming over the three reachable belief chains (the query
// chain and the two post-activation chains). Ties toward passive.
struct FiniteBeliefValue {
    double value = 0.0;
    double q_passive = 0.0;
    double q_active = 0.0;
};
FiniteBeliefValue finite_belief_value(const ArmParams& arm, double omega, double lambda,
                                      double beta, int horizon);

// Infinite-horizon V_{lambda,infty}(omega) for an arbitrary query belief:
// solves the chain MDP and then backs the transient query chain out of it.
FiniteBeliefValue infinite_belief_value(const ArmParams& arm, double omega, double lambda,
                                        double beta, int chain_len, double tol = 1e-10);

}  // namespace fair_rmab
