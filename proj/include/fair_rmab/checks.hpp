#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fair_rmab/arm.hpp"

namespace fair_rmab {

// Indexability probe: sweeps an ascending subsidy grid and verifies that
// every state's optimal-action map is a step function flipping at most once,
// from active to passive.
struct IndexabilityReport {
    bool pass = true;
    int states_checked = 0;
    // First violation, if any.
    int bad_s = -1, bad_u = -1;
    double bad_lambda = 0.0;
};
IndexabilityReport check_indexability(const ArmParams& arm, const std::vector<double>& lambda_grid,
                                      double beta, int chain_len);

// Sufficient optimality conditions for end-of-window activation. Evaluated
// exactly as stated: geometric sums in closed form for the infinite horizon,
// partial sums for a finite residual horizon T.
struct TheoremConditionReport {
    bool cond_increasing = false;      // applies when omega <= omega*
    bool cond_nonincreasing = false;   // applies when omega >= omega*
    double delta1 = 0.0, delta2 = 0.0, delta3 = 0.0, delta4 = 0.0;
    double lhs_increasing = 0.0, rhs_increasing = 0.0;
    double lhs_nonincreasing = 0.0, rhs_nonincreasing = 0.0;
};
TheoremConditionReport check_theorem_conditions(const ArmParams& arm, double beta,
                                                std::optional<int> finite_T);

// Validates the value-difference sandwich
//   (w1-w2) sum_{t<T} beta^t (Pa11-Pa01)^t <= V_T(w1)-V_T(w2)
//                                          <= (w1-w2) sum_{t<T} beta^t
// on random belief pairs; the infinite-horizon variant checks the geometric
// limits of both bounds.
struct ValueBoundReport {
    int pairs_checked = 0;
    int violations = 0;        // beyond tolerance
    double max_violation = 0.0;
};
ValueBoundReport check_value_bounds(const ArmParams& arm, double beta, int T, int n_pairs,
                                    std::uint64_t seed, double tolerance = 1e-8);
ValueBoundReport check_value_bounds_infinite(const ArmParams& arm, double beta, int n_pairs,
                                             std::uint64_t seed, int chain_len = 80,
                                             double tolerance = 1e-8);

// Numeric evaluation of the two-arm swap condition: the value change of
// moving the deadline activation one slot earlier for arm A plus the induced
// change for the displaced arm B, with V_{lambda,inf} at beliefs 1 and 0
// supplied by the converged chain solver.
struct GeneralConditionResult {
    double change_a = 0.0;
    double change_b = 0.0;
    double sum = 0.0;
    bool holds = false;  // sum >= 0
};
GeneralConditionResult check_general_condition(const ArmParams& arm_a, const ArmParams& arm_b,
                                               double omega_i, double omega_j, double lambda_i,
                                               double lambda_j, double beta, int chain_len = 80);

}  // namespace fair_rmab
