#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fair_rmab/rng.hpp"

namespace fair_rmab {

// Two-state arm: state 1 is "good" (reward 1), state 0 is "bad" (reward 0).
// A 2x2 row-stochastic transition matrix is fully described by the two
// probabilities of landing in the good state, so that is what we store.
struct ArmParams {
    // p_active[s]  = P^a_{s,1}, p_passive[s] = P^p_{s,1}
    std::array<double, 2> p_active{};
    std::array<double, 2> p_passive{};

    // Validating factory from the four to-good probabilities.
    // `require_acting_helps` enforces the structural assumption
    // P^a_{s,1} > P^p_{s,1} for both s (generator default).
    static ArmParams make(double pa01, double pa11, double pp01, double pp11,
                          bool require_acting_helps = true);

    // Validating factory from full row-stochastic matrices (rows sum to 1
    // within 1e-12, entries in [0,1]).
    static ArmParams from_matrices(const std::array<std::array<double, 2>, 2>& active,
                                   const std::array<std::array<double, 2>, 2>& passive,
                                   bool require_acting_helps = true);

    bool positively_correlated() const { return p_passive[1] >= p_passive[0]; }
};

// One-step passive propagation of a belief (Bayes update with no observation).
inline double belief_step(double omega, const ArmParams& arm) {
    return omega * arm.p_passive[1] + (1.0 - omega) * arm.p_passive[0];
}

// Belief of an arm last observed in state s, u >= 1 decision epochs ago:
// one active transition followed by u-1 passive ones. Closed form; agrees
// with iterating belief_step to within fp rounding.
double belief_u_step(int s, int u, const ArmParams& arm);

// Fixed point of belief_step. Throws std::domain_error for the absorbing
// degenerate chain (P^p_{1,1} = 1 and P^p_{0,1} = 0).
double stationary_belief(const ArmParams& arm);

enum class ChainClass { increasing, non_increasing, negatively_correlated };

ChainClass classify_chain(const ArmParams& arm, double omega0);

// Belief + the (s,u) sufficient statistic it is derived from. (s,u) is the
// ground truth; omega is a cached value recomputable via belief_u_step.
struct BeliefState {
    int last_obs = 0;     // s
    int steps_since = 1;  // u >= 1; u=1 means activated at the previous step
    double belief = 0.0;

    static BeliefState make(int s, int u, const ArmParams& arm);
};

enum class Correlation { positive, negative, mixed };

struct InstanceSpec {
    int n_arms = 0;
    int budget = 0;    // k
    int horizon = 0;   // T
    double discount = 0.95;
    std::uint64_t seed = 0;
    Correlation correlation = Correlation::positive;
};

void validate(const InstanceSpec& spec);

// Deterministic function of spec.seed. Positively correlated arms draw
//   P^p_{0,1} ~ U(0.05, 0.45), P^p_{1,1} ~ U(P^p_{0,1}+0.05, 0.95),
//   P^a_{s,1} = P^p_{s,1} + U(min(0.05, 0.95-P^p_{s,1}), 0.95-P^p_{s,1}),
// redrawn until P^a_{1,1} >= P^a_{0,1}.
std::vector<ArmParams> generate_instance(const InstanceSpec& spec);

// Flat CSV `arm_id,p_a_01,p_a_11,p_p_01,p_p_11`, 6-decimal fixed point.
void write_arms_csv(std::ostream& out, const std::vector<ArmParams>& arms);
std::vector<ArmParams> read_arms_csv(std::istream& in);

std::string to_string(Correlation c);
Correlation correlation_from_string(const std::string& s);

}  // namespace fair_rmab
