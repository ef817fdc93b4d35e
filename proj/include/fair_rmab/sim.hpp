#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fair_rmab/arm.hpp"
#include "fair_rmab/fairness.hpp"
#include "fair_rmab/policies.hpp"

namespace fair_rmab {

struct WorldState {
    std::vector<int> states;  // true per-arm states
    int epoch = 0;
    SplitMix64 rng;

    WorldState(int n_arms, std::uint64_t seed) : states(n_arms, 0), rng(seed) {}
};

struct StepResult {
    std::vector<Observation> observations;  // revealed states of activated arms
    double reward = 0.0;                    // sum of pre-transition good states
};

// One environment step: reward and observations come from the pre-transition
// states (the states the decision is made against), then every arm
// transitions by its action's matrix. One rng draw per arm in arm order, so
// trajectories are reproducible independent of policy internals.
StepResult step(WorldState& world, const std::vector<int>& action_set,
                const std::vector<ArmParams>& arms);

struct RunMetrics {
    std::string policy;
    std::uint64_t seed = 0;
    int n_arms = 0;
    int horizon = 0;
    double avg_reward = 0.0;              // per arm per step, penalties included
    double avg_reward_unpenalized = 0.0;
    double discounted_return = 0.0;       // sum_t beta^{t-1} (reward_t + penalty_t)
    double penalty_total = 0.0;
    long violation_count = 0;             // violated enforced windows
    long degraded_epochs = 0;
    std::vector<long> activation_counts;  // per arm
    std::vector<double> reward_series;    // raw reward per epoch
    std::vector<double> penalty_series;   // penalty charged at each epoch
    std::vector<int> urgent_series;       // urgent-set size per epoch
    std::vector<int> violations_closed_series;  // enforced windows closing violated at t
};

struct RunConfig {
    int horizon = 1000;
    double penalty_per_violation = -0.01;
    bool audit_enabled = true;  // fairness audit + penalties
    double discount = 0.95;     // for the reported discounted return
};

// Simulates one seeded trajectory of `policy` on `arms`, audits the action
// log against `spec`, and charges one penalty per violated enforced window
// at that window's closing epoch.
RunMetrics run_simulation(const std::vector<ArmParams>& arms, Policy& policy,
                          const FairnessSpec& spec, const RunConfig& cfg, std::uint64_t seed);

// (method - none) / (oracle - none) * 100. Throws std::domain_error when the
// denominator is not positive.
double benefit_ratio(double method_avg, double none_avg, double oracle_avg);

struct Aggregate {
    std::string policy;
    int runs = 0;
    double mean_avg_reward = 0.0;
    double stderr_avg_reward = 0.0;
    double mean_unpenalized = 0.0;
    double mean_discounted = 0.0;
    double mean_violations = 0.0;
    long total_violations = 0;
    long total_degraded_epochs = 0;
    // Histogram of per-arm activation totals pooled over runs:
    // {0, 1-10, 11-50, 51-100, >100}.
    std::array<long, 5> activation_histogram{};
    std::vector<RunMetrics> per_run;
};

struct ExperimentSpec {
    InstanceSpec instance;       // instance.seed drives arm generation
    std::string policy_name;
    PolicyConfig policy;         // budget/beta/fairness/epsilon/gamma/seed base
    FairnessSpec fairness;       // audit spec (also used by constrained policies)
    RunConfig run;
    int runs = 50;
    std::uint64_t seed = 0;      // master seed; run i derives from it
    int jobs = 1;
};

// Independent seeded replications (parallel when jobs > 1; results identical
// to serial execution). Fresh arms are drawn per run from the instance seed
// and the run index.
Aggregate run_experiment(const ExperimentSpec& spec);

std::array<long, 5> activation_histogram(const std::vector<long>& counts);

}  // namespace fair_rmab
