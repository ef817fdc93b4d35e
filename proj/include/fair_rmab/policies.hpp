#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fair_rmab/arm.hpp"
#include "fair_rmab/fairness.hpp"
#include "fair_rmab/rng.hpp"
#include "fair_rmab/whittle.hpp"

namespace fair_rmab {

// Pre-transition state of an activated arm, revealed by the activation.
struct Observation {
    int arm = 0;
    int state = 0;
};

// Per-epoch feedback handed to learning policies. passive_reward[i] is the
// expected immediate reward of arm i (its belief) as computed by the
// environment; it is the reward surrogate for passive arms, whose true state
// stays hidden.
struct StepFeedback {
    std::vector<Observation> revealed;
    std::vector<double> passive_reward;
};

class Policy {
public:
    virtual ~Policy() = default;

    // Action set for epoch t (1-based); |result| == budget except for the
    // no-intervention policy.
    virtual std::vector<int> select(int t) = 0;

    // Called after the environment step with that epoch's feedback.
    virtual void observe(int t, const StepFeedback& feedback) = 0;

    // Initial per-arm observations (the freshly-observed start states).
    virtual void reset(const std::vector<int>& initial_states) = 0;

    // Only the oracle opts into the full-state channel.
    virtual bool wants_true_states() const { return false; }
    virtual void set_true_states(const std::vector<int>&) {}

    virtual std::string name() const = 0;

    // Epochs where the urgent set exceeded the budget (degraded selection).
    long degraded_epochs() const { return degraded_epochs_; }
    // Urgent-set size at the most recent select().
    int last_urgent_count() const { return last_urgent_count_; }

protected:
    long degraded_epochs_ = 0;
    int last_urgent_count_ = 0;
};

enum class IndexHorizon { infinite, finite };

struct PolicyConfig {
    int budget = 1;                       // k
    double beta = 0.95;                   // planning discount
    std::optional<FairnessSpec> fairness; // nullopt = constraint disabled
    IndexHorizon index_horizon = IndexHorizon::infinite;
    int total_horizon = 0;                // T, needed for finite indices
    int index_window = 0;                 // chain cap L (defaults to fairness L or 50)
    double epsilon = 0.1;                 // FaWT-Q exploration
    double gamma = -1.0;                  // FaWT-Q discount; <0 means use beta
    double eps_final = -1.0;              // optional linear anneal target
    std::uint64_t seed = 0;

    int effective_window() const;
};

// Known-transition index policy (plain Whittle when fairness is disabled).
std::unique_ptr<Policy> make_fawt(const std::vector<ArmParams>& arms, const PolicyConfig& cfg,
                                  bool fairness_enabled);
// Thompson-sampling variant with Beta posteriors over the transition entries.
std::unique_ptr<Policy> make_fawt_u(int n_arms, const PolicyConfig& cfg);
// Tabular Q-learning variant.
std::unique_ptr<Policy> make_fawt_q(int n_arms, const PolicyConfig& cfg);
std::unique_ptr<Policy> make_myopic(const std::vector<ArmParams>& arms, const PolicyConfig& cfg,
                                    bool constrained);
std::unique_ptr<Policy> make_oracle(const std::vector<ArmParams>& arms, const PolicyConfig& cfg);
std::unique_ptr<Policy> make_random(int n_arms, const PolicyConfig& cfg);
std::unique_ptr<Policy> make_no_intervention();

// Factory keyed by the CLI policy names: fawt, fawt-u, fawt-q, whittle,
// random, myopic, cmyopic, oracle, none.
std::unique_ptr<Policy> make_policy(const std::string& name, const std::vector<ArmParams>& arms,
                                    const PolicyConfig& cfg);
bool policy_needs_fairness(const std::string& name);

// Verifies that picking the top-k arms by Q(s,1,l)-Q(s,0,l) attains the
// maximum of sum_i Q_i(s_i, a_i, l_i) over all k-subsets (value-level
// equality; exhaustive enumeration, test scale).
struct QPair {
    double q_active = 0.0;
    double q_passive = 0.0;
};
bool topk_equals_argmax_check(const std::vector<QPair>& qs, int k);

// Introspection surfaces for the learning policies (dynamic_cast from
// Policy*), used by tests and diagnostics.
class QTableProbe {
public:
    virtual ~QTableProbe() = default;
    virtual double q_value(int arm, int s, int a, int l) const = 0;
    virtual long visit_count(int arm, int s, int a, int l) const = 0;
    virtual double lambda_value(int arm, int s, int l) const = 0;
};

struct ArmPosterior;
class PosteriorProbe {
public:
    virtual ~PosteriorProbe() = default;
    virtual const ArmPosterior& posterior(int arm) const = 0;
    virtual void set_posterior(int arm, const ArmPosterior& post) = 0;
};

// Beta posteriors over the four to-good transition probabilities of one arm.
struct ArmPosterior {
    // [0]=P^a_{0,1}, [1]=P^a_{1,1}, [2]=P^p_{0,1}, [3]=P^p_{1,1}
    std::array<double, 4> alpha{1.0, 1.0, 1.0, 1.0};
    std::array<double, 4> beta_shape{1.0, 1.0, 1.0, 1.0};

    ArmParams sample(SplitMix64& rng) const;
    ArmParams mean() const;
};

}  // namespace fair_rmab
