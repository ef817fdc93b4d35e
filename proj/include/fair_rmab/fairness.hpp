#pragma once

#include <string>
#include <vector>

namespace fair_rmab {

// (eta, L) sliding-window constraint: every unit (arm, or group of arms)
// must be activated at least eta times in every window of L consecutive
// decision epochs. Empty group_of means per-arm scope.
struct FairnessSpec {
    int eta = 1;
    int window = 1;             // L
    std::vector<int> group_of;  // arm -> group id; empty = per-arm

    int units(int n_arms) const;
    int unit_of(int arm) const;
    void validate(int n_arms) const;
};

struct Feasibility {
    bool ok = false;           // hard bound k*L > N*(eta-1)
    bool schedulable = false;  // steady-state bound ceil(N*eta/L) <= k
    double strength_ratio = 0.0;  // k*L / ((eta-1)*N), inf when eta == 1
    std::string detail;
};

// Checks the paper's feasibility bound (hard) and the steady-staggering
// schedulability bound (advisory: when it fails the urgent set can exceed
// the budget and violations become unavoidable, as with L=15 in the Fig. 5
// sweep). Throwing on hard failure is left to callers.
Feasibility check_feasibility(const FairnessSpec& spec, int k, int n_arms);

// Per-unit activation bookkeeping with deadline detection.
//
// A unit is urgent at decision epoch t when some full-length window ending
// at e in [max(t, L), t+L-1] cannot be satisfied unless the unit is
// activated now: deficit(e) = eta - activations in [e-L+1, t-1] must not
// exceed the remaining slots e - t + 1.
class FairnessTracker {
public:
    FairnessTracker(FairnessSpec spec, int n_arms);

    // Urgent units for decision epoch now()+1.
    std::vector<int> urgent_units() const;

    // Records the epoch-t action set. t must equal now()+1.
    void record(int t, const std::vector<int>& activated_arms);

    // Activations of `unit` among the last L-1 recorded epochs.
    int window_count(int unit) const;
    int deficit(int unit) const;  // max(0, eta - window_count)

    int now() const { return now_; }
    const FairnessSpec& spec() const { return spec_; }

private:
    FairnessSpec spec_;
    int n_arms_;
    int now_ = 0;
    // Per unit, ascending activation timestamps within (now-L, now].
    std::vector<std::vector<int>> recent_;
};

struct WindowViolation {
    int unit = 0;
    int window_start = 0;
};

// Exhaustive post-hoc check of a full T-epoch action log. Enforced windows
// are [u, u+L-1] with u >= L; earlier windows overlap the warm-up prefix and
// are exempt. action_log[t-1] holds the arms activated at epoch t.
std::vector<WindowViolation> audit(const std::vector<std::vector<int>>& action_log,
                                   const FairnessSpec& spec, int n_arms);

}  // namespace fair_rmab
