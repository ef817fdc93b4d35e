#include "fair_rmab/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fair_rmab {

int FairnessSpec::units(int n_arms) const {
    if (group_of.empty()) return n_arms;
    return 1 + *std::max_element(group_of.begin(), group_of.end());
}

int FairnessSpec::unit_of(int arm) const {
    return group_of.empty() ? arm : group_of[static_cast<std::size_t>(arm)];
}

void FairnessSpec::validate(int n_arms) const {
    if (eta < 1) throw std::invalid_argument("fairness: eta must be >= 1");
    if (window < 1) throw std::invalid_argument("fairness: L must be >= 1");
    if (eta > window) throw std::invalid_argument("fairness: eta must be <= L");
    if (!group_of.empty()) {
        if (static_cast<int>(group_of.size()) != n_arms) {
            throw std::invalid_argument("fairness: group map must cover every arm");
        }
        for (int g : group_of) {
            if (g < 0) throw std::invalid_argument("fairness: negative group id");
        }
    }
}

Feasibility check_feasibility(const FairnessSpec& spec, int k, int n_arms) {
    spec.validate(n_arms);
    const int n_units = spec.units(n_arms);
    Feasibility f;
    const long lhs = static_cast<long>(k) * spec.window;
    const long rhs = static_cast<long>(n_units) * (spec.eta - 1);
    f.ok = lhs > rhs;
    const long demand = static_cast<long>(n_units) * spec.eta;
    f.schedulable = (demand + spec.window - 1) / spec.window <= k;
    f.strength_ratio = spec.eta == 1 ? std::numeric_limits<double>::infinity()
                                     : static_cast<double>(lhs) / static_cast<double>(rhs);
    std::ostringstream os;
    if (!f.ok) {
        os << "infeasible: k*L = " << lhs << " must exceed N*(eta-1) = " << rhs;
    } else if (!f.schedulable) {
        os << "tight: ceil(N*eta/L) = " << (demand + spec.window - 1) / spec.window
           << " exceeds k = " << k << "; urgent sets can exceed the budget";
    } else {
        os << "ok";
    }
    f.detail = os.str();
    return f;
}

FairnessTracker::FairnessTracker(FairnessSpec spec, int n_arms)
    : spec_(std::move(spec)), n_arms_(n_arms) {
    spec_.validate(n_arms);
    recent_.resize(static_cast<std::size_t>(spec_.units(n_arms)));
}

std::vector<int> FairnessTracker::urgent_units() const {
    const int t = now_ + 1;
    const int L = spec_.window;
    std::vector<int> urgent;
    for (std::size_t unit = 0; unit < recent_.size(); ++unit) {
        const std::vector<int>& ts = recent_[unit];
        // Window ends e = max(t, L) .. t+L-1; count activations in
        // [e-L+1, t-1] with a two-pointer sweep over the sorted timestamps.
        const int e_lo = std::max(t, L);
        std::size_t lo_idx = 0;
        bool is_urgent = false;
        for (int e = e_lo; e < t + L; ++e) {
            const int win_lo = e - L + 1;
            while (lo_idx < ts.size() && ts[lo_idx] < win_lo) ++lo_idx;
            // Timestamps are all <= now_ = t-1, so the tail from lo_idx
            // counts [win_lo, t-1] exactly.
            const int cnt = static_cast<int>(ts.size() - lo_idx);
            const int need = spec_.eta - cnt;
            const int slack = e - t + 1;
            if (need >= slack) {
                is_urgent = true;
                break;
            }
            if (need <= 0) break;  // later windows only get more slack
        }
        if (is_urgent) urgent.push_back(static_cast<int>(unit));
    }
    return urgent;
}

void FairnessTracker::record(int t, const std::vector<int>& activated_arms) {
    if (t == now_) throw std::invalid_argument("fairness tracker: epoch already recorded");
    if (t != now_ + 1) throw std::invalid_argument("fairness tracker: epochs must be recorded in order");
    // Validate before mutating so a rejected record leaves the tracker intact.
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n_arms_), 0);
    for (int arm : activated_arms) {
        if (arm < 0 || arm >= n_arms_) throw std::out_of_range("fairness tracker: bad arm id");
        if (seen[static_cast<std::size_t>(arm)]) {
            throw std::invalid_argument("fairness tracker: duplicate arm in action set");
        }
        seen[static_cast<std::size_t>(arm)] = 1;
    }
    now_ = t;
    for (int arm : activated_arms) {
        // Group activations accumulate per member: the constraint sums
        // activations over all arms of the unit.
        recent_[static_cast<std::size_t>(spec_.unit_of(arm))].push_back(t);
    }
    const int keep_from = t - spec_.window + 1;
    for (std::vector<int>& ts : recent_) {
        ts.erase(ts.begin(),
                 std::find_if(ts.begin(), ts.end(), [&](int x) { return x >= keep_from; }));
    }
}

int FairnessTracker::window_count(int unit) const {
    return static_cast<int>(recent_[static_cast<std::size_t>(unit)].size());
}

int FairnessTracker::deficit(int unit) const {
    return std::max(0, spec_.eta - window_count(unit));
}

std::vector<WindowViolation> audit(const std::vector<std::vector<int>>& action_log,
                                   const FairnessSpec& spec, int n_arms) {
    spec.validate(n_arms);
    const int T = static_cast<int>(action_log.size());
    const int L = spec.window;
    const int n_units = spec.units(n_arms);
    std::vector<WindowViolation> violations;
    if (T < 2 * L - 1) return violations;  // no enforced window closes in the log

    // counts[u][t] = 1 if unit u was activated at epoch t+1.
    std::vector<std::vector<int>> prefix(static_cast<std::size_t>(n_units),
                                         std::vector<int>(static_cast<std::size_t>(T) + 1, 0));
    for (int t = 1; t <= T; ++t) {
        for (int arm : action_log[static_cast<std::size_t>(t - 1)]) {
            prefix[static_cast<std::size_t>(spec.unit_of(arm))][static_cast<std::size_t>(t)] += 1;
        }
    }
    for (auto& row : prefix) {
        for (std::size_t t = 1; t < row.size(); ++t) row[t] += row[t - 1];
    }
    for (int unit = 0; unit < n_units; ++unit) {
        const auto& cs = prefix[static_cast<std::size_t>(unit)];
        for (int u = L; u + L - 1 <= T; ++u) {
            const int cnt = cs[static_cast<std::size_t>(u + L - 1)] -
                            cs[static_cast<std::size_t>(u - 1)];
            if (cnt < spec.eta) violations.push_back({unit, u});
        }
    }
    return violations;
}

}  // namespace fair_rmab
