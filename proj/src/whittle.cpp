#include "fair_rmab/whittle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fair_rmab {

double IndexTable::at(int s, int u) const {
    const int uc = std::clamp(u, 1, window);
    return values[s][uc - 1];
}

namespace {

// Generic bisection on a monotone-decreasing indifference gap
// D(lambda) = Q_active - Q_passive.
BisectionResult bisect_gap(const std::function<double(double)>& gap, double lo, double hi,
                           double tol, int max_iter) {
    BisectionResult res;
    res.lo = lo;
    res.hi = hi;
    if (gap(lo) < 0.0 || gap(hi) > 0.0) {
        res.bracketed = false;
        res.lambda = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    int it = 0;
    while (hi - lo > tol && it < max_iter) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        ++it;
    }
    res.lambda = 0.5 * (lo + hi);
    res.iterations = it;
    return res;
}

}  // namespace

BisectionResult whittle_binary_search(const ArmParams& arm, int s, int u, double beta,
                                      int chain_len, double tol, int max_iter) {
    const double span = 1.0 / (1.0 - beta);
    auto gap = [&](double lambda) {
        BeliefChainMDP mdp = BeliefChainMDP::make(arm, chain_len, beta, lambda);
        const ChainSolution sol = solve_infinite(mdp);
        const StateQ q = state_q(mdp, sol, s, u);
        return q.q_active - q.q_passive;
    };
    return bisect_gap(gap, -span, span, tol, max_iter);
}

BisectionResult exact_finite_whittle(const ArmParams& arm, int s, int u, double beta, int T,
                                     double tol, int max_iter) {
    if (T < 0) throw std::invalid_argument("exact_finite_whittle: T must be >= 0");
    const double omega = belief_u_step(s, u, arm);
    if (T == 0) {
        // Last decision epoch: the gap is exactly -lambda.
        BisectionResult res;
        res.lambda = 0.0;
        res.lo = res.hi = 0.0;
        return res;
    }
    auto gap = [&](double lambda) {
        const FiniteBeliefValue v = finite_belief_value(arm, omega, lambda, beta, T + 1);
        return v.q_active - v.q_passive;
    };
    const double span = static_cast<double>(T) + 1.0;
    return bisect_gap(gap, -span, span, tol, max_iter);
}

double w1_index(const ArmParams& arm, double omega, double beta) {
    return beta * (omega * (arm.p_active[1] - arm.p_passive[1]) +
                   (1.0 - omega) * (arm.p_active[0] - arm.p_passive[0]));
}

namespace {

// One adaptive sweep step: the subsidy at which the frontier state (s,u) is
// indifferent between the current policy (it acts) and the same policy with
// it passive. Values of both policies are affine in lambda.
struct PeelCandidate {
    double lambda = 0.0;
    bool degenerate = false;
};

PeelCandidate peel_candidate(const BeliefChainMDP& mdp,
                             std::array<std::vector<std::uint8_t>, 2>& active, int s, int u,
                             const AffineValues& with) {
    active[s][u - 1] = 0;
    const AffineValues without = eval_subset_policy(mdp, active);
    active[s][u - 1] = 1;
    const double base_a = with.base[s][u - 1];
    const double slope_a = with.slope[s][u - 1];
    const double base_p = without.base[s][u - 1];
    const double slope_p = without.slope[s][u - 1];
    const double den = slope_a - slope_p;
    PeelCandidate c;
    if (std::abs(den) < 1e-13) {
        c.degenerate = true;
        return c;
    }
    c.lambda = (base_p - base_a) / den;
    return c;
}

}  // namespace

FastWhittleResult fast_whittle_infinite(const ArmParams& arm, int L, double beta) {
    if (L < 1) throw std::invalid_argument("fast_whittle_infinite: L must be >= 1");
    FastWhittleResult out;
    out.table.horizon = IndexTable::Horizon::infinite;
    out.table.window = L;
    out.table.values[0].assign(L, 0.0);
    out.table.values[1].assign(L, 0.0);

    if (!arm.positively_correlated()) {
        out.fallback = true;
        for (int s = 0; s < 2; ++s) {
            for (int u = 1; u <= L; ++u) {
                const BisectionResult r = whittle_binary_search(arm, s, u, beta, L);
                out.table.values[s][u - 1] = r.bracketed ? r.lambda : 0.0;
            }
        }
        return out;
    }

    BeliefChainMDP mdp = BeliefChainMDP::make(arm, L, beta, 0.0);
    std::array<std::vector<std::uint8_t>, 2> active;
    active[0].assign(L, 1);
    active[1].assign(L, 1);
    std::vector<std::pair<int, int>> remaining;
    remaining.reserve(2 * L);
    for (int s = 0; s < 2; ++s) {
        for (int u = 1; u <= L; ++u) remaining.emplace_back(s, u);
    }
    double last_lambda = -1.0 / (1.0 - beta);
    while (!remaining.empty()) {
        const AffineValues with = eval_subset_policy(mdp, active);
        std::size_t best = remaining.size();
        double best_lambda = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            const auto [s, u] = remaining[i];
            const PeelCandidate c = peel_candidate(mdp, active, s, u, with);
            if (c.degenerate) continue;
            if (c.lambda < best_lambda) {
                best_lambda = c.lambda;
                best = i;
            }
        }
        if (best == remaining.size()) {
            // Everything left is value-neutral; give it the running level.
            for (const auto& [s, u] : remaining) out.table.values[s][u - 1] = last_lambda;
            break;
        }
        const auto [s, u] = remaining[best];
        out.table.values[s][u - 1] = best_lambda;
        last_lambda = best_lambda;
        active[s][u - 1] = 0;
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return out;
}

double infinite_state_index(const ArmParams& arm, int s, int u, int chain_len, double beta,
                            double tol) {
    const BisectionResult r = whittle_binary_search(arm, s, u, beta, chain_len, tol);
    return r.bracketed ? r.lambda : 0.0;
}

FiniteWhittleValue finite_whittle(const ArmParams& arm, double omega, double beta, double T,
                                  double tw) {
    FiniteWhittleValue out;
    const double w1 = w1_index(arm, omega, beta);
    if (tw <= 0.0 || w1 <= 0.0) {
        out.value = 0.0;
        out.fit = FiniteWhittleValue::Fit::degenerate;
        return out;
    }
    if (tw <= w1) {
        // The logistic rate would need log of a non-positive number here.
        out.value = std::min(w1 * T, tw);
        out.fit = FiniteWhittleValue::Fit::linear_capped;
        return out;
    }
    const double k = -std::log(2.0 * tw / (w1 + tw) - 1.0);
    out.value = 2.0 * tw / (1.0 + std::exp(-k * T)) - tw;
    out.fit = FiniteWhittleValue::Fit::logistic;
    return out;
}

IndexTable finite_whittle_table(const ArmParams& arm, double beta, int residual_T,
                                const IndexTable& infinite) {
    if (residual_T < 0) throw std::invalid_argument("finite_whittle_table: T must be >= 0");
    IndexTable t;
    t.horizon = IndexTable::Horizon::finite;
    t.finite_T = residual_T;
    t.window = infinite.window;
    for (int s = 0; s < 2; ++s) {
        t.values[s].resize(static_cast<std::size_t>(t.window));
        for (int u = 1; u <= t.window; ++u) {
            const double omega = belief_u_step(s, u, arm);
            t.values[s][u - 1] =
                finite_whittle(arm, omega, beta, residual_T, infinite.at(s, u)).value;
        }
    }
    return t;
}

ThresholdPolicyEval eval_threshold_policy(const ArmParams& arm, int b0, int b1, double lambda,
                                          int L) {
    if (b0 < 1 || b1 < 1 || b0 > L + 1 || b1 > L + 1) {
        throw std::invalid_argument("eval_threshold_policy: thresholds must lie in 1..L+1");
    }
    ThresholdPolicyEval ev;
    ev.b0 = b0;
    ev.b1 = b1;
    double sum0 = 0.0, sum1 = 0.0;
    double w0 = 0.0, w1v = 0.0;
    {
        double w = arm.p_active[0];
        for (int u = 1; u <= b0; ++u) {
            sum0 += w;
            if (u == b0) w0 = w;
            w = belief_step(w, arm);
        }
        w = arm.p_active[1];
        for (int u = 1; u <= b1; ++u) {
            sum1 += w;
            if (u == b1) w1v = w;
            w = belief_step(w, arm);
        }
    }
    const double c = w0 / (1.0 - w1v);
    ev.occupancy_a = 1.0 / (b0 + b1 * c);
    ev.occupancy_b = ev.occupancy_a * c;
    ev.avg_reward = ev.occupancy_a * sum0 + ev.occupancy_b * sum1 +
                    lambda * (1.0 - ev.occupancy_a - ev.occupancy_b);
    return ev;
}

double fully_observable_index(const ArmParams& arm, int s, double beta, double tol) {
    auto gap = [&](double lambda) {
        // Two-state subsidy MDP; value iteration is cheap at this size.
        double v0 = 0.0, v1 = 0.0;
        for (int it = 0; it < 200000; ++it) {
            const double n0 = std::max(lambda + beta * (arm.p_passive[0] * v1 +
                                                        (1.0 - arm.p_passive[0]) * v0),
                                       beta * (arm.p_active[0] * v1 +
                                               (1.0 - arm.p_active[0]) * v0));
            const double n1 = std::max(lambda + 1.0 + beta * (arm.p_passive[1] * v1 +
                                                              (1.0 - arm.p_passive[1]) * v0),
                                       1.0 + beta * (arm.p_active[1] * v1 +
                                                     (1.0 - arm.p_active[1]) * v0));
            const double delta = std::abs(n0 - v0) + std::abs(n1 - v1);
            v0 = n0;
            v1 = n1;
            if (delta < 1e-13) break;
        }
        const double r = s == 1 ? 1.0 : 0.0;
        const double pp = arm.p_passive[s];
        const double pa = arm.p_active[s];
        const double qp = lambda + r + beta * (pp * v1 + (1.0 - pp) * v0);
        const double qa = r + beta * (pa * v1 + (1.0 - pa) * v0);
        return qa - qp;
    };
    const double span = 1.0 / (1.0 - beta);
    const BisectionResult r = bisect_gap(gap, -span, span, tol, 200);
    return r.bracketed ? r.lambda : 0.0;
}

void write_index_csv(std::ostream& out, const std::vector<IndexTable>& tables) {
    out << "arm_id,s,u,horizon,index\n";
    out << std::fixed << std::setprecision(9);
    for (std::size_t i = 0; i < tables.size(); ++i) {
        const IndexTable& t = tables[i];
        const char* hz = t.horizon == IndexTable::Horizon::infinite ? "infinite" : "finite";
        for (int s = 0; s < 2; ++s) {
            for (int u = 1; u <= t.window; ++u) {
                out << i << ',' << s << ',' << u << ',' << hz << ',' << t.values[s][u - 1]
                    << '\n';
            }
        }
    }
}

}  // namespace fair_rmab
