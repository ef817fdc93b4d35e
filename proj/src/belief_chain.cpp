#include "fair_rmab/belief_chain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fair_rmab {

BeliefChainMDP BeliefChainMDP::make(const ArmParams& arm, int chain_len, double discount,
                                    double subsidy) {
    if (chain_len < 1) throw std::invalid_argument("belief chain: chain_len must be >= 1");
    if (!(discount > 0.0 && discount <= 1.0)) {
        throw std::invalid_argument("belief chain: discount must be in (0,1]");
    }
    BeliefChainMDP mdp;
    mdp.arm = arm;
    mdp.chain_len = chain_len;
    mdp.discount = discount;
    mdp.subsidy = subsidy;
    for (int s = 0; s < 2; ++s) {
        mdp.beliefs[s].resize(chain_len);
        mdp.beliefs[s][0] = arm.p_active[s];
        for (int u = 2; u <= chain_len; ++u) {
            mdp.beliefs[s][u - 1] = belief_step(mdp.beliefs[s][u - 2], arm);
        }
    }
    return mdp;
}

ChainSolution value_iteration_finite(const BeliefChainMDP& mdp, int horizon) {
    if (horizon < 0) throw std::invalid_argument("value_iteration_finite: horizon must be >= 0");
    const int U = mdp.chain_len;
    const double beta = mdp.discount;
    const double lambda = mdp.subsidy;
    ChainSolution sol;
    for (int s = 0; s < 2; ++s) {
        sol.value[s].assign(U, 0.0);
        sol.active[s].assign(U, 0);
    }
    std::array<std::vector<double>, 2> prev = sol.value;
    for (int step = 0; step < horizon; ++step) {
        for (int s = 0; s < 2; ++s) {
            for (int u = 1; u <= U; ++u) {
                const double om = mdp.belief(s, u);
                const int nxt = std::min(u + 1, U);
                const double qp = lambda + om + beta * prev[s][nxt - 1];
                const double qa = om + beta * (om * prev[1][0] + (1.0 - om) * prev[0][0]);
                sol.active[s][u - 1] = qa > qp ? 1 : 0;
                sol.value[s][u - 1] = std::max(qp, qa);
            }
        }
        prev = sol.value;
    }
    sol.iterations = horizon;
    return sol;
}

namespace {

// Values of a fixed subset policy at one subsidy. Each chain's values are
// affine in the head values X = V(1,1), Y = V(0,1); sweep tail-to-head and
// close with a 2x2 solve.
std::array<std::vector<double>, 2> evaluate_policy(
    const BeliefChainMDP& mdp, const std::array<std::vector<std::uint8_t>, 2>& active,
    double lambda) {
    const int U = mdp.chain_len;
    const double beta = mdp.discount;
    // c0 + cx*X + cy*Y per state
    std::array<std::vector<double>, 2> c0, cx, cy;
    for (int s = 0; s < 2; ++s) {
        c0[s].assign(U, 0.0);
        cx[s].assign(U, 0.0);
        cy[s].assign(U, 0.0);
        for (int u = U; u >= 1; --u) {
            const double om = mdp.belief(s, u);
            if (active[s][u - 1]) {
                c0[s][u - 1] = om;
                cx[s][u - 1] = beta * om;
                cy[s][u - 1] = beta * (1.0 - om);
            } else if (u == U) {
                c0[s][u - 1] = (lambda + om) / (1.0 - beta);
            } else {
                c0[s][u - 1] = lambda + om + beta * c0[s][u];
                cx[s][u - 1] = beta * cx[s][u];
                cy[s][u - 1] = beta * cy[s][u];
            }
        }
    }
    const double det = (1.0 - cx[1][0]) * (1.0 - cy[0][0]) - cy[1][0] * cx[0][0];
    const double X = (c0[1][0] * (1.0 - cy[0][0]) + cy[1][0] * c0[0][0]) / det;
    const double Y = ((1.0 - cx[1][0]) * c0[0][0] + cx[0][0] * c0[1][0]) / det;
    std::array<std::vector<double>, 2> value;
    for (int s = 0; s < 2; ++s) {
        value[s].resize(U);
        for (int u = 0; u < U; ++u) value[s][u] = c0[s][u] + cx[s][u] * X + cy[s][u] * Y;
    }
    return value;
}

}  // namespace

AffineValues eval_subset_policy(const BeliefChainMDP& mdp,
                                const std::array<std::vector<std::uint8_t>, 2>& active) {
    AffineValues av;
    av.base = evaluate_policy(mdp, active, 0.0);
    av.slope = evaluate_policy(mdp, active, 1.0);
    for (int s = 0; s < 2; ++s) {
        for (std::size_t i = 0; i < av.slope[s].size(); ++i) av.slope[s][i] -= av.base[s][i];
    }
    return av;
}

ChainSolution solve_infinite(const BeliefChainMDP& mdp, double tol) {
    if (mdp.discount >= 1.0) {
        throw std::invalid_argument("solve_infinite: discount must be < 1");
    }
    const int U = mdp.chain_len;
    const double beta = mdp.discount;
    const double lambda = mdp.subsidy;
    ChainSolution sol;
    for (int s = 0; s < 2; ++s) sol.active[s].assign(U, 0);

    const int max_rounds = 4 * U + 16;
    int round = 0;
    for (; round < max_rounds; ++round) {
        sol.value = evaluate_policy(mdp, sol.active, lambda);
        // Flip an action only on a clear improvement; near-indifferent
        // states otherwise oscillate forever in floating point.
        double scale = 1.0;
        for (int s = 0; s < 2; ++s) {
            for (int u = 1; u <= U; ++u) {
                scale = std::max(scale, std::abs(sol.value[s][u - 1]));
            }
        }
        const double margin = 1e-12 * scale;
        bool changed = false;
        for (int s = 0; s < 2; ++s) {
            for (int u = 1; u <= U; ++u) {
                const double om = mdp.belief(s, u);
                const int nxt = std::min(u + 1, U);
                const double qp = lambda + om + beta * sol.value[s][nxt - 1];
                const double qa =
                    om + beta * (om * sol.value[1][0] + (1.0 - om) * sol.value[0][0]);
                const std::uint8_t cur = sol.active[s][u - 1];
                const std::uint8_t best = cur == 1 ? (qa >= qp - margin ? 1 : 0)
                                                   : (qa > qp + margin ? 1 : 0);
                if (best != cur) {
                    sol.active[s][u - 1] = best;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    sol.iterations = round + 1;

    double residual = 0.0;
    double scale = 1.0;
    for (int s = 0; s < 2; ++s) {
        for (int u = 1; u <= U; ++u) {
            const double om = mdp.belief(s, u);
            const int nxt = std::min(u + 1, U);
            const double qp = lambda + om + beta * sol.value[s][nxt - 1];
            const double qa = om + beta * (om * sol.value[1][0] + (1.0 - om) * sol.value[0][0]);
            // Reported action: exact ties go passive.
            sol.active[s][u - 1] = qa > qp ? 1 : 0;
            residual = std::max(residual, std::abs(std::max(qp, qa) - sol.value[s][u - 1]));
            scale = std::max(scale, std::abs(sol.value[s][u - 1]));
        }
    }
    sol.bellman_residual = residual;
    if (residual > tol * scale) {
        throw std::runtime_error("solve_infinite: Bellman residual above tolerance");
    }
    return sol;
}

StateQ state_q(const BeliefChainMDP& mdp, const ChainSolution& sol, int s, int u) {
    const double om = mdp.belief(s, u);
    const int nxt = std::min(u + 1, mdp.chain_len);
    StateQ q;
    q.q_passive = mdp.subsidy + om + mdp.discount * sol.value[s][nxt - 1];
    q.q_active =
        om + mdp.discount * (om * sol.value[1][0] + (1.0 - om) * sol.value[0][0]);
    return q;
}

FiniteBeliefValue finite_belief_value(const ArmParams& arm, double omega, double lambda,
                                      double beta, int horizon) {
    if (horizon < 0) throw std::invalid_argument("finite_belief_value: horizon must be >= 0");
    const int T = horizon;
    // Reachable beliefs: tau^j of the query belief and of the two
    // post-activation heads.
    const std::array<double, 3> starts = {omega, arm.p_active[1], arm.p_active[0]};
    std::array<std::vector<double>, 3> bel;
    for (int o = 0; o < 3; ++o) {
        bel[o].resize(T + 1);
        bel[o][0] = starts[o];
        for (int j = 1; j <= T; ++j) bel[o][j] = belief_step(bel[o][j - 1], arm);
    }
    // prev[o][j] = optimal value with h remaining steps from belief bel[o][j].
    std::array<std::vector<double>, 3> prev, cur;
    for (int o = 0; o < 3; ++o) {
        prev[o].assign(T + 1, 0.0);
        cur[o].assign(T + 1, 0.0);
    }
    FiniteBeliefValue out;
    for (int h = 1; h <= T; ++h) {
        for (int o = 0; o < 3; ++o) {
            for (int j = 0; j + h <= T; ++j) {
                const double b = bel[o][j];
                const double qp = lambda + b + beta * prev[o][j + 1];
                const double qa = b + beta * (b * prev[1][0] + (1.0 - b) * prev[2][0]);
                cur[o][j] = std::max(qp, qa);
                if (h == T && o == 0 && j == 0) {
                    out.q_passive = qp;
                    out.q_active = qa;
                }
            }
        }
        std::swap(prev, cur);
    }
    out.value = T == 0 ? 0.0 : prev[0][0];
    if (T == 0) {
        out.q_passive = 0.0;
        out.q_active = 0.0;
    }
    return out;
}

FiniteBeliefValue infinite_belief_value(const ArmParams& arm, double omega, double lambda,
                                        double beta, int chain_len, double tol) {
    BeliefChainMDP mdp = BeliefChainMDP::make(arm, chain_len, beta, lambda);
    const ChainSolution sol = solve_infinite(mdp, tol);
    const double X = sol.value[1][0];
    const double Y = sol.value[0][0];
    // Transient query chain tau^j(omega), j = 0..chain_len-1, frozen tail.
    std::vector<double> bel(chain_len);
    bel[0] = omega;
    for (int j = 1; j < chain_len; ++j) bel[j] = belief_step(bel[j - 1], arm);
    std::vector<double> v(chain_len, 0.0);
    for (int j = chain_len - 1; j >= 0; --j) {
        const double b = bel[j];
        const double qa = b + beta * (b * X + (1.0 - b) * Y);
        const double qp = j + 1 < chain_len ? lambda + b + beta * v[j + 1]
                                            : (lambda + b) / (1.0 - beta);
        v[j] = std::max(qp, qa);
    }
    FiniteBeliefValue out;
    const double b0 = bel[0];
    out.q_active = b0 + beta * (b0 * X + (1.0 - b0) * Y);
    out.q_passive = chain_len > 1 ? lambda + b0 + beta * v[1] : (lambda + b0) / (1.0 - beta);
    out.value = std::max(out.q_passive, out.q_active);
    return out;
}

}  // namespace fair_rmab
