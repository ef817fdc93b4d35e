#include "fair_rmab/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace fair_rmab {

StepResult step(WorldState& world, const std::vector<int>& action_set,
                const std::vector<ArmParams>& arms) {
    const int n = static_cast<int>(arms.size());
    std::vector<std::uint8_t> active(static_cast<std::size_t>(n), 0);
    for (int i : action_set) {
        if (i < 0 || i >= n) throw std::out_of_range("step: bad arm id in action set");
        active[static_cast<std::size_t>(i)] = 1;
    }
    StepResult res;
    for (int i : action_set) {
        res.observations.push_back({i, world.states[static_cast<std::size_t>(i)]});
    }
    for (int s : world.states) res.reward += s;
    for (int i = 0; i < n; ++i) {
        const ArmParams& a = arms[static_cast<std::size_t>(i)];
        const int s = world.states[static_cast<std::size_t>(i)];
        const double p_good = active[static_cast<std::size_t>(i)]
                                  ? a.p_active[static_cast<std::size_t>(s)]
                                  : a.p_passive[static_cast<std::size_t>(s)];
        world.states[static_cast<std::size_t>(i)] = world.rng.bernoulli(p_good) ? 1 : 0;
    }
    ++world.epoch;
    return res;
}

RunMetrics run_simulation(const std::vector<ArmParams>& arms, Policy& policy,
                          const FairnessSpec& spec, const RunConfig& cfg, std::uint64_t seed) {
    const int n = static_cast<int>(arms.size());
    const int T = cfg.horizon;
    WorldState world(n, derive_seed(seed, 1));
    SplitMix64 init_rng(derive_seed(seed, 2));

    // Stationary start: true states ~ Bernoulli(omega*), beliefs fresh (s,1).
    for (int i = 0; i < n; ++i) {
        world.states[static_cast<std::size_t>(i)] =
            init_rng.bernoulli(stationary_belief(arms[static_cast<std::size_t>(i)])) ? 1 : 0;
    }
    policy.reset(world.states);

    // Environment-side mirror of each arm's (s,u) observation state, used to
    // produce the expected-reward feedback for passive arms.
    std::vector<int> obs_state = world.states;
    std::vector<int> obs_age(static_cast<std::size_t>(n), 0);  // last activation epoch

    RunMetrics m;
    m.policy = policy.name();
    m.seed = seed;
    m.n_arms = n;
    m.horizon = T;
    m.activation_counts.assign(static_cast<std::size_t>(n), 0);
    m.reward_series.reserve(static_cast<std::size_t>(T));
    m.urgent_series.reserve(static_cast<std::size_t>(T));

    std::vector<std::vector<int>> action_log;
    action_log.reserve(static_cast<std::size_t>(T));

    for (int t = 1; t <= T; ++t) {
        if (policy.wants_true_states()) policy.set_true_states(world.states);
        const std::vector<int> chosen = policy.select(t);
        StepFeedback fb;
        fb.passive_reward.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            fb.passive_reward[static_cast<std::size_t>(i)] = belief_u_step(
                obs_state[static_cast<std::size_t>(i)], t - obs_age[static_cast<std::size_t>(i)],
                arms[static_cast<std::size_t>(i)]);
        }
        const StepResult sr = step(world, chosen, arms);
        fb.revealed = sr.observations;
        for (const Observation& o : sr.observations) {
            obs_state[static_cast<std::size_t>(o.arm)] = o.state;
            obs_age[static_cast<std::size_t>(o.arm)] = t;
            m.activation_counts[static_cast<std::size_t>(o.arm)] += 1;
        }
        policy.observe(t, fb);
        m.reward_series.push_back(sr.reward);
        m.urgent_series.push_back(policy.last_urgent_count());
        action_log.push_back(chosen);
    }
    m.degraded_epochs = policy.degraded_epochs();

    m.penalty_series.assign(static_cast<std::size_t>(T), 0.0);
    m.violations_closed_series.assign(static_cast<std::size_t>(T), 0);
    if (cfg.audit_enabled) {
        const std::vector<WindowViolation> violations = audit(action_log, spec, n);
        m.violation_count = static_cast<long>(violations.size());
        for (const WindowViolation& v : violations) {
            const int closing = v.window_start + spec.window - 1;
            m.penalty_series[static_cast<std::size_t>(closing - 1)] += cfg.penalty_per_violation;
            m.violations_closed_series[static_cast<std::size_t>(closing - 1)] += 1;
        }
    }

    double total = 0.0, total_raw = 0.0, disc = 0.0, pen = 0.0;
    double df = 1.0;
    for (int t = 0; t < T; ++t) {
        const double r = m.reward_series[static_cast<std::size_t>(t)];
        const double p = m.penalty_series[static_cast<std::size_t>(t)];
        total += r + p;
        total_raw += r;
        pen += p;
        disc += df * (r + p);
        df *= cfg.discount;
    }
    const double cells = static_cast<double>(n) * static_cast<double>(T);
    m.avg_reward = total / cells;
    m.avg_reward_unpenalized = total_raw / cells;
    m.discounted_return = disc;
    m.penalty_total = pen;
    return m;
}

double benefit_ratio(double method_avg, double none_avg, double oracle_avg) {
    const double denom = oracle_avg - none_avg;
    if (denom <= 0.0) {
        throw std::domain_error("benefit_ratio: oracle must outperform no-intervention");
    }
    return (method_avg - none_avg) / denom * 100.0;
}

std::array<long, 5> activation_histogram(const std::vector<long>& counts) {
    std::array<long, 5> h{};
    for (long c : counts) {
        if (c == 0) {
            ++h[0];
        } else if (c <= 10) {
            ++h[1];
        } else if (c <= 50) {
            ++h[2];
        } else if (c <= 100) {
            ++h[3];
        } else {
            ++h[4];
        }
    }
    return h;
}

namespace {

RunMetrics execute_run(const ExperimentSpec& spec, int run_index) {
    InstanceSpec inst = spec.instance;
    inst.seed = derive_seed(spec.instance.seed, static_cast<std::uint64_t>(run_index));
    const std::vector<ArmParams> arms = generate_instance(inst);
    PolicyConfig pc = spec.policy;
    const std::uint64_t run_master = derive_seed(spec.seed, static_cast<std::uint64_t>(run_index));
    pc.seed = derive_seed(run_master, 0x501c1);
    if (policy_needs_fairness(spec.policy_name)) pc.fairness = spec.fairness;
    std::unique_ptr<Policy> policy = make_policy(spec.policy_name, arms, pc);
    return run_simulation(arms, *policy, spec.fairness, spec.run, run_master);
}

}  // namespace

Aggregate run_experiment(const ExperimentSpec& spec) {
    if (spec.runs < 1) throw std::invalid_argument("run_experiment: runs must be >= 1");
    std::vector<RunMetrics> results(static_cast<std::size_t>(spec.runs));
    const int jobs = std::max(1, spec.jobs);
    if (jobs == 1) {
        for (int r = 0; r < spec.runs; ++r) {
            results[static_cast<std::size_t>(r)] = execute_run(spec, r);
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < jobs; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const int r = next.fetch_add(1);
                    if (r >= spec.runs) return;
                    results[static_cast<std::size_t>(r)] = execute_run(spec, r);
                }
            });
        }
        for (std::thread& th : pool) th.join();
    }

    Aggregate agg;
    agg.policy = spec.policy_name;
    agg.runs = spec.runs;
    double sum = 0.0, sum_sq = 0.0;
    std::vector<long> pooled_counts;
    for (const RunMetrics& m : results) {
        sum += m.avg_reward;
        sum_sq += m.avg_reward * m.avg_reward;
        agg.mean_unpenalized += m.avg_reward_unpenalized;
        agg.mean_discounted += m.discounted_return;
        agg.total_violations += m.violation_count;
        agg.total_degraded_epochs += m.degraded_epochs;
        pooled_counts.insert(pooled_counts.end(), m.activation_counts.begin(),
                             m.activation_counts.end());
    }
    const double nruns = static_cast<double>(spec.runs);
    agg.mean_avg_reward = sum / nruns;
    agg.mean_unpenalized /= nruns;
    agg.mean_discounted /= nruns;
    agg.mean_violations = static_cast<double>(agg.total_violations) / nruns;
    if (spec.runs > 1) {
        const double var = (sum_sq - sum * sum / nruns) / (nruns - 1.0);
        agg.stderr_avg_reward = std::sqrt(std::max(0.0, var) / nruns);
    }
    agg.activation_histogram = activation_histogram(pooled_counts);
    agg.per_run = std::move(results);
    return agg;
}

}  // namespace fair_rmab
