#include "fair_rmab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fair_rmab {

int PolicyConfig::effective_window() const {
    if (index_window > 0) return index_window;
    if (fairness) return fairness->window;
    return 50;
}

namespace {

// Shared selection scaffolding: belief bookkeeping, urgency forcing, top-k
// fill with ascending-id tie break.
class SelectorBase : public Policy {
public:
    SelectorBase(int n_arms, const PolicyConfig& cfg, bool fairness_enabled)
        : n_arms_(n_arms), k_(cfg.budget), rng_(derive_seed(cfg.seed, 0x9e11c7)) {
        if (fairness_enabled) {
            if (!cfg.fairness) throw std::invalid_argument("policy requires a fairness spec");
            tracker_.emplace(*cfg.fairness, n_arms);
        }
        last_obs_.assign(n_arms, 0);
        last_act_epoch_.assign(n_arms, 0);
    }

    void reset(const std::vector<int>& initial_states) override {
        for (int i = 0; i < n_arms_; ++i) {
            last_obs_[i] = initial_states[static_cast<std::size_t>(i)];
            last_act_epoch_[i] = 0;
        }
    }

    std::vector<int> select(int t) final {
        const std::vector<double> score = scores(t);
        std::vector<int> chosen = force_urgent(score);
        if (static_cast<int>(chosen.size()) < k_) fill_topk(score, chosen);
        std::sort(chosen.begin(), chosen.end());
        if (tracker_) tracker_->record(t, chosen);
        return chosen;
    }

    void observe(int t, const StepFeedback& feedback) override {
        learn(t, feedback);
        for (const Observation& o : feedback.revealed) {
            last_obs_[o.arm] = o.state;
            last_act_epoch_[o.arm] = t;
        }
    }

protected:
    // Per-arm ranking scores at epoch t.
    virtual std::vector<double> scores(int t) = 0;
    // Learning hook; runs before the belief bookkeeping is advanced.
    virtual void learn(int, const StepFeedback&) {}

    int steps_since(int arm, int t) const { return t - last_act_epoch_[arm]; }
    int last_obs(int arm) const { return last_obs_[arm]; }

    int n_arms_;
    int k_;
    SplitMix64 rng_;
    std::optional<FairnessTracker> tracker_;

private:
    std::vector<int> force_urgent(const std::vector<double>& score) {
        std::vector<int> forced;
        last_urgent_count_ = 0;
        if (!tracker_) return forced;
        const std::vector<int> urgent = tracker_->urgent_units();
        last_urgent_count_ = static_cast<int>(urgent.size());
        const FairnessSpec& spec = tracker_->spec();
        if (spec.group_of.empty()) {
            forced = urgent;
        } else {
            // One representative per urgent group: its best-scored arm.
            for (int g : urgent) {
                int best = -1;
                for (int i = 0; i < n_arms_; ++i) {
                    if (spec.group_of[static_cast<std::size_t>(i)] != g) continue;
                    if (best < 0 || score[static_cast<std::size_t>(i)] >
                                        score[static_cast<std::size_t>(best)]) {
                        best = i;
                    }
                }
                if (best >= 0) forced.push_back(best);
            }
        }
        if (static_cast<int>(forced.size()) > k_) {
            // Degraded mode: budget cannot cover the urgent set; keep the
            // best-scored k and let the audit surface the rest.
            ++degraded_epochs_;
            std::sort(forced.begin(), forced.end(), [&](int a, int b) {
                const double sa = score[static_cast<std::size_t>(a)];
                const double sb = score[static_cast<std::size_t>(b)];
                return sa != sb ? sa > sb : a < b;
            });
            forced.resize(static_cast<std::size_t>(k_));
        }
        return forced;
    }

    void fill_topk(const std::vector<double>& score, std::vector<int>& chosen) {
        std::vector<std::uint8_t> taken(static_cast<std::size_t>(n_arms_), 0);
        for (int i : chosen) taken[static_cast<std::size_t>(i)] = 1;
        std::vector<int> order(static_cast<std::size_t>(n_arms_));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double sa = score[static_cast<std::size_t>(a)];
            const double sb = score[static_cast<std::size_t>(b)];
            return sa != sb ? sa > sb : a < b;
        });
        for (int i : order) {
            if (static_cast<int>(chosen.size()) >= k_) break;
            if (!taken[static_cast<std::size_t>(i)]) chosen.push_back(i);
        }
    }

    std::vector<int> last_obs_;
    std::vector<int> last_act_epoch_;
};

class FawtPolicy final : public SelectorBase {
public:
    FawtPolicy(const std::vector<ArmParams>& arms, const PolicyConfig& cfg, bool fairness_enabled)
        : SelectorBase(static_cast<int>(arms.size()), cfg, fairness_enabled),
          arms_(arms),
          beta_(cfg.beta),
          horizon_kind_(cfg.index_horizon),
          total_horizon_(cfg.total_horizon),
          window_(cfg.effective_window()) {
        tables_.reserve(arms.size());
        for (const ArmParams& a : arms_) {
            tables_.push_back(fast_whittle_infinite(a, window_).table);
        }
        if (horizon_kind_ == IndexHorizon::finite && total_horizon_ <= 0) {
            throw std::invalid_argument("finite index horizon requires total_horizon");
        }
    }

    std::string name() const override { return tracker_ ? "fawt" : "whittle"; }

protected:
    std::vector<double> scores(int t) override {
        std::vector<double> s(static_cast<std::size_t>(n_arms_));
        for (int i = 0; i < n_arms_; ++i) {
            const int u = std::min(steps_since(i, t), window_);
            const double tw = tables_[static_cast<std::size_t>(i)].at(last_obs(i), u);
            if (horizon_kind_ == IndexHorizon::infinite) {
                s[static_cast<std::size_t>(i)] = tw;
            } else {
                const double residual = static_cast<double>(total_horizon_ - t);
                const double omega = belief_u_step(last_obs(i), u, arms_[static_cast<std::size_t>(i)]);
                s[static_cast<std::size_t>(i)] =
                    finite_whittle(arms_[static_cast<std::size_t>(i)], omega, beta_, residual, tw)
                        .value;
            }
        }
        return s;
    }

private:
    std::vector<ArmParams> arms_;
    double beta_;
    IndexHorizon horizon_kind_;
    int total_horizon_;
    int window_;
    std::vector<IndexTable> tables_;
};

class FawtUPolicy final : public SelectorBase, public PosteriorProbe {
public:
    FawtUPolicy(int n_arms, const PolicyConfig& cfg)
        : SelectorBase(n_arms, cfg, cfg.fairness.has_value()),
          beta_(cfg.beta),
          horizon_kind_(cfg.index_horizon),
          total_horizon_(cfg.total_horizon),
          window_(cfg.effective_window()),
          posteriors_(static_cast<std::size_t>(n_arms)) {}

    std::string name() const override { return "fawt-u"; }
    const ArmPosterior& posterior(int arm) const override {
        return posteriors_[static_cast<std::size_t>(arm)];
    }
    void set_posterior(int arm, const ArmPosterior& post) override {
        posteriors_[static_cast<std::size_t>(arm)] = post;
    }

protected:
    std::vector<double> scores(int t) override {
        std::vector<double> s(static_cast<std::size_t>(n_arms_));
        for (int i = 0; i < n_arms_; ++i) {
            const ArmParams sample = posteriors_[static_cast<std::size_t>(i)].sample(rng_);
            const int u = std::min(steps_since(i, t), window_);
            const double tw =
                infinite_state_index(sample, last_obs(i), u, window_, kAvgRewardProxyBeta, 1e-6);
            if (horizon_kind_ == IndexHorizon::infinite) {
                s[static_cast<std::size_t>(i)] = tw;
            } else {
                const double residual = static_cast<double>(total_horizon_ - t);
                const double omega = belief_u_step(last_obs(i), u, sample);
                s[static_cast<std::size_t>(i)] =
                    finite_whittle(sample, omega, beta_, residual, tw).value;
            }
        }
        return s;
    }

    void learn(int t, const StepFeedback& feedback) override {
        for (const Observation& o : feedback.revealed) {
            update_posterior(o.arm, last_obs(o.arm), o.state, steps_since(o.arm, t));
        }
    }

private:
    // Credit assignment for one activation stretch: the observed endpoint
    // pair (s0 -> active -> z_1 -> passive^(u-1) -> z_u = s1). Adjacent
    // activations (u == 1) give an exactly observed active transition;
    // longer stretches contribute expected counts from a forward-backward
    // smoothing pass under the posterior means.
    void update_posterior(int arm, int s0, int s1, int u) {
        ArmPosterior& post = posteriors_[static_cast<std::size_t>(arm)];
        if (u <= 1) {
            const int idx = s0 == 0 ? 0 : 1;
            (s1 == 1 ? post.alpha[idx] : post.beta_shape[idx]) += 1.0;
            return;
        }
        const ArmParams mean = post.mean();
        // forward[j][x] = P(z_j = x | z_0 = s0), j = 1..u
        std::vector<std::array<double, 2>> fwd(static_cast<std::size_t>(u) + 1);
        fwd[1] = {s0 == 0 ? 1.0 - mean.p_active[0] : 1.0 - mean.p_active[1],
                  s0 == 0 ? mean.p_active[0] : mean.p_active[1]};
        for (int j = 2; j <= u; ++j) {
            const auto& f = fwd[static_cast<std::size_t>(j - 1)];
            fwd[static_cast<std::size_t>(j)] = {
                f[0] * (1.0 - mean.p_passive[0]) + f[1] * (1.0 - mean.p_passive[1]),
                f[0] * mean.p_passive[0] + f[1] * mean.p_passive[1]};
        }
        // backward[j][x] = P(z_u = s1 | z_j = x), j = 1..u
        std::vector<std::array<double, 2>> bwd(static_cast<std::size_t>(u) + 1);
        bwd[static_cast<std::size_t>(u)] = {s1 == 0 ? 1.0 : 0.0, s1 == 1 ? 1.0 : 0.0};
        for (int j = u - 1; j >= 1; --j) {
            const auto& b = bwd[static_cast<std::size_t>(j + 1)];
            bwd[static_cast<std::size_t>(j)] = {
                (1.0 - mean.p_passive[0]) * b[0] + mean.p_passive[0] * b[1],
                (1.0 - mean.p_passive[1]) * b[0] + mean.p_passive[1] * b[1]};
        }
        const double z = fwd[static_cast<std::size_t>(u)][static_cast<std::size_t>(s1)];
        if (z <= 0.0) return;
        // Active step s0 -> z_1.
        {
            const int idx = s0 == 0 ? 0 : 1;
            const double p_good = (s0 == 0 ? mean.p_active[0] : mean.p_active[1]);
            const double w_good = p_good * bwd[1][1] / z;
            const double w_bad = (1.0 - p_good) * bwd[1][0] / z;
            post.alpha[idx] += w_good;
            post.beta_shape[idx] += w_bad;
        }
        // Passive steps z_j -> z_{j+1}, j = 1..u-1.
        for (int j = 1; j < u; ++j) {
            for (int x = 0; x < 2; ++x) {
                const double fx = fwd[static_cast<std::size_t>(j)][static_cast<std::size_t>(x)];
                if (fx <= 0.0) continue;
                const double p_good = mean.p_passive[static_cast<std::size_t>(x)];
                const double w_good =
                    fx * p_good * bwd[static_cast<std::size_t>(j + 1)][1] / z;
                const double w_bad =
                    fx * (1.0 - p_good) * bwd[static_cast<std::size_t>(j + 1)][0] / z;
                post.alpha[static_cast<std::size_t>(2 + x)] += w_good;
                post.beta_shape[static_cast<std::size_t>(2 + x)] += w_bad;
            }
        }
    }

    double beta_;
    IndexHorizon horizon_kind_;
    int total_horizon_;
    int window_;
    std::vector<ArmPosterior> posteriors_;
};

class FawtQPolicy final : public SelectorBase, public QTableProbe {
public:
    FawtQPolicy(int n_arms, const PolicyConfig& cfg)
        : SelectorBase(n_arms, cfg, cfg.fairness.has_value()),
          window_(cfg.effective_window()),
          eps0_(cfg.epsilon),
          eps1_(cfg.eps_final >= 0.0 ? cfg.eps_final : cfg.epsilon),
          total_horizon_(cfg.total_horizon),
          gamma_(cfg.gamma >= 0.0 ? cfg.gamma : cfg.beta) {
        const std::size_t n = static_cast<std::size_t>(n_arms);
        const std::size_t cells = 2u * 2u * static_cast<std::size_t>(window_);
        q_.assign(n, std::vector<double>(cells, 0.0));
        z_.assign(n, std::vector<long>(cells, 1));
    }

    std::string name() const override { return "fawt-q"; }

    double q_value(int arm, int s, int a, int l) const override {
        return q_[static_cast<std::size_t>(arm)][cell(s, a, l)];
    }
    long visit_count(int arm, int s, int a, int l) const override {
        return z_[static_cast<std::size_t>(arm)][cell(s, a, l)];
    }
    double lambda_value(int arm, int s, int l) const override {
        return q_value(arm, s, 1, l) - q_value(arm, s, 0, l);
    }

protected:
    std::vector<double> scores(int t) override {
        explore_ = rng_.next_double() < epsilon(t);
        std::vector<double> s(static_cast<std::size_t>(n_arms_));
        for (int i = 0; i < n_arms_; ++i) {
            const int l = std::min(steps_since(i, t), window_);
            s[static_cast<std::size_t>(i)] =
                explore_ ? rng_.next_double() : lambda_value(i, last_obs(i), l);
        }
        return s;
    }

    void learn(int t, const StepFeedback& feedback) override {
        std::vector<int> revealed_state(static_cast<std::size_t>(n_arms_), -1);
        for (const Observation& o : feedback.revealed) {
            revealed_state[static_cast<std::size_t>(o.arm)] = o.state;
        }
        for (int i = 0; i < n_arms_; ++i) {
            const int s = last_obs(i);
            const int l = std::min(steps_since(i, t), window_);
            const bool active = revealed_state[static_cast<std::size_t>(i)] >= 0;
            const int a = active ? 1 : 0;
            double reward;
            int ns, nl;
            if (active) {
                const int obs = revealed_state[static_cast<std::size_t>(i)];
                reward = static_cast<double>(obs);
                ns = obs;
                nl = 1;
            } else {
                reward = feedback.passive_reward[static_cast<std::size_t>(i)];
                ns = s;
                nl = std::min(l + 1, window_);
            }
            const double next_best =
                std::max(q_value(i, ns, 0, nl), q_value(i, ns, 1, nl));
            auto& qi = q_[static_cast<std::size_t>(i)];
            auto& zi = z_[static_cast<std::size_t>(i)];
            const std::size_t c = cell(s, a, l);
            const double alpha = 1.0 / static_cast<double>(zi[c]);
            qi[c] += alpha * (reward + gamma_ * next_best - qi[c]);
            zi[c] += 1;
        }
    }

private:
    std::size_t cell(int s, int a, int l) const {
        return static_cast<std::size_t>(((s * 2) + a) * window_ + (l - 1));
    }
    double epsilon(int t) const {
        if (total_horizon_ <= 1 || eps0_ == eps1_) return eps0_;
        const double frac = static_cast<double>(t - 1) / static_cast<double>(total_horizon_ - 1);
        return eps0_ + (eps1_ - eps0_) * frac;
    }

    int window_;
    double eps0_, eps1_;
    int total_horizon_;
    double gamma_;
    bool explore_ = false;
    std::vector<std::vector<double>> q_;
    std::vector<std::vector<long>> z_;
};

class MyopicPolicy final : public SelectorBase {
public:
    MyopicPolicy(const std::vector<ArmParams>& arms, const PolicyConfig& cfg, bool constrained)
        : SelectorBase(static_cast<int>(arms.size()), cfg, constrained), arms_(arms) {}

    std::string name() const override { return tracker_ ? "cmyopic" : "myopic"; }

protected:
    std::vector<double> scores(int t) override {
        std::vector<double> s(static_cast<std::size_t>(n_arms_));
        for (int i = 0; i < n_arms_; ++i) {
            const ArmParams& a = arms_[static_cast<std::size_t>(i)];
            const double omega = belief_u_step(last_obs(i), steps_since(i, t), a);
            s[static_cast<std::size_t>(i)] = omega * (a.p_active[1] - a.p_passive[1]) +
                                             (1.0 - omega) * (a.p_active[0] - a.p_passive[0]);
        }
        return s;
    }

private:
    std::vector<ArmParams> arms_;
};

class OraclePolicy final : public SelectorBase {
public:
    OraclePolicy(const std::vector<ArmParams>& arms, const PolicyConfig& cfg)
        : SelectorBase(static_cast<int>(arms.size()), cfg, false) {
        index_.reserve(arms.size());
        for (const ArmParams& a : arms) {
            index_.push_back({fully_observable_index(a, 0, cfg.beta),
                              fully_observable_index(a, 1, cfg.beta)});
        }
    }

    std::string name() const override { return "oracle"; }
    bool wants_true_states() const override { return true; }
    void set_true_states(const std::vector<int>& states) override { true_states_ = states; }

protected:
    std::vector<double> scores(int) override {
        std::vector<double> s(static_cast<std::size_t>(n_arms_));
        for (int i = 0; i < n_arms_; ++i) {
            s[static_cast<std::size_t>(i)] =
                index_[static_cast<std::size_t>(i)][static_cast<std::size_t>(
                    true_states_[static_cast<std::size_t>(i)])];
        }
        return s;
    }

private:
    std::vector<std::array<double, 2>> index_;
    std::vector<int> true_states_;
};

class RandomPolicy final : public SelectorBase {
public:
    RandomPolicy(int n_arms, const PolicyConfig& cfg) : SelectorBase(n_arms, cfg, false) {}
    std::string name() const override { return "random"; }

protected:
    std::vector<double> scores(int) override {
        std::vector<double> s(static_cast<std::size_t>(n_arms_));
        for (double& v : s) v = rng_.next_double();
        return s;
    }
};

class NoInterventionPolicy final : public Policy {
public:
    std::vector<int> select(int) override { return {}; }
    void observe(int, const StepFeedback&) override {}
    void reset(const std::vector<int>&) override {}
    std::string name() const override { return "none"; }
};

}  // namespace

ArmParams ArmPosterior::sample(SplitMix64& rng) const {
    std::array<double, 4> p;
    for (int j = 0; j < 4; ++j) {
        p[static_cast<std::size_t>(j)] = rng.beta(alpha[static_cast<std::size_t>(j)],
                                                  beta_shape[static_cast<std::size_t>(j)]);
    }
    return ArmParams::make(p[0], p[1], p[2], p[3], /*require_acting_helps=*/false);
}

ArmParams ArmPosterior::mean() const {
    std::array<double, 4> p;
    for (int j = 0; j < 4; ++j) {
        const std::size_t i = static_cast<std::size_t>(j);
        p[i] = alpha[i] / (alpha[i] + beta_shape[i]);
    }
    return ArmParams::make(p[0], p[1], p[2], p[3], /*require_acting_helps=*/false);
}

std::unique_ptr<Policy> make_fawt(const std::vector<ArmParams>& arms, const PolicyConfig& cfg,
                                  bool fairness_enabled) {
    return std::make_unique<FawtPolicy>(arms, cfg, fairness_enabled);
}
std::unique_ptr<Policy> make_fawt_u(int n_arms, const PolicyConfig& cfg) {
    return std::make_unique<FawtUPolicy>(n_arms, cfg);
}
std::unique_ptr<Policy> make_fawt_q(int n_arms, const PolicyConfig& cfg) {
    return std::make_unique<FawtQPolicy>(n_arms, cfg);
}
std::unique_ptr<Policy> make_myopic(const std::vector<ArmParams>& arms, const PolicyConfig& cfg,
                                    bool constrained) {
    return std::make_unique<MyopicPolicy>(arms, cfg, constrained);
}
std::unique_ptr<Policy> make_oracle(const std::vector<ArmParams>& arms, const PolicyConfig& cfg) {
    return std::make_unique<OraclePolicy>(arms, cfg);
}
std::unique_ptr<Policy> make_random(int n_arms, const PolicyConfig& cfg) {
    return std::make_unique<RandomPolicy>(n_arms, cfg);
}
std::unique_ptr<Policy> make_no_intervention() {
    return std::make_unique<NoInterventionPolicy>();
}

std::unique_ptr<Policy> make_policy(const std::string& name, const std::vector<ArmParams>& arms,
                                    const PolicyConfig& cfg) {
    const int n = static_cast<int>(arms.size());
    if (name == "fawt") return make_fawt(arms, cfg, true);
    if (name == "whittle") return make_fawt(arms, cfg, false);
    if (name == "fawt-u") return make_fawt_u(n, cfg);
    if (name == "fawt-q") return make_fawt_q(n, cfg);
    if (name == "myopic") return make_myopic(arms, cfg, false);
    if (name == "cmyopic") return make_myopic(arms, cfg, true);
    if (name == "oracle") return make_oracle(arms, cfg);
    if (name == "random") return make_random(n, cfg);
    if (name == "none") return make_no_intervention();
    throw std::invalid_argument("unknown policy name: " + name);
}

bool policy_needs_fairness(const std::string& name) {
    return name == "fawt" || name == "fawt-u" || name == "fawt-q" || name == "cmyopic";
}

bool topk_equals_argmax_check(const std::vector<QPair>& qs, int k) {
    const int n = static_cast<int>(qs.size());
    if (k < 0 || k > n) throw std::invalid_argument("topk_equals_argmax_check: bad k");
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double da = qs[static_cast<std::size_t>(a)].q_active -
                          qs[static_cast<std::size_t>(a)].q_passive;
        const double db = qs[static_cast<std::size_t>(b)].q_active -
                          qs[static_cast<std::size_t>(b)].q_passive;
        return da != db ? da > db : a < b;
    });
    double topk_value = 0.0;
    for (int i = 0; i < n; ++i) {
        const QPair& q = qs[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        topk_value += i < k ? q.q_active : q.q_passive;
    }
    // Exhaustive max over all k-subsets.
    double best = -1e300;
    std::vector<int> mask(static_cast<std::size_t>(n), 0);
    std::fill(mask.begin(), mask.begin() + k, 1);
    std::sort(mask.begin(), mask.end());
    do {
        double v = 0.0;
        for (int i = 0; i < n; ++i) {
            const QPair& q = qs[static_cast<std::size_t>(i)];
            v += mask[static_cast<std::size_t>(i)] ? q.q_active : q.q_passive;
        }
        best = std::max(best, v);
    } while (std::next_permutation(mask.begin(), mask.end()));
    return topk_value >= best - 1e-9;
}

}  // namespace fair_rmab
