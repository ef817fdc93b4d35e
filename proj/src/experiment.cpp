#include "fair_rmab/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fair_rmab/checks.hpp"
#include "fair_rmab/whittle.hpp"

namespace fair_rmab {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void ExperimentConfig::validate() const {
    if (N < 1 || k < 1 || k > N) throw std::invalid_argument("config: need 1 <= k <= N");
    if (T < 1) throw std::invalid_argument("config: T must be >= 1");
    if (runs < 1) throw std::invalid_argument("config: runs must be >= 1");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("config: beta in (0,1]");
    if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("config: eps in [0,1]");
    FairnessSpec spec{eta, L, {}};
    const Feasibility f = check_feasibility(spec, k, N);
    if (!f.ok) throw std::invalid_argument("config: " + f.detail);
    correlation_from_string(correlation);
    if (index_horizon != "infinite" && index_horizon != "finite") {
        throw std::invalid_argument("config: index_horizon must be infinite or finite");
    }
}

ExperimentConfig parse_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::size_t eq = line.find('=');
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\n");
            const auto e = s.find_last_not_of(" \t\r\n");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "N") base.N = std::stoi(val);
        else if (key == "k") base.k = std::stoi(val);
        else if (key == "T") base.T = std::stoi(val);
        else if (key == "L") base.L = std::stoi(val);
        else if (key == "eta") base.eta = std::stoi(val);
        else if (key == "beta") base.beta = std::stod(val);
        else if (key == "gamma") base.gamma = std::stod(val);
        else if (key == "eps") base.eps = std::stod(val);
        else if (key == "penalty") base.penalty = std::stod(val);
        else if (key == "runs") base.runs = std::stoi(val);
        else if (key == "seed") base.seed = std::stoull(val);
        else if (key == "jobs") base.jobs = std::stoi(val);
        else if (key == "correlation") base.correlation = val;
        else if (key == "out") base.out_dir = val;
        else if (key == "preset") base.preset = val;
        else if (key == "index_horizon") base.index_horizon = val;
        else if (key == "policies") {
            base.policies.clear();
            std::istringstream vs(val);
            std::string tok;
            while (std::getline(vs, tok, ',')) {
                if (!tok.empty()) base.policies.push_back(tok);
            }
        } else {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" +
                                     key + "'");
        }
    }
    return base;
}

namespace {

const std::vector<std::string> kAllPolicies = {"oracle", "fawt",   "fawt-u", "fawt-q",
                                               "cmyopic", "myopic", "random", "none"};

}  // namespace

std::vector<PresetJob> expand_preset(const ExperimentConfig& base) {
    std::vector<PresetJob> jobs;
    if (base.preset.empty()) {
        ExperimentConfig c = base;
        if (c.policies.empty()) c.policies = {"fawt", "random"};
        jobs.push_back({"run", c});
        return jobs;
    }
    ExperimentConfig c = base;
    if (base.preset == "fig1") {
        c.N = 100; c.k = 10; c.T = 1000; c.L = 50; c.eta = 2;
        c.penalty = 0.0;
        c.policies = {"whittle", "fawt"};
        jobs.push_back({"fig1", c});
    } else if (base.preset == "fig4") {
        c.T = 1000; c.L = 20; c.eta = 2; c.penalty = -0.01;
        c.policies = kAllPolicies;
        for (int n : {50, 100, 200, 500}) {
            ExperimentConfig cc = c;
            cc.N = n;
            cc.k = n / 10;
            jobs.push_back({"fig4_N" + std::to_string(n), cc});
        }
    } else if (base.preset == "fig5") {
        c.N = 100; c.k = 10; c.T = 1000; c.eta = 2; c.penalty = 0.0;
        c.policies = kAllPolicies;
        for (int l : {15, 30, 50}) {
            ExperimentConfig cc = c;
            cc.L = l;
            jobs.push_back({"fig5_L" + std::to_string(l), cc});
        }
    } else if (base.preset == "sensitivity") {
        // Fairness strength kL/N in {1.3, 2, 3} at N=100, k=10, eta=2.
        c.N = 100; c.k = 10; c.T = 1000; c.eta = 2; c.penalty = -0.01;
        c.policies = kAllPolicies;
        for (int l : {13, 20, 30}) {
            ExperimentConfig cc = c;
            cc.L = l;
            jobs.push_back({"sensitivity_L" + std::to_string(l), cc});
        }
    } else if (base.preset == "klevel") {
        // Intervention level k/N in {5,10,20,30}% at L=30.
        c.N = 100; c.T = 1000; c.L = 30; c.eta = 2; c.penalty = -0.01;
        c.policies = kAllPolicies;
        for (int k : {5, 10, 20, 30}) {
            ExperimentConfig cc = c;
            cc.k = k;
            jobs.push_back({"klevel_k" + std::to_string(k), cc});
        }
    } else {
        throw std::invalid_argument("unknown preset: " + base.preset);
    }
    return jobs;
}

ExperimentOutcome run_policies(const std::string& label, const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentOutcome out;
    out.label = label;
    out.config = cfg;

    ExperimentSpec spec;
    spec.instance.n_arms = cfg.N;
    spec.instance.budget = cfg.k;
    spec.instance.horizon = cfg.T;
    spec.instance.discount = cfg.beta;
    spec.instance.seed = derive_seed(cfg.seed, 0x1257a9);
    spec.instance.correlation = correlation_from_string(cfg.correlation);
    spec.fairness = FairnessSpec{cfg.eta, cfg.L, {}};
    spec.run.horizon = cfg.T;
    spec.run.penalty_per_violation = cfg.penalty;
    spec.run.discount = cfg.beta;
    spec.runs = cfg.runs;
    spec.seed = derive_seed(cfg.seed, 0x5eed);
    spec.jobs = cfg.jobs;
    spec.policy.budget = cfg.k;
    spec.policy.beta = cfg.beta;
    spec.policy.epsilon = cfg.eps;
    spec.policy.gamma = cfg.gamma;
    spec.policy.total_horizon = cfg.T;
    spec.policy.index_horizon =
        cfg.index_horizon == "finite" ? IndexHorizon::finite : IndexHorizon::infinite;
    spec.policy.fairness = spec.fairness;

    for (const std::string& name : cfg.policies) {
        ExperimentSpec ps = spec;
        ps.policy_name = name;
        out.by_policy.emplace(name, run_experiment(ps));
        out.policy_order.push_back(name);
    }
    const bool has_oracle = out.by_policy.count("oracle") != 0;
    const bool has_none = out.by_policy.count("none") != 0;
    if (has_oracle && has_none) {
        const double oracle = out.by_policy.at("oracle").mean_avg_reward;
        const double none = out.by_policy.at("none").mean_avg_reward;
        for (const std::string& name : out.policy_order) {
            out.benefit_ratios[name] =
                benefit_ratio(out.by_policy.at(name).mean_avg_reward, none, oracle);
        }
    }
    out.wall_clock_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    return out;
}

namespace {

ordered_json config_json(const ExperimentConfig& c) {
    ordered_json j;
    j["N"] = c.N;
    j["k"] = c.k;
    j["T"] = c.T;
    j["L"] = c.L;
    j["eta"] = c.eta;
    j["beta"] = c.beta;
    j["gamma"] = c.gamma;
    j["eps"] = c.eps;
    j["penalty"] = c.penalty;
    j["runs"] = c.runs;
    j["seed"] = c.seed;
    j["correlation"] = c.correlation;
    j["index_horizon"] = c.index_horizon;
    j["policies"] = c.policies;
    j["preset"] = c.preset;
    j["generator"] = "pp01~U(0.05,0.45); pp11~U(pp01+0.05,0.95); "
                     "pa=pp+U(min(0.05,0.95-pp),0.95-pp); redraw until pa11>=pa01";
    return j;
}

}  // namespace

void write_outputs(const ExperimentOutcome& outcome, const std::string& out_dir) {
    const fs::path dir = fs::path(out_dir) / outcome.label;
    fs::create_directories(dir);

    ordered_json j;
    j["label"] = outcome.label;
    j["config"] = config_json(outcome.config);
    ordered_json pols = ordered_json::object();
    for (const std::string& name : outcome.policy_order) {
        const Aggregate& a = outcome.by_policy.at(name);
        ordered_json pj;
        pj["runs"] = a.runs;
        pj["mean_avg_reward"] = a.mean_avg_reward;
        pj["stderr_avg_reward"] = a.stderr_avg_reward;
        pj["mean_avg_reward_unpenalized"] = a.mean_unpenalized;
        pj["mean_discounted_return"] = a.mean_discounted;
        pj["mean_violations"] = a.mean_violations;
        pj["total_violations"] = a.total_violations;
        pj["total_degraded_epochs"] = a.total_degraded_epochs;
        pj["activation_histogram"] = {{"0", a.activation_histogram[0]},
                                      {"1-10", a.activation_histogram[1]},
                                      {"11-50", a.activation_histogram[2]},
                                      {"51-100", a.activation_histogram[3]},
                                      {">100", a.activation_histogram[4]}};
        if (outcome.benefit_ratios.count(name)) {
            pj["benefit_ratio_pct"] = outcome.benefit_ratios.at(name);
        }
        pols[name] = pj;
    }
    j["policies"] = pols;
    {
        std::ofstream f(dir / "aggregate.json");
        f << j.dump(2) << '\n';
    }
    {
        std::ofstream f(dir / "runs.csv");
        f << "run,seed,policy,t,reward,penalty,n_urgent,n_violations_closed\n";
        f << std::fixed << std::setprecision(6);
        for (const std::string& name : outcome.policy_order) {
            const Aggregate& a = outcome.by_policy.at(name);
            for (int r = 0; r < a.runs; ++r) {
                const RunMetrics& m = a.per_run[static_cast<std::size_t>(r)];
                for (int t = 1; t <= m.horizon; ++t) {
                    f << r << ',' << m.seed << ',' << name << ',' << t << ','
                      << m.reward_series[static_cast<std::size_t>(t - 1)] << ','
                      << m.penalty_series[static_cast<std::size_t>(t - 1)] << ','
                      << m.urgent_series[static_cast<std::size_t>(t - 1)] << ','
                      << m.violations_closed_series[static_cast<std::size_t>(t - 1)] << '\n';
                }
            }
        }
    }
    {
        InstanceSpec inst;
        inst.n_arms = outcome.config.N;
        inst.budget = outcome.config.k;
        inst.horizon = outcome.config.T;
        inst.discount = outcome.config.beta;
        inst.seed = derive_seed(derive_seed(outcome.config.seed, 0x1257a9), 0);
        inst.correlation = correlation_from_string(outcome.config.correlation);
        std::ofstream f(dir / "arms_run0.csv");
        write_arms_csv(f, generate_instance(inst));
    }
    {
        // Wall clock lives apart from the deterministic artifacts.
        ordered_json tj;
        tj["label"] = outcome.label;
        tj["wall_clock_ms"] = outcome.wall_clock_ms;
        std::ofstream f(dir / "timing.json");
        f << tj.dump(2) << '\n';
    }
}

void print_summary(std::ostream& os, const ExperimentOutcome& outcome) {
    os << "== " << outcome.label << " (N=" << outcome.config.N << " k=" << outcome.config.k
       << " T=" << outcome.config.T << " L=" << outcome.config.L << " eta=" << outcome.config.eta
       << " runs=" << outcome.config.runs << ")\n";
    os << std::left << std::setw(10) << "policy" << std::right << std::setw(12) << "mean R"
       << std::setw(12) << "stderr" << std::setw(12) << "violations" << std::setw(12)
       << "benefit%" << '\n';
    os << std::fixed;
    for (const std::string& name : outcome.policy_order) {
        const Aggregate& a = outcome.by_policy.at(name);
        os << std::left << std::setw(10) << name << std::right << std::setw(12)
           << std::setprecision(4) << a.mean_avg_reward << std::setw(12) << std::setprecision(4)
           << a.stderr_avg_reward << std::setw(12) << std::setprecision(1) << a.mean_violations;
        if (outcome.benefit_ratios.count(name)) {
            os << std::setw(12) << std::setprecision(1) << outcome.benefit_ratios.at(name);
        }
        os << '\n';
    }
    os << "  wall clock: " << std::setprecision(0) << outcome.wall_clock_ms << " ms\n";
}

namespace {

std::vector<ArmParams> verify_instances(int count, std::uint64_t seed) {
    InstanceSpec inst;
    inst.n_arms = count;
    inst.budget = 1;
    inst.horizon = 1;
    inst.discount = 0.95;
    inst.seed = seed;
    inst.correlation = Correlation::positive;
    return generate_instance(inst);
}

}  // namespace

VerifyOutcome run_verify(const VerifyConfig& cfg, std::ostream& os) {
    VerifyOutcome out;
    auto note = [&](const std::string& line) {
        out.lines.push_back(line);
        os << line << '\n';
    };
    const bool all = cfg.check == "all";
    const std::vector<ArmParams> arms = verify_instances(cfg.instances, cfg.seed);

    if (all || cfg.check == "decay") {
        int checked = 0, failing_arms = 0, skipped = 0;
        double worst_dip = 0.0;
        std::ostringstream examples;
        for (const ArmParams& arm : arms) {
            const std::vector<double> grid = [&] {
                std::vector<double> g;
                for (int i = 0; i <= 40; ++i) g.push_back(-2.0 + 4.0 * i / 40.0);
                return g;
            }();
            if (!check_indexability(arm, grid, 0.95, 10).pass) {
                ++skipped;
                continue;
            }
            bool arm_bad = false;
            for (int s = 0; s < 2 && !arm_bad; ++s) {
                for (int u = 1; u <= 5 && !arm_bad; ++u) {
                    double prev = 0.0;  // index at residual horizon 0
                    for (int T = 1; T <= 7; ++T) {
                        const BisectionResult r =
                            exact_finite_whittle(arm, s, u, 0.95, T, 1e-10, 300);
                        if (!r.bracketed || r.lambda <= prev) {
                            arm_bad = true;
                            worst_dip = std::max(worst_dip, prev - r.lambda);
                            if (failing_arms < 3) {
                                examples << "  non-monotone index: arm(" << arm.p_active[0]
                                         << ',' << arm.p_active[1] << ',' << arm.p_passive[0]
                                         << ',' << arm.p_passive[1] << ") state(" << s << ','
                                         << u << ") T=" << T << ": " << r.lambda
                                         << " <= " << prev << '\n';
                            }
                            break;
                        }
                        prev = r.lambda;
                    }
                }
            }
            failing_arms += arm_bad;
            ++checked;
        }
        std::ostringstream ss;
        ss << "decay: " << failing_arms << "/" << checked
           << " indexable instances violate strict index growth in the residual horizon"
           << " (worst dip " << worst_dip << "); " << skipped << " skipped (non-indexable)";
        note(ss.str());
        if (!examples.str().empty()) os << examples.str();
        if (failing_arms > 0) out.hard_pass = false;
    }

    if (all || cfg.check == "bounds") {
        int violations = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < arms.size(); ++i) {
            for (int T = 2; T <= 6; ++T) {
                const ValueBoundReport rep =
                    check_value_bounds(arms[i], 0.95, T, 20, derive_seed(cfg.seed, i));
                violations += rep.violations;
                worst = std::max(worst, rep.max_violation);
            }
            const ValueBoundReport rep =
                check_value_bounds_infinite(arms[i], 0.95, 20, derive_seed(cfg.seed, i + 1));
            violations += rep.violations;
            worst = std::max(worst, rep.max_violation);
        }
        std::ostringstream ss;
        ss << "bounds: " << violations << " violations beyond 1e-8, max excess " << worst;
        note(ss.str());
        if (violations > 0) out.hard_pass = false;
    }

    if (all || cfg.check == "thm4") {
        SplitMix64 rng(derive_seed(cfg.seed, 0x7714));
        int failures = 0;
        const int trials = 500;
        for (int trial = 0; trial < trials; ++trial) {
            const int n = 2 + static_cast<int>(rng.uniform_int(7));  // 2..8
            const int k = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
            std::vector<QPair> qs(static_cast<std::size_t>(n));
            for (QPair& q : qs) {
                q.q_active = rng.uniform(-1.0, 1.0);
                q.q_passive = rng.uniform(-1.0, 1.0);
            }
            if (!topk_equals_argmax_check(qs, k)) ++failures;
        }
        std::ostringstream ss;
        ss << "thm4: " << trials << " exhaustive subset trials, " << failures << " failures";
        note(ss.str());
        if (failures > 0) out.hard_pass = false;
    }

    if (all || cfg.check == "indexability") {
        std::vector<double> grid;
        for (int i = 0; i < 200; ++i) grid.push_back(-2.0 + 4.0 * i / 199.0);
        int pass = 0;
        for (const ArmParams& arm : arms) {
            if (check_indexability(arm, grid, 0.95, 12).pass) ++pass;
        }
        std::ostringstream ss;
        ss << "indexability: " << pass << "/" << arms.size() << " pass on a 200-point grid";
        note(ss.str());
    }

    if (all || cfg.check == "conditions") {
        int inc_inf = 0, noninc_inf = 0, inc_fin = 0, noninc_fin = 0;
        for (const ArmParams& arm : arms) {
            const TheoremConditionReport ri = check_theorem_conditions(arm, 0.95, std::nullopt);
            inc_inf += ri.cond_increasing;
            noninc_inf += ri.cond_nonincreasing;
            const TheoremConditionReport rf = check_theorem_conditions(arm, 0.95, 10);
            inc_fin += rf.cond_increasing;
            noninc_fin += rf.cond_nonincreasing;
        }
        std::ostringstream ss;
        ss << "conditions (sufficient, rates only): infinite inc " << inc_inf << "/"
           << arms.size() << ", non-inc " << noninc_inf << "/" << arms.size()
           << "; finite(T=10) inc " << inc_fin << "/" << arms.size() << ", non-inc "
           << noninc_fin << "/" << arms.size();
        note(ss.str());
    }

    if (all || cfg.check == "oracle") {
        const int L = 40;
        int agree = 0, total = 0;
        std::ostringstream log;
        for (const ArmParams& arm : arms) {
            const FastWhittleResult fw = fast_whittle_infinite(arm, L);
            bool ok = true;
            for (const auto& [s, u] : {std::pair{0, 1}, {1, 1}, {0, 2}, {1, 2}, {0, 5}, {1, 5}}) {
                const BisectionResult r =
                    whittle_binary_search(arm, s, u, kAvgRewardProxyBeta, L);
                if (!r.bracketed) continue;
                if (std::abs(r.lambda - fw.table.at(s, u)) > 1e-3) {
                    ok = false;
                    log << "  disagreement: arm(" << arm.p_active[0] << ',' << arm.p_active[1]
                        << ',' << arm.p_passive[0] << ',' << arm.p_passive[1] << ") state(" << s
                        << ',' << u << "): oracle " << r.lambda << " fast "
                        << fw.table.at(s, u) << '\n';
                }
            }
            agree += ok;
            ++total;
        }
        std::ostringstream ss;
        ss << "oracle agreement: " << agree << "/" << total << " instances within 1e-3";
        note(ss.str());
        if (!log.str().empty()) os << log.str();
        if (agree < (total * 95 + 99) / 100) out.hard_pass = false;
    }
    return out;
}

}  // namespace fair_rmab
