#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fair_rmab/experiment.hpp"
#include "fair_rmab/whittle.hpp"

using namespace fair_rmab;

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("FAIR_RMAB_OUT");
    return env != nullptr && *env != '\0' ? env : "out";
}

int cmd_run(ExperimentConfig cfg) {
    if (cfg.out_dir.empty()) cfg.out_dir = default_out_dir();
    for (const PresetJob& job : expand_preset(cfg)) {
        const ExperimentOutcome outcome = run_policies(job.label, job.config);
        write_outputs(outcome, cfg.out_dir);
        print_summary(std::cout, outcome);
    }
    std::cout << "outputs written to " << cfg.out_dir << '\n';
    return 0;
}

int cmd_verify(const VerifyConfig& cfg) {
    const VerifyOutcome out = run_verify(cfg, std::cout);
    std::cout << (out.hard_pass ? "verify: PASS" : "verify: FAIL (hard invariant violated)")
              << '\n';
    return out.hard_pass ? 0 : 3;
}

int cmd_indices(int N, std::uint64_t seed, int L, const std::string& out_path,
                const std::string& correlation) {
    InstanceSpec inst;
    inst.n_arms = N;
    inst.budget = 1;
    inst.horizon = 1;
    inst.seed = seed;
    inst.correlation = correlation_from_string(correlation);
    const std::vector<ArmParams> arms = generate_instance(inst);
    std::vector<IndexTable> tables;
    tables.reserve(arms.size());
    for (const ArmParams& a : arms) tables.push_back(fast_whittle_infinite(a, L).table);
    if (out_path.empty() || out_path == "-") {
        write_index_csv(std::cout, tables);
    } else {
        std::ofstream f(out_path);
        if (!f) {
            std::cerr << "error: cannot write " << out_path << '\n';
            return 2;
        }
        write_index_csv(f, tables);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fairness-constrained restless-bandit planning and simulation"};
    app.require_subcommand(1);

    // The config file provides defaults; explicit flags override it. Loading
    // happens before CLI11 parses so the precedence falls out naturally.
    ExperimentConfig cfg;
    try {
        for (int i = 1; i + 1 < argc; ++i) {
            if (std::strcmp(argv[i], "--config") == 0) {
                cfg = parse_config_file(argv[i + 1], cfg);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    std::string config_path;
    std::vector<std::string> policies_arg;
    CLI::App* run = app.add_subcommand("run", "run experiments and write CSV/JSON outputs");
    run->add_option("--config", config_path, "flat key=value config file (flags win)");
    run->add_option("--preset", cfg.preset,
                    "experiment preset: fig1|fig4|fig5|sensitivity|klevel");
    run->add_option("--policy", policies_arg,
                    "policy names (fawt, fawt-u, fawt-q, whittle, random, myopic, cmyopic, "
                    "oracle, none)");
    run->add_option("--N", cfg.N, "number of arms");
    run->add_option("--k", cfg.k, "per-epoch activation budget");
    run->add_option("--T", cfg.T, "horizon (epochs)");
    run->add_option("--L", cfg.L, "fairness window length");
    run->add_option("--eta", cfg.eta, "minimum activations per window");
    run->add_option("--beta", cfg.beta, "planning discount");
    run->add_option("--gamma", cfg.gamma, "Q-learning discount (default: beta)");
    run->add_option("--eps", cfg.eps, "Q-learning exploration rate");
    run->add_option("--penalty", cfg.penalty, "penalty per violated window");
    run->add_option("--runs", cfg.runs, "independent replications");
    run->add_option("--seed", cfg.seed, "master seed");
    run->add_option("--jobs", cfg.jobs, "parallel workers");
    run->add_option("--correlation", cfg.correlation, "instance class: positive|negative|mixed");
    run->add_option("--index-horizon", cfg.index_horizon, "index source: infinite|finite");
    run->add_option("--out", cfg.out_dir, "output directory (env FAIR_RMAB_OUT)");

    VerifyConfig vcfg;
    CLI::App* verify = app.add_subcommand("verify", "run the theorem/invariant checker suite");
    verify->add_option("--check", vcfg.check,
                       "all|decay|bounds|thm4|indexability|conditions|oracle");
    verify->add_option("--instances", vcfg.instances, "number of random instances");
    verify->add_option("--seed", vcfg.seed, "seed");

    int idx_N = 10;
    std::uint64_t idx_seed = 1;
    int idx_L = 50;
    std::string idx_out;
    std::string idx_corr = "positive";
    CLI::App* indices = app.add_subcommand("indices", "export an instance's index tables as CSV");
    indices->add_option("--N", idx_N, "number of arms");
    indices->add_option("--seed", idx_seed, "instance seed");
    indices->add_option("--L", idx_L, "chain cap / fairness window");
    indices->add_option("--out", idx_out, "output file (default stdout)");
    indices->add_option("--correlation", idx_corr, "positive|negative|mixed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (!policies_arg.empty()) cfg.policies = policies_arg;
            return cmd_run(cfg);
        }
        if (verify->parsed()) return cmd_verify(vcfg);
        if (indices->parsed()) return cmd_indices(idx_N, idx_seed, idx_L, idx_out, idx_corr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
