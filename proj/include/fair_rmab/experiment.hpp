#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fair_rmab/sim.hpp"

namespace fair_rmab {

// Flat experiment configuration; file keys and CLI flags share these names.
struct ExperimentConfig {
    int N = 100;
    int k = 10;
    int T = 1000;
    int L = 50;
    int eta = 2;
    double beta = 0.95;
    double gamma = -1.0;   // <0: use beta
    double eps = 0.1;
    double penalty = -0.01;
    int runs = 50;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string correlation = "positive";
    std::vector<std::string> policies;
    std::string out_dir;
    std::string preset;
    std::string index_horizon = "infinite";  // or "finite"

    void validate() const;
};

// Parses a flat key=value file ('#' comments). Unknown keys are rejected.
ExperimentConfig parse_config_file(const std::string& path, ExperimentConfig base);

// One concrete experiment derived from a preset (a preset can expand to
// several, e.g. one per N or per L).
struct PresetJob {
    std::string label;
    ExperimentConfig config;
};
std::vector<PresetJob> expand_preset(const ExperimentConfig& base);

// Per-policy aggregates for one configuration; policies share per-run
// instance and world seeds, so comparisons are paired.
struct ExperimentOutcome {
    std::string label;
    ExperimentConfig config;
    std::map<std::string, Aggregate> by_policy;  // insertion-ordered via vector below
    std::vector<std::string> policy_order;
    std::map<std::string, double> benefit_ratios;  // present when oracle+none ran
    double wall_clock_ms = 0.0;
};

ExperimentOutcome run_policies(const std::string& label, const ExperimentConfig& cfg);

// File outputs: <out>/<label>/aggregate.json, runs.csv, arms_run0.csv.
// aggregate.json and runs.csv are byte-deterministic for a given seed;
// wall-clock goes to the separate timing.json.
void write_outputs(const ExperimentOutcome& outcome, const std::string& out_dir);

// Prints the summary table to the given stream.
void print_summary(std::ostream& os, const ExperimentOutcome& outcome);

// Theorem-level verification suite. Soft checks report rates; hard checks
// (index decay, value bounds, Thm-4 equivalence, oracle agreement) decide
// the exit code.
struct VerifyConfig {
    std::string check = "all";  // all|decay|bounds|thm4|indexability|conditions|oracle
    int instances = 200;
    std::uint64_t seed = 7;
    int jobs = 1;
};
struct VerifyOutcome {
    bool hard_pass = true;
    std::vector<std::string> lines;
};
VerifyOutcome run_verify(const VerifyConfig& cfg, std::ostream& os);

}  // namespace fair_rmab
