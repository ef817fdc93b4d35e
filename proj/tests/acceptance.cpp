// Acceptance suite: one line per criterion, exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fair_rmab/checks.hpp"
#include "fair_rmab/experiment.hpp"
#include "fair_rmab/sim.hpp"
#include "fair_rmab/whittle.hpp"

using namespace fair_rmab;
namespace fs = std::filesystem;
using clk = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int idx, bool pass, const std::string& detail, double seconds) {
    if (!pass) ++failures;
    std::printf("[%2d] %s %s (%.1f s)\n", idx, pass ? "PASS" : "FAIL", detail.c_str(), seconds);
    std::fflush(stdout);
}

int jobs() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 2 : static_cast<int>(hc);
}

ExperimentSpec base_spec(int N, int k, int T, int L, int eta, double penalty,
                         const std::string& policy) {
    ExperimentSpec es;
    es.instance.n_arms = N;
    es.instance.budget = k;
    es.instance.horizon = T;
    es.instance.seed = 20240811;
    es.policy_name = policy;
    es.policy.budget = k;
    es.policy.beta = 0.95;
    es.policy.total_horizon = T;
    es.fairness = FairnessSpec{eta, L, {}};
    es.run.horizon = T;
    es.run.penalty_per_violation = penalty;
    es.runs = 50;
    es.seed = 4242;
    es.jobs = jobs();
    return es;
}

struct PairedDiff {
    double mean = 0.0;
    double stderr_ = 0.0;
    bool significant() const { return mean > 2.0 * stderr_; }
};

PairedDiff paired_diff(const Aggregate& hi, const Aggregate& lo) {
    PairedDiff d;
    const int n = hi.runs;
    double sum = 0.0, sum_sq = 0.0;
    for (int r = 0; r < n; ++r) {
        const double x = hi.per_run[r].avg_reward - lo.per_run[r].avg_reward;
        sum += x;
        sum_sq += x * x;
    }
    d.mean = sum / n;
    if (n > 1) {
        const double var = (sum_sq - sum * sum / n) / (n - 1.0);
        d.stderr_ = std::sqrt(std::max(0.0, var) / n);
    }
    return d;
}

std::vector<ArmParams> acceptance_instances(int count, std::uint64_t seed) {
    InstanceSpec inst;
    inst.n_arms = count;
    inst.budget = 1;
    inst.horizon = 1;
    inst.seed = seed;
    return generate_instance(inst);
}

void criterion1() {
    const auto t0 = clk::now();
    ExperimentSpec wh = base_spec(100, 10, 1000, 50, 2, 0.0, "whittle");
    const Aggregate w = run_experiment(wh);
    ExperimentSpec fa = wh;
    fa.policy_name = "fawt";
    const Aggregate f = run_experiment(fa);

    const long pooled_arms = 100L * w.runs;
    const double zero_frac = static_cast<double>(w.activation_histogram[0]) / pooled_arms;
    long min_act = 1000000;
    for (const RunMetrics& m : f.per_run) {
        for (long c : m.activation_counts) min_act = std::min(min_act, c);
    }
    const bool pass = zero_frac >= 0.40 && f.total_violations == 0 && min_act >= 10;
    std::ostringstream ss;
    ss << "fig1 starvation/repair: whittle zero-activation " << zero_frac * 100.0
       << "% (need >=40%); fawt violations " << f.total_violations << " (need 0); fawt min "
       << "activations " << min_act << " (need >=10)";
    report(1, pass, ss.str(), std::chrono::duration<double>(clk::now() - t0).count());
}

void criterion2() {
    const auto t0 = clk::now();
    bool pass = true;
    std::ostringstream ss;
    ss << "fig4 ordering (paired 2-SE):";
    for (int N : {50, 100}) {
        const int k = N / 10;
        ExperimentSpec es = base_spec(N, k, 1000, 20, 2, -0.01, "oracle");
        const Aggregate oracle = run_experiment(es);
        es.policy_name = "fawt";
        const Aggregate fawt = run_experiment(es);
        es.policy_name = "random";
        const Aggregate random = run_experiment(es);
        es.policy_name = "myopic";
        const Aggregate myopic = run_experiment(es);

        const PairedDiff of = paired_diff(oracle, fawt);
        const PairedDiff fr = paired_diff(fawt, random);
        const PairedDiff fm = paired_diff(fawt, myopic);
        pass = pass && of.significant() && fr.significant() && fm.significant();
        ss << " N=" << N << ": oracle-fawt " << of.mean << "+-" << of.stderr_
           << (of.significant() ? " ok" : " VIOLATED") << ", fawt-random " << fr.mean << "+-"
           << fr.stderr_ << (fr.significant() ? " ok" : " VIOLATED") << ", fawt-myopic "
           << fm.mean << "+-" << fm.stderr_ << (fm.significant() ? " ok" : " VIOLATED") << ";";
    }
    report(2, pass, ss.str(), std::chrono::duration<double>(clk::now() - t0).count());
}

void criterion3() {
    const auto t0 = clk::now();
    double fawt_ratio[3], cmyopic_ratio[3];
    const int Ls[3] = {15, 30, 50};
    for (int i = 0; i < 3; ++i) {
        ExperimentSpec es = base_spec(100, 10, 1000, Ls[i], 2, 0.0, "oracle");
        const Aggregate oracle = run_experiment(es);
        es.policy_name = "none";
        const Aggregate none = run_experiment(es);
        es.policy_name = "fawt";
        const Aggregate fawt = run_experiment(es);
        es.policy_name = "cmyopic";
        const Aggregate cmyo = run_experiment(es);
        fawt_ratio[i] = benefit_ratio(fawt.mean_avg_reward, none.mean_avg_reward,
                                      oracle.mean_avg_reward);
        cmyopic_ratio[i] = benefit_ratio(cmyo.mean_avg_reward, none.mean_avg_reward,
                                         oracle.mean_avg_reward);
    }
    const bool monotone = fawt_ratio[0] <= fawt_ratio[1] && fawt_ratio[1] <= fawt_ratio[2];
    const bool beats = fawt_ratio[1] >= cmyopic_ratio[1] && fawt_ratio[2] >= cmyopic_ratio[2];
    std::ostringstream ss;
    ss << "fig5 benefit ratios: fawt " << fawt_ratio[0] << " -> " << fawt_ratio[1] << " -> "
       << fawt_ratio[2] << "% (non-decreasing " << (monotone ? "ok" : "VIOLATED")
       << "); cmyopic at L=30,50: " << cmyopic_ratio[1] << "%, " << cmyopic_ratio[2]
       << "% (fawt >= cmyopic " << (beats ? "ok" : "VIOLATED") << ")";
    report(3, monotone && beats, ss.str(),
           std::chrono::duration<double>(clk::now() - t0).count());
}

void criterion4() {
    const auto t0 = clk::now();
    const auto arms = acceptance_instances(200, 911);
    std::vector<double> grid;
    for (int i = 0; i < 200; ++i) grid.push_back(-2.0 + 4.0 * i / 199.0);
    int eligible = 0, bad = 0;
    std::string example;
    for (const ArmParams& a : arms) {
        if (!check_indexability(a, grid, 0.95, 10).pass) continue;
        ++eligible;
        bool arm_bad = false;
        for (int s = 0; s < 2 && !arm_bad; ++s) {
            for (int u = 1; u <= 5 && !arm_bad; ++u) {
                double prev = 0.0;
                for (int T = 1; T <= 7; ++T) {
                    const BisectionResult r = exact_finite_whittle(a, s, u, 0.95, T, 1e-10, 300);
                    const bool positive = T > 6 || r.lambda > 0.0;
                    if (!r.bracketed || r.lambda <= prev || !positive) {
                        arm_bad = true;
                        if (example.empty()) {
                            std::ostringstream ex;
                            ex << " e.g. arm(" << a.p_active[0] << ',' << a.p_active[1] << ','
                               << a.p_passive[0] << ',' << a.p_passive[1] << ") state(" << s
                               << ',' << u << ") T=" << T << ": " << r.lambda << " <= " << prev;
                            example = ex.str();
                        }
                        break;
                    }
                    prev = r.lambda;
                }
            }
        }
        bad += arm_bad;
    }
    std::ostringstream ss;
    ss << "index decay: " << bad << "/" << eligible
       << " indexable instances violate strict decay (need 0)." << example;
    report(4, bad == 0, ss.str(), std::chrono::duration<double>(clk::now() - t0).count());
}

void criterion5() {
    const auto t0 = clk::now();
    SplitMix64 rng(515);
    const auto arms = acceptance_instances(1000, 515);
    int bad = 0, degenerate = 0;
    double worst_w1 = 0.0;
    for (const ArmParams& a : arms) {
        const int L = 30;
        const FastWhittleResult fw = fast_whittle_infinite(a, L);
        const int s = static_cast<int>(rng.uniform_int(2));
        const int u = 1 + static_cast<int>(rng.uniform_int(L));
        const double omega = belief_u_step(s, u, a);
        const double tw = fw.table.at(s, u);
        const double beta = 0.95;
        const double w1 = w1_index(a, omega, beta);
        const FiniteWhittleValue w0v = finite_whittle(a, omega, beta, 0.0, tw);
        const FiniteWhittleValue w1v = finite_whittle(a, omega, beta, 1.0, tw);
        const FiniteWhittleValue winf = finite_whittle(a, omega, beta, 1e6, tw);
        if (w1v.fit != FiniteWhittleValue::Fit::logistic) ++degenerate;
        const bool ok = w0v.value == 0.0 && std::abs(w1v.value - w1) <= 1e-12 &&
                        std::abs(winf.value - tw) <= 1e-6;
        worst_w1 = std::max(worst_w1, std::abs(w1v.value - w1));
        bad += !ok;
    }
    std::ostringstream ss;
    ss << "finite-index anchors on 1000 pairs: " << bad << " failures (worst W_1 error "
       << worst_w1 << ", degenerate fits " << degenerate << ")";
    report(5, bad == 0, ss.str(), std::chrono::duration<double>(clk::now() - t0).count());
}

void criterion6() {
    const auto t0 = clk::now();
    const auto arms = acceptance_instances(200, 616);
    long violations = 0, checked = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        for (int T = 2; T <= 6; ++T) {
            const ValueBoundReport rep =
                check_value_bounds(arms[i], 0.95, T, 20, derive_seed(616, i * 7 + T));
            violations += rep.violations;
            checked += rep.pairs_checked;
            worst = std::max(worst, rep.max_violation);
        }
        const ValueBoundReport inf =
            check_value_bounds_infinite(arms[i], 0.95, 20, derive_seed(616, i));
        violations += inf.violations;
        checked += inf.pairs_checked;
        worst = std::max(worst, inf.max_violation);
    }
    std::ostringstream ss;
    ss << "value-difference bounds: " << violations << " violations beyond 1e-8 across "
       << checked << " checks (max excess " << worst << ")";
    report(6, violations == 0, ss.str(), std::chrono::duration<double>(clk::now() - t0).count());
}

void criterion7() {
    const auto t0 = clk::now();
    SplitMix64 rng(717);
    int bad = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(7));
        const int k = 1 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        std::vector<QPair> qs(static_cast<std::size_t>(n));
        for (QPair& q : qs) {
            q.q_active = rng.uniform(-1.0, 1.0);
            q.q_passive = rng.uniform(-1.0, 1.0);
        }
        bad += !topk_equals_argmax_check(qs, k);
    }
    std::ostringstream ss;
    ss << "top-k equals exhaustive argmax: " << bad << "/500 failures";
    report(7, bad == 0, ss.str(), std::chrono::duration<double>(clk::now() - t0).count());
}

void criterion8() {
    const auto t0 = clk::now();
    const auto arms = acceptance_instances(200, 818);
    const int L = 40;
    int agree = 0;
    std::ostringstream log;
    for (const ArmParams& a : arms) {
        const FastWhittleResult fw = fast_whittle_infinite(a, L);
        bool ok = true;
        for (const auto& [s, u] : {std::pair{0, 1}, {1, 1}, {0, 2}, {1, 2}, {0, 5}, {1, 5}}) {
            const BisectionResult r = whittle_binary_search(a, s, u, kAvgRewardProxyBeta, L);
            if (!r.bracketed) continue;
            if (std::abs(r.lambda - fw.table.at(s, u)) > 1e-3) {
                ok = false;
                log << "   arm(" << a.p_active[0] << ',' << a.p_active[1] << ','
                    << a.p_passive[0] << ',' << a.p_passive[1] << ") (" << s << ',' << u
                    << "): oracle " << r.lambda << " fast " << fw.table.at(s, u) << "\n";
            }
        }
        agree += ok;
    }
    std::ostringstream ss;
    ss << "fast index vs bisection oracle: " << agree << "/200 agree within 1e-3 (need >=190)";
    report(8, agree >= 190, ss.str(), std::chrono::duration<double>(clk::now() - t0).count());
    if (log.tellp() > 0) std::fputs(log.str().c_str(), stdout);
}

void criterion9() {
    const auto t0 = clk::now();
    SplitMix64 rng(919);
    long bad_streams = 0;
    const int streams = 10000;
    for (int trial = 0; trial < streams; ++trial) {
        const int eta = 1 + static_cast<int>(rng.uniform_int(3));
        const int L = std::max(eta + 1, 5 + static_cast<int>(rng.uniform_int(56)));
        const int N = 3 + static_cast<int>(rng.uniform_int(8));
        const int T = 2 * L + static_cast<int>(rng.uniform_int(2 * L));
        const FairnessSpec spec{eta, L, {}};
        FairnessTracker tr(spec, N);
        std::vector<std::vector<int>> log;
        log.reserve(static_cast<std::size_t>(T));
        for (int t = 1; t <= T; ++t) {
            const std::vector<int> urgent = tr.urgent_units();
            std::set<int> acts(urgent.begin(), urgent.end());
            for (int i = 0; i < N; ++i) {
                if (rng.bernoulli(0.1)) acts.insert(i);
            }
            std::vector<int> av(acts.begin(), acts.end());
            tr.record(t, av);
            log.push_back(av);
        }
        bad_streams += !audit(log, spec, N).empty();
    }
    std::ostringstream ss;
    ss << "fairness soundness: " << bad_streams << "/" << streams
       << " honored streams produced audit violations (need 0)";
    report(9, bad_streams == 0, ss.str(), std::chrono::duration<double>(clk::now() - t0).count());
}

void criterion10() {
    const auto t0 = clk::now();
#ifdef FAIR_RMAB_CLI_PATH
    const std::string cli = FAIR_RMAB_CLI_PATH;
#else
    const std::string cli = "./fair-rmab";
#endif
    const fs::path base = fs::temp_directory_path() / "fair_rmab_accept10";
    std::error_code ec;
    fs::remove_all(base, ec);
    const std::string common =
        " run --policy fawt random --N 20 --k 2 --T 300 --L 10 --eta 1 --runs 6 --seed 31415";
    const std::string cmd1 =
        cli + common + " --jobs 1 --out " + (base / "serial").string() + " > /dev/null";
    const std::string cmd2 =
        cli + common + " --jobs 4 --out " + (base / "parallel").string() + " > /dev/null";
    bool pass = std::system(cmd1.c_str()) == 0 && std::system(cmd2.c_str()) == 0;
    std::string detail;
    for (const char* f : {"run/aggregate.json", "run/runs.csv", "run/arms_run0.csv"}) {
        std::ifstream a(base / "serial" / f, std::ios::binary);
        std::ifstream b(base / "parallel" / f, std::ios::binary);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        if (sa.str().empty() || sa.str() != sb.str()) {
            pass = false;
            detail += std::string(" mismatch:") + f;
        }
    }
    std::ostringstream ss;
    ss << "reproducibility: serial vs --jobs 4 CLI outputs byte-identical" << detail;
    report(10, pass, ss.str(), std::chrono::duration<double>(clk::now() - t0).count());
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    std::printf("acceptance: %d/10 criteria passed\n", 10 - failures);
    return failures;
}
