#include "fair_rmab/arm.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fair_rmab {

namespace {

void check_prob(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " out of [0,1]");
    }
}

}  // namespace

ArmParams ArmParams::make(double pa01, double pa11, double pp01, double pp11,
                          bool require_acting_helps) {
    check_prob(pa01, "P^a_{0,1}");
    check_prob(pa11, "P^a_{1,1}");
    check_prob(pp01, "P^p_{0,1}");
    check_prob(pp11, "P^p_{1,1}");
    if (require_acting_helps && !(pa01 > pp01 && pa11 > pp11)) {
        throw std::invalid_argument("acting-helps assumption violated: need P^a_{s,1} > P^p_{s,1}");
    }
    ArmParams a;
    a.p_active = {pa01, pa11};
    a.p_passive = {pp01, pp11};
    return a;
}

ArmParams ArmParams::from_matrices(const std::array<std::array<double, 2>, 2>& active,
                                   const std::array<std::array<double, 2>, 2>& passive,
                                   bool require_acting_helps) {
    for (const auto* m : {&active, &passive}) {
        for (int s = 0; s < 2; ++s) {
            check_prob((*m)[s][0], "matrix entry");
            check_prob((*m)[s][1], "matrix entry");
            if (std::abs((*m)[s][0] + (*m)[s][1] - 1.0) > 1e-12) {
                throw std::invalid_argument("transition matrix row does not sum to 1");
            }
        }
    }
    return make(active[0][1], active[1][1], passive[0][1], passive[1][1], require_acting_helps);
}

double belief_u_step(int s, int u, const ArmParams& arm) {
    if (s != 0 && s != 1) throw std::invalid_argument("belief_u_step: state must be 0 or 1");
    if (u < 1) throw std::invalid_argument("belief_u_step: u must be >= 1");
    const double start = arm.p_active[s];
    const double p01 = arm.p_passive[0];
    const double p11 = arm.p_passive[1];
    const double denom = 1.0 + p01 - p11;
    if (std::abs(denom) < 1e-15) {
        // Absorbing degenerate passive chain: belief is frozen.
        return start;
    }
    // tau^{u-1}(start) via the eigen-decomposition closed form.
    const double r = std::pow(p11 - p01, u - 1);
    return (p01 - r * (p01 - start * denom)) / denom;
}

double stationary_belief(const ArmParams& arm) {
    const double p01 = arm.p_passive[0];
    const double p11 = arm.p_passive[1];
    const double denom = 1.0 + p01 - p11;
    if (std::abs(denom) < 1e-15) {
        throw std::domain_error("stationary_belief: degenerate absorbing passive chain");
    }
    return p01 / denom;
}

ChainClass classify_chain(const ArmParams& arm, double omega0) {
    if (!arm.positively_correlated()) return ChainClass::negatively_correlated;
    return omega0 < stationary_belief(arm) ? ChainClass::increasing : ChainClass::non_increasing;
}

BeliefState BeliefState::make(int s, int u, const ArmParams& arm) {
    BeliefState b;
    b.last_obs = s;
    b.steps_since = u;
    b.belief = belief_u_step(s, u, arm);
    return b;
}

void validate(const InstanceSpec& spec) {
    if (spec.n_arms < 1) throw std::invalid_argument("instance: need at least one arm");
    if (spec.budget < 1 || spec.budget > spec.n_arms) {
        throw std::invalid_argument("instance: budget must satisfy 1 <= k <= N");
    }
    if (!(spec.discount > 0.0 && spec.discount <= 1.0)) {
        throw std::invalid_argument("instance: discount must be in (0,1]");
    }
}

namespace {

ArmParams draw_positive(SplitMix64& rng) {
    const double pp01 = rng.uniform(0.05, 0.45);
    const double pp11 = rng.uniform(pp01 + 0.05, 0.95);
    for (;;) {
        // The active boost is at least 0.05 where the 0.95 cap allows it.
        const double hi0 = 0.95 - pp01;
        const double hi1 = 0.95 - pp11;
        const double pa01 = pp01 + rng.uniform(std::min(0.05, hi0), hi0);
        const double pa11 = pp11 + rng.uniform(std::min(0.05, hi1), hi1);
        if (pa11 >= pa01) return ArmParams::make(pa01, pa11, pp01, pp11);
    }
}

ArmParams draw_negative(SplitMix64& rng) {
    // Mirror of the positive draw with the passive rows swapped, so
    // P^p_{1,1} < P^p_{0,1} while acting still helps. No ordering is imposed
    // on the active row; the positive-case redraw condition can have
    // vanishing acceptance probability here.
    const double pp11 = rng.uniform(0.05, 0.45);
    const double pp01 = rng.uniform(pp11 + 0.05, 0.95);
    const double hi0 = 0.95 - pp01;
    const double hi1 = 0.95 - pp11;
    const double pa01 = pp01 + rng.uniform(std::min(0.05, hi0), hi0);
    const double pa11 = pp11 + rng.uniform(std::min(0.05, hi1), hi1);
    return ArmParams::make(pa01, pa11, pp01, pp11);
}

}  // namespace

std::vector<ArmParams> generate_instance(const InstanceSpec& spec) {
    validate(spec);
    SplitMix64 rng(derive_seed(spec.seed, 0xa53f00d));
    std::vector<ArmParams> arms;
    arms.reserve(spec.n_arms);
    for (int i = 0; i < spec.n_arms; ++i) {
        switch (spec.correlation) {
            case Correlation::positive:
                arms.push_back(draw_positive(rng));
                break;
            case Correlation::negative:
                arms.push_back(draw_negative(rng));
                break;
            case Correlation::mixed:
                arms.push_back(rng.bernoulli(0.5) ? draw_positive(rng) : draw_negative(rng));
                break;
        }
    }
    return arms;
}

void write_arms_csv(std::ostream& out, const std::vector<ArmParams>& arms) {
    out << "arm_id,p_a_01,p_a_11,p_p_01,p_p_11\n";
    out << std::fixed << std::setprecision(6);
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const ArmParams& a = arms[i];
        out << i << ',' << a.p_active[0] << ',' << a.p_active[1] << ',' << a.p_passive[0] << ','
            << a.p_passive[1] << '\n';
    }
}

std::vector<ArmParams> read_arms_csv(std::istream& in) {
    std::vector<ArmParams> arms;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("arms csv: missing header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        double v[5];
        for (int j = 0; j < 5; ++j) {
            if (!std::getline(ls, field, ',')) throw std::runtime_error("arms csv: short row");
            v[j] = std::stod(field);
        }
        arms.push_back(ArmParams::make(v[1], v[2], v[3], v[4], /*require_acting_helps=*/false));
    }
    return arms;
}

std::string to_string(Correlation c) {
    switch (c) {
        case Correlation::positive: return "positive";
        case Correlation::negative: return "negative";
        case Correlation::mixed: return "mixed";
    }
    return "positive";
}

Correlation correlation_from_string(const std::string& s) {
    if (s == "positive") return Correlation::positive;
    if (s == "negative") return Correlation::negative;
    if (s == "mixed") return Correlation::mixed;
    throw std::invalid_argument("unknown correlation class: " + s);
}

}  // namespace fair_rmab
