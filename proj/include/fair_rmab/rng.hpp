#pragma once

#include <cstdint>
#include <vector>

namespace fair_rmab {

// SplitMix64 generator. Chosen over std::mt19937 because its output is
// fully specified by the algorithm, so seeded streams reproduce bit-exactly
// across platforms and standard-library versions (instance CSVs are pinned
// across languages).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n). Rejection sampling to avoid modulo bias.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return next_double() < p; }

    // k distinct values from {0,...,n-1} via partial Fisher-Yates, ascending.
    std::vector<int> sample_without_replacement(int n, int k);

    // Gamma(shape, 1) via Marsaglia-Tsang; Beta via two gammas.
    double gamma(double shape);
    double beta(double alpha, double beta_shape);

private:
    std::uint64_t state_;
};

// Stream derivation: decorrelates per-run / per-component substreams from a
// single master seed. run i uses derive_seed(master, i).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace fair_rmab
