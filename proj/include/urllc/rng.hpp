#pragma once

#include <cstdint>
#include <random>

namespace urllc {

// splitmix64: used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for drop/block i derived from a master seed. Earlier drops keep their
// seeds when the total drop count changes.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 1));
}

// Named seedable 64-bit generator. Every CLI run logs the seed it was
// constructed with.
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0x5eed5eed5eedULL) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(gen_);
    }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<int>(mean)(gen_);
    }
    // uniform over {0, 1, ..., n-1}
    std::uint64_t uniform_int(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(gen_);
    }
    std::mt19937_64& engine() { return gen_; }

    Rng spawn(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

  private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace urllc
