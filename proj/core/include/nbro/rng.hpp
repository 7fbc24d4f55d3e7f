#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace nbro {

// Deterministic random stream with named-substream derivation.
//
// Every stream remembers the seed it was created from, so substreams can be
// derived at any time without being affected by how much of the parent stream
// has been consumed.  All variate generation is hand-rolled on top of a
// splitmix64/xoshiro-style core so that output is identical across platforms
// and standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Derive an independent stream keyed by (this stream's seed, name, index).
    Rng substream(std::string_view name, std::uint64_t index = 0) const;

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();
    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n);
    double normal();                       // standard normal (inverse-cdf)
    double exponential(double rate);
    double lognormal(double mu, double sigma);
    double gamma(double shape, double rate);
    // Beta(1, b) via inverse cdf: 1 - U^(1/b).
    double beta_one(double b);
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

}  // namespace nbro
