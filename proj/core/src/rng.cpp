#include "nbro/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "nbro/stats.hpp"

namespace nbro {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
}

Rng Rng::substream(std::string_view name, std::uint64_t index) const {
    std::uint64_t h = fnv1a(name);
    std::uint64_t x = seed_ ^ rotl(h, 17) ^ (index * 0xd1342543de82ef95ULL + 1);
    // one mixing round so adjacent indices do not produce correlated seeds
    return Rng(splitmix64(x));
}

std::uint64_t Rng::next_u64() {
    // xoshiro256**
    std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    // rejection sampling on the top bits to avoid modulo bias
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    double u;
    do {
        u = uniform();
    } while (u <= 0.0);
    return stats::normal_quantile(u);
}

double Rng::exponential(double rate) {
    double u;
    do {
        u = uniform();
    } while (u <= 0.0);
    return -std::log(u) / rate;
}

double Rng::lognormal(double mu, double sigma) {
    return std::exp(mu + sigma * normal());
}

double Rng::gamma(double shape, double rate) {
    // Marsaglia-Tsang; shape < 1 boosted via the U^(1/shape) identity.
    if (shape < 1.0) {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z = normal();
        double v = 1.0 + c * z;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = uniform();
        if (u <= 0.0) continue;
        if (std::log(u) < 0.5 * z * z + d - d * v + d * std::log(v)) {
            return d * v / rate;
        }
    }
}

double Rng::beta_one(double b) {
    double u;
    do {
        u = uniform();
    } while (u <= 0.0);
    return 1.0 - std::pow(u, 1.0 / b);
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = uniform_int(i);
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

}  // namespace nbro
