#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "nbro/rng.hpp"

using nbro::Rng;

TEST_CASE("same seed reproduces the stream") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge") {
    Rng a(123), b(124);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += (a.next_u64() == b.next_u64());
    CHECK(same == 0);
}

TEST_CASE("substreams are independent of parent consumption") {
    Rng a(9);
    Rng sub_before = a.substream("atoms", 3);
    for (int i = 0; i < 50; ++i) a.next_u64();
    Rng sub_after = a.substream("atoms", 3);
    for (int i = 0; i < 20; ++i) CHECK(sub_before.next_u64() == sub_after.next_u64());
}

TEST_CASE("substream names and indices matter") {
    Rng a(9);
    CHECK(a.substream("x").next_u64() != a.substream("y").next_u64());
    CHECK(a.substream("x", 0).next_u64() != a.substream("x", 1).next_u64());
}

TEST_CASE("uniform stays in range with correct mean") {
    Rng r(31);
    double acc = 0.0;
    for (int i = 0; i < 20000; ++i) {
        double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        acc += u;
    }
    CHECK(acc / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("normal moments") {
    Rng r(32);
    double s = 0.0, s2 = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        double z = r.normal();
        s += z;
        s2 += z * z;
    }
    CHECK_LE(std::fabs(s / n), 0.02);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("exponential mean equals 1/rate") {
    Rng r(33);
    double s = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) s += r.exponential(2e-4);
    CHECK(s / n == doctest::Approx(5000.0).epsilon(0.03));
}

TEST_CASE("gamma moments") {
    Rng r(34);
    double s = 0.0, s2 = 0.0;
    const int n = 50000;
    const double shape = 3.0, rate = 2.0;
    for (int i = 0; i < n; ++i) {
        double g = r.gamma(shape, rate);
        s += g;
        s2 += g * g;
    }
    double m = s / n;
    CHECK(m == doctest::Approx(shape / rate).epsilon(0.03));
    CHECK(s2 / n - m * m == doctest::Approx(shape / (rate * rate)).epsilon(0.06));
}

TEST_CASE("beta_one mean equals 1/(1+b)") {
    Rng r(35);
    double s = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) s += r.beta_one(9.0);
    CHECK(s / n == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("permutation is a bijection") {
    Rng r(36);
    auto p = r.permutation(100);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(p[i] == i);
}

TEST_CASE("uniform_int covers the range without bias") {
    Rng r(37);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 70000; ++i) counts[static_cast<std::size_t>(r.uniform_int(7))]++;
    for (int c : counts) CHECK(c == doctest::Approx(10000).epsilon(0.06));
}
