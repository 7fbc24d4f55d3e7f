#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nbro/wasserstein.hpp"

using namespace nbro;

namespace {

// Independent oracle: Riemann sum of (F_q^{-1}(u) - F_r^{-1}(u))^2 over a
// fine quantile grid, using midpoints to avoid breakpoint ambiguity.
double wd_grid_oracle(const DiscreteDistribution& q, const DiscreteDistribution& r, int grid) {
    double acc = 0.0;
    for (int i = 0; i < grid; ++i) {
        double u = (i + 0.5) / grid;
        double d = q.quantile(u) - r.quantile(u);
        acc += d * d;
    }
    return acc / grid;
}

DiscreteDistribution random_dist(Rng& rng, int atoms) {
    std::vector<double> support, weights;
    double acc = 0.0;
    for (int i = 0; i < atoms; ++i) {
        acc += rng.uniform(0.01, 1.0);
        support.push_back(acc);
        weights.push_back(rng.uniform(0.1, 1.0));
    }
    return {std::move(support), std::move(weights)};
}

}  // namespace

TEST_CASE("point masses give the squared gap") {
    auto a = DiscreteDistribution::point_mass(2.0);
    auto b = DiscreteDistribution::point_mass(5.0);
    CHECK(quadratic_wasserstein(a, b) == doctest::Approx(9.0).epsilon(1e-14));
    CHECK(quadratic_wasserstein(a, a) == doctest::Approx(0.0));
}

TEST_CASE("hand-computed two-atom example") {
    // Q = {0 w.5, 2 w.5}, R = {1 w1}: |F^{-1} gap| = 1 everywhere, squared 1
    DiscreteDistribution q({0.0, 2.0}, {0.5, 0.5});
    auto r = DiscreteDistribution::point_mass(1.0);
    CHECK(quadratic_wasserstein(q, r) == doctest::Approx(1.0).epsilon(1e-14));

    // Q = {0 w.25, 4 w.75}, R = {1 w1}:
    // .25 * (0-1)^2 + .75 * (4-1)^2 = .25 + 6.75 = 7
    DiscreteDistribution q2({0.0, 4.0}, {0.25, 0.75});
    CHECK(quadratic_wasserstein(q2, r) == doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("translation invariance baseline") {
    Rng rng(21);
    auto q = random_dist(rng, 40);
    double c = 3.25;
    std::vector<double> shifted;
    for (double v : q.support()) shifted.push_back(v + c);
    DiscreteDistribution r(shifted, q.weights());
    CHECK(quadratic_wasserstein(q, r) == doctest::Approx(c * c).epsilon(1e-12));
}

TEST_CASE("symmetry") {
    Rng rng(22);
    for (int t = 0; t < 10; ++t) {
        auto q = random_dist(rng, 30);
        auto r = random_dist(rng, 17);
        CHECK(quadratic_wasserstein(q, r) ==
              doctest::Approx(quadratic_wasserstein(r, q)).epsilon(1e-13));
    }
}

TEST_CASE("matches a fine quantile-grid oracle on random pairs") {
    Rng rng(23);
    for (int t = 0; t < 20; ++t) {
        auto q = random_dist(rng, 5 + static_cast<int>(rng.uniform_int(30)));
        auto r = random_dist(rng, 5 + static_cast<int>(rng.uniform_int(30)));
        double exact = quadratic_wasserstein(q, r);
        double oracle = wd_grid_oracle(q, r, 2000000);
        CHECK_LE(std::fabs(exact - oracle), std::max(1e-5, 1e-4 * exact));
    }
}

TEST_CASE("wd cache returns consistent values and grows") {
    Rng rng(24);
    auto q = std::make_shared<DiscreteDistribution>(random_dist(rng, 20));
    auto r = std::make_shared<DiscreteDistribution>(random_dist(rng, 20));
    WdCache cache;
    double direct = quadratic_wasserstein(*q, *r);
    CHECK(cache.distance(q, r) == doctest::Approx(direct).epsilon(1e-15));
    CHECK(cache.size() == 1);
    // reversed order hits the same entry
    CHECK(cache.distance(r, q) == doctest::Approx(direct).epsilon(1e-15));
    CHECK(cache.size() == 1);
    CHECK(cache.distance(q, q) == 0.0);
}

TEST_CASE("wd cache survives address recycling") {
    // fill the cache with a short-lived distribution, free it, then allocate
    // new ones until an address is reused; the stale entry must not be served
    WdCache cache;
    Rng rng(28);
    auto keep = std::make_shared<DiscreteDistribution>(random_dist(rng, 8));
    const DiscreteDistribution* dead_addr;
    double stale;
    {
        auto dying = std::make_shared<DiscreteDistribution>(random_dist(rng, 8));
        dead_addr = dying.get();
        stale = cache.distance(keep, dying);
    }
    for (int attempt = 0; attempt < 10000; ++attempt) {
        auto fresh = std::make_shared<DiscreteDistribution>(random_dist(rng, 8));
        if (fresh.get() == dead_addr) {
            double expect = quadratic_wasserstein(*keep, *fresh);
            CHECK(cache.distance(keep, fresh) == doctest::Approx(expect).epsilon(1e-15));
            CHECK(expect != stale);  // sanity: the values genuinely differ
            return;
        }
    }
    WARN_MESSAGE(true, "allocator never recycled the address; property untested");
}

TEST_CASE("dist correlation uses exp of minus half the scaled wd sum") {
    Rng rng(25);
    auto q = std::make_shared<DiscreteDistribution>(random_dist(rng, 15));
    auto r = std::make_shared<DiscreteDistribution>(random_dist(rng, 15));
    double wd = quadratic_wasserstein(*q, *r);
    Eigen::VectorXd theta(1);
    theta << 2.0;
    DistTuple a{q}, b{r};
    CHECK(dist_correlation(a, b, theta) == doctest::Approx(std::exp(-wd / 8.0)).epsilon(1e-12));

    // a unit wd at unit length scale gives exp(-1/2)
    auto p0 = std::make_shared<DiscreteDistribution>(DiscreteDistribution::point_mass(0.0));
    auto p1 = std::make_shared<DiscreteDistribution>(DiscreteDistribution::point_mass(1.0));
    Eigen::VectorXd unit(1);
    unit << 1.0;
    DistTuple ta{p0}, tb{p1};
    CHECK(dist_correlation(ta, tb, unit) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("design correlation and full pair correlation") {
    Eigen::VectorXd x(2), y(2), theta(2);
    x << 0.0, 0.0;
    y << 1.0, 2.0;
    theta << 1.0, 2.0;
    // exp(-(1/2 + 4/8)) = exp(-1)
    CHECK(design_correlation(x, y, theta) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    Rng rng(26);
    auto q = std::make_shared<DiscreteDistribution>(random_dist(rng, 10));
    auto r = std::make_shared<DiscreteDistribution>(random_dist(rng, 10));
    KernelParams params;
    params.theta_x = theta;
    params.theta_p = Eigen::VectorXd::Ones(1);
    DistTuple ta{q}, tb{r};
    double expected = design_correlation(x, y, theta) * dist_correlation(ta, tb, params.theta_p);
    CHECK(pair_correlation(x, ta, y, tb, params) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pair_correlation(x, ta, x, ta, params) == doctest::Approx(1.0));
}

TEST_CASE("correlation matrices over random point sets are positive semidefinite") {
    Rng rng(27);
    KernelParams params;
    params.theta_x = Eigen::VectorXd::Constant(2, 0.7);
    params.theta_p = Eigen::VectorXd::Constant(1, 1.3);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 15;
        std::vector<Eigen::VectorXd> xs;
        std::vector<DistTuple> ps;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd x(2);
            x << rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0);
            xs.push_back(x);
            ps.push_back({std::make_shared<DiscreteDistribution>(random_dist(rng, 12))});
        }
        Eigen::MatrixXd R(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                R(i, j) = pair_correlation(xs[i], ps[i], xs[j], ps[j], params);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
        CHECK(es.eigenvalues().minCoeff() > -1e-9);
    }
}

TEST_CASE("kernel params validation") {
    KernelParams p;
    p.theta_x = Eigen::VectorXd::Ones(2);
    p.theta_p = Eigen::VectorXd::Ones(1);
    p.tau2 = 1.0;
    CHECK_NOTHROW(p.validate());
    p.tau2 = -1.0;
    CHECK_THROWS(p.validate());
    p.tau2 = 1.0;
    p.theta_x(0) = 0.0;
    CHECK_THROWS(p.validate());
}
