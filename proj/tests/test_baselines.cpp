#include <doctest.h>

#include <cmath>

#include "nbro/baselines.hpp"
#include "nbro/stats.hpp"

using namespace nbro;

TEST_CASE("exponential posterior is gamma(n, sum)") {
    std::vector<double> data{1.0, 3.0};
    auto post = pb_posterior(ParametricPosterior::Family::exponential, data);
    CHECK(post.shape == 2.0);
    CHECK(post.rate == 4.0);
    CHECK_THROWS(pb_posterior(ParametricPosterior::Family::exponential, std::vector<double>{}));
    CHECK_THROWS(
        pb_posterior(ParametricPosterior::Family::exponential, std::vector<double>{1.0, -2.0}));
}

TEST_CASE("lognormal posterior is normal-inverse-gamma on the logs") {
    const double e1 = std::exp(1.0), e3 = std::exp(3.0);
    std::vector<double> data{e1, e3};
    auto post = pb_posterior(ParametricPosterior::Family::lognormal, data);
    CHECK(post.m == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(post.kappa == 2.0);
    CHECK(post.a == doctest::Approx(0.5));
    CHECK(post.b == doctest::Approx(1.0).epsilon(1e-12));  // half of (1^2 + 1^2)
    CHECK_THROWS(pb_posterior(ParametricPosterior::Family::lognormal, std::vector<double>{e1}));
}

TEST_CASE("exponential posterior matches jeffreys bayes rule on a grid") {
    // posterior density prop to likelihood / lambda; compare the normalized
    // numeric density with the closed-form gamma on a lambda grid
    std::vector<double> data{0.7, 1.9, 0.4, 1.1};
    double sum = 0.0;
    for (double v : data) sum += v;
    auto post = pb_posterior(ParametricPosterior::Family::exponential, data);
    auto unnorm = [&](double lam) {
        double loglik = 0.0;
        for (double v : data) loglik += std::log(lam) - lam * v;
        return std::exp(loglik) / lam;
    };
    auto gamma_pdf = [&](double lam) {
        return std::pow(post.rate, post.shape) / std::tgamma(post.shape) *
               std::pow(lam, post.shape - 1.0) * std::exp(-post.rate * lam);
    };
    const int grid = 4000;
    const double lo = 1e-4, hi = 8.0, h = (hi - lo) / grid;
    double z = 0.0;
    for (int i = 0; i <= grid; ++i) {
        double f = unnorm(lo + i * h);
        z += (i == 0 || i == grid) ? 0.5 * f : f;
    }
    z *= h;
    for (double lam : {0.3, 0.9, 1.5, 3.0}) {
        CHECK(unnorm(lam) / z == doctest::Approx(gamma_pdf(lam)).epsilon(1e-3));
    }
}

TEST_CASE("posterior draws concentrate with plentiful data") {
    Rng gen(201);
    std::vector<double> data;
    for (int i = 0; i < 5000; ++i) data.push_back(gen.exponential(2.0));
    auto post = pb_posterior(ParametricPosterior::Family::exponential, data);
    Rng rng(202);
    double acc = 0.0;
    const int draws = 50;
    for (int i = 0; i < draws; ++i) acc += pb_sample_distribution(post, rng, 2000).mean();
    // the true mean is 1/2; discretization plus posterior spread stay small
    CHECK(acc / draws == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("lognormal draws have positive support and finite moments") {
    Rng gen(203);
    std::vector<double> data;
    for (int i = 0; i < 500; ++i) data.push_back(gen.lognormal(1.0, 0.4));
    auto post = pb_posterior(ParametricPosterior::Family::lognormal, data);
    Rng rng(204);
    for (int i = 0; i < 10; ++i) {
        auto d = pb_sample_distribution(post, rng, 500);
        CHECK(d.support().front() > 0.0);
        CHECK(std::isfinite(d.mean()));
        CHECK(d.mean() == doctest::Approx(std::exp(1.0 + 0.08)).epsilon(0.25));
    }
}

TEST_CASE("pb sampling is deterministic per generator state") {
    std::vector<double> data{0.5, 1.5, 2.5};
    auto post = pb_posterior(ParametricPosterior::Family::exponential, data);
    Rng a(205), b(205);
    CHECK(pb_sample_distribution(post, a, 100) == pb_sample_distribution(post, b, 100));
}

namespace {

// quadratic loss against the tuple mean, shared by the method-runner tests
Simulator toy_sim(double noise_sd) {
    return [noise_sd](const Eigen::VectorXd& x, const DistTuple& p, Rng& rng) {
        double d = x(0) - p[0]->mean();
        return d * d + noise_sd * rng.normal();
    };
}

RealWorldData toy_data() {
    RealWorldData data;
    data.names = {"input"};
    Rng gen(206);
    std::vector<double> col;
    for (int i = 0; i < 40; ++i) col.push_back(gen.exponential(1.0));
    data.columns.push_back(std::move(col));
    return data;
}

EgoConfig tiny_cfg() {
    EgoConfig cfg;
    cfg.s0 = 5;
    cfg.budget = 10;
    cfg.reps = 4;
    cfg.n_mc = 10;
    cfg.truncation = 80;
    cfg.n_fresh = 3;
    cfg.n_rand = 100;
    cfg.refine_top = 2;
    cfg.refine_iters = 10;
    cfg.restarts = 2;
    return cfg;
}

DesignSpace toy_space() {
    Eigen::VectorXd lo(1), hi(1);
    lo << 0.0;
    hi << 4.0;
    return DesignSpace::box(lo, hi);
}

}  // namespace

TEST_CASE("plug-in runs freeze the input tuple at the empirical distribution") {
    auto data = toy_data();
    auto res = plugin_optimize(toy_space(), toy_sim(0.02), data, tiny_cfg(), Rng(207));
    auto empirical = DiscreteDistribution::empirical(data.columns[0]);
    REQUIRE(!res.state.history.empty());
    const auto* first = res.state.history.front().dists[0].get();
    for (const auto& rec : res.state.history) {
        REQUIRE(rec.dists.size() == 1);
        CHECK(rec.dists[0].get() == first);  // one shared object throughout
    }
    CHECK(*first == empirical);
}

TEST_CASE("the three method runners share the initial design") {
    auto data = toy_data();
    auto cfg = tiny_cfg();
    auto space = toy_space();
    Rng root(208);
    auto a = nbro_optimize(space, toy_sim(0.02), data, cfg, root);
    auto b = plugin_optimize(space, toy_sim(0.02), data, cfg, root);
    auto c = pb_optimize(space, toy_sim(0.02), data, ParametricPosterior::Family::exponential,
                         cfg, root, 200);
    for (int i = 0; i < cfg.s0; ++i) {
        CHECK(a.state.history[static_cast<std::size_t>(i)].x ==
              b.state.history[static_cast<std::size_t>(i)].x);
        CHECK(a.state.history[static_cast<std::size_t>(i)].x ==
              c.state.history[static_cast<std::size_t>(i)].x);
    }
}

TEST_CASE("method runners are reproducible and land near the toy optimum") {
    auto data = toy_data();
    auto cfg = tiny_cfg();
    cfg.budget = 16;
    auto space = toy_space();
    auto r1 = nbro_optimize(space, toy_sim(0.02), data, cfg, Rng(209));
    auto r2 = nbro_optimize(space, toy_sim(0.02), data, cfg, Rng(209));
    CHECK(r1.x_hat == r2.x_hat);
    CHECK(r1.mu_hat == r2.mu_hat);
    // the optimum sits near the posterior expected input mean, well inside [0, 4]
    CHECK(r1.x_hat(0) > 0.2);
    CHECK(r1.x_hat(0) < 2.5);
}
