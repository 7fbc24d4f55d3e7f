#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "nbro/distribution.hpp"

using namespace nbro;

TEST_CASE("construction merges duplicates and drops zero weights") {
    DiscreteDistribution d({3.0, 1.0, 3.0, 2.0}, {0.25, 0.25, 0.25, 0.25});
    CHECK(d.size() == 3);
    CHECK(d.support() == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(d.weights()[2] == doctest::Approx(0.5));

    DiscreteDistribution z({1.0, 2.0}, {1.0, 0.0});
    CHECK(z.size() == 1);
    CHECK(z.support()[0] == 1.0);
}

TEST_CASE("weights normalize and cumulative ends at one") {
    DiscreteDistribution d({1.0, 2.0, 5.0}, {2.0, 3.0, 5.0});
    double sum = 0.0;
    for (double w : d.weights()) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(d.cumulative().back() == 1.0);
}

TEST_CASE("empirical distribution counts multiplicities") {
    std::vector<double> data{1.0, 1.0, 3.0};
    auto d = DiscreteDistribution::empirical(data);
    CHECK(d.support() == std::vector<double>{1.0, 3.0});
    CHECK(d.weights()[0] == doctest::Approx(2.0 / 3.0));
    std::vector<double> single{7.0};
    auto p = DiscreteDistribution::empirical(single);
    CHECK(p.size() == 1);
    CHECK(p.mean() == 7.0);
    std::vector<double> empty;
    CHECK_THROWS(DiscreteDistribution::empirical(empty));
}

TEST_CASE("mean variance cdf quantile of a simple distribution") {
    DiscreteDistribution d({0.0, 1.0}, {0.5, 0.5});
    CHECK(d.mean() == doctest::Approx(0.5));
    CHECK(d.variance() == doctest::Approx(0.25));
    CHECK(d.cdf(0.0) == doctest::Approx(0.5));
    CHECK(d.cdf(-0.1) == 0.0);
    CHECK(d.cdf(2.0) == 1.0);
    CHECK(d.quantile(0.25) == 0.0);
    CHECK(d.quantile(0.75) == 1.0);
}

TEST_CASE("sampling follows the weights") {
    DiscreteDistribution d({0.0, 1.0}, {0.2, 0.8});
    Rng rng(17);
    double acc = 0.0;
    for (int i = 0; i < 20000; ++i) acc += d.sample(rng);
    CHECK(acc / 20000 == doctest::Approx(0.8).epsilon(0.03));
}

TEST_CASE("dp posterior concentration and base mixture") {
    auto post = dp_posterior(1.0, BaseDistribution::uniform(0.0, 10.0), {2.0});
    CHECK(post.concentration() == 2.0);
    // (1 * 0.5 + 1) / 2
    CHECK(post.base_mixture_cdf(5.0) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(post.base_mixture_cdf(-100.0) == doctest::Approx(0.0));
    CHECK(post.base_mixture_cdf(1e9) == doctest::Approx(1.0));
}

TEST_CASE("dp posterior rejects bad arguments") {
    CHECK_THROWS(dp_posterior(0.0, BaseDistribution::uniform(0, 1), {1.0}));
    CHECK_THROWS(dp_posterior(-1.0, BaseDistribution::uniform(0, 1), {1.0}));
    CHECK_THROWS(dp_posterior(5.0, BaseDistribution::uniform(0, 1), {}));
}

TEST_CASE("base mixture cdf with exponential base") {
    auto post = dp_posterior(2.0, BaseDistribution::exponential(1.0), {0.5, 1.5});
    double expected = (2.0 * (1.0 - std::exp(-1.0)) + 1.0) / 4.0;
    CHECK(post.base_mixture_cdf(1.0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("stick-breaking draw basics") {
    auto post = dp_posterior(1.0, BaseDistribution::uniform(0.0, 10.0), {2.0, 7.0});
    Rng rng(3);
    auto one = post.sample_distribution(1, rng);
    CHECK(one.size() == 1);
    CHECK(one.weights()[0] == doctest::Approx(1.0));

    auto d = post.sample_distribution(500, rng);
    CHECK(d.size() <= 500);
    double sum = 0.0;
    for (double w : d.weights()) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t i = 1; i < d.support().size(); ++i)
        CHECK(d.support()[i] > d.support()[i - 1]);
}

TEST_CASE("stick-breaking draws average to the posterior base") {
    std::vector<double> data;
    Rng gen(11);
    for (int i = 0; i < 50; ++i) data.push_back(gen.uniform(0.0, 10.0));
    auto post = dp_posterior(1.0, BaseDistribution::uniform(0.0, 10.0), data);
    Rng rng(4);
    const int draws = 2000;
    for (double t : {2.5, 5.0, 8.0}) {
        double acc = 0.0;
        Rng local = rng.substream("t", static_cast<std::uint64_t>(t * 10));
        for (int i = 0; i < draws; ++i) acc += post.sample_distribution(200, local).cdf(t);
        CHECK_LE(std::fabs(acc / draws - post.base_mixture_cdf(t)), 0.02);
    }
}

TEST_CASE("stick-breaking is deterministic per seed") {
    auto post = dp_posterior(1.0, BaseDistribution::uniform(0.0, 1.0), {0.5});
    Rng a(99), b(99);
    auto da = post.sample_distribution(100, a);
    auto db = post.sample_distribution(100, b);
    CHECK(da == db);
}

TEST_CASE("product posterior draws fresh independent tuples") {
    std::vector<DPPosterior> comps;
    comps.push_back(dp_posterior(1.0, BaseDistribution::uniform(0.0, 1.0), {0.5}));
    comps.push_back(dp_posterior(1.0, BaseDistribution::uniform(0.0, 2.0), {1.0}));
    ProductPosterior post(std::move(comps));
    Rng rng(12);
    auto t1 = post.sample(50, rng);
    auto t2 = post.sample(50, rng);
    CHECK(t1.size() == 2);
    CHECK_FALSE(*t1[0] == *t2[0]);  // fresh draw on the second call
    Rng rng2(12);
    auto t1b = post.sample(50, rng2);
    CHECK(*t1[0] == *t1b[0]);
    CHECK(*t1[1] == *t1b[1]);
}

TEST_CASE("closed form objective: linear and quadratic hand values") {
    {
        std::vector<DPPosterior> comps;
        comps.push_back(dp_posterior(1.0, BaseDistribution::uniform(0.0, 2.0), {4.0}));
        ProductPosterior post(std::move(comps));
        double v = nbro_objective_closed_form(post, [](double xi) { return xi; });
        CHECK(v == doctest::Approx(2.5).epsilon(1e-8));
    }
    {
        std::vector<DPPosterior> comps;
        comps.push_back(dp_posterior(2.0, BaseDistribution::uniform(0.0, 1.0), {1.0, 2.0}));
        ProductPosterior post(std::move(comps));
        double v = nbro_objective_closed_form(post, [](double xi) { return xi * xi; });
        CHECK(v == doctest::Approx(17.0 / 12.0).epsilon(1e-8));
    }
}

TEST_CASE("closed form objective rejects multi-dimensional posteriors") {
    std::vector<DPPosterior> comps;
    comps.push_back(dp_posterior(1.0, BaseDistribution::uniform(0.0, 1.0), {0.5}));
    comps.push_back(dp_posterior(1.0, BaseDistribution::uniform(0.0, 1.0), {0.5}));
    ProductPosterior post(std::move(comps));
    CHECK_THROWS(nbro_objective_closed_form(post, [](double xi) { return xi; }));
}

TEST_CASE("closed form objective with a discrete base is an exact sum") {
    std::vector<DPPosterior> comps;
    comps.push_back(dp_posterior(
        1.0, BaseDistribution::discrete(DiscreteDistribution({1.0, 3.0}, {0.5, 0.5})), {2.0}));
    ProductPosterior post(std::move(comps));
    double v = nbro_objective_closed_form(post, [](double xi) { return xi; });
    CHECK(v == doctest::Approx(0.5 * 2.0 + 0.5 * 2.0).epsilon(1e-14));
}

TEST_CASE("csv round trip") {
    RealWorldData data;
    data.names = {"a", "b"};
    data.columns = {{1.5, 2.25, 1.0 / 3.0}, {4.0, 5.0, 6.0}};
    auto path = std::filesystem::temp_directory_path() / "nbro_test_data.csv";
    data.write_csv(path.string());
    auto loaded = RealWorldData::read_csv(path.string());
    CHECK(loaded.names == data.names);
    REQUIRE(loaded.dims() == 2);
    REQUIRE(loaded.n() == 3);
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < 3; ++i) CHECK(loaded.columns[j][i] == data.columns[j][i]);
    std::filesystem::remove(path);
}

TEST_CASE("default posterior uses alpha one and uniform base to the column max") {
    RealWorldData data;
    data.names = {"demand"};
    data.columns = {{2.0, 8.0, 4.0}};
    auto post = default_posterior(data);
    REQUIRE(post.dims() == 1);
    CHECK(post.components()[0].alpha() == 1.0);
    CHECK(post.components()[0].concentration() == 4.0);
    // base cdf at the max must be 1: mixture cdf at 8 = (1 * 1 + 3) / 4
    CHECK(post.components()[0].base_mixture_cdf(8.0) == doctest::Approx(1.0));
    CHECK(post.components()[0].base_mixture_cdf(4.0) ==
          doctest::Approx((0.5 + 2.0) / 4.0).epsilon(1e-12));
}
