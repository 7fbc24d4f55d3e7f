#include <benchmark/benchmark.h>

#include "nbro/gp.hpp"
#include "nbro/wasserstein.hpp"

namespace {

nbro::DiscreteDistribution random_dist(nbro::Rng& rng, int atoms) {
    std::vector<double> support, weights;
    double acc = 0.0;
    for (int i = 0; i < atoms; ++i) {
        acc += rng.uniform(0.01, 1.0);
        support.push_back(acc);
        weights.push_back(rng.uniform(0.1, 1.0));
    }
    return {std::move(support), std::move(weights)};
}

void bm_wasserstein(benchmark::State& state) {
    nbro::Rng rng(7);
    int atoms = static_cast<int>(state.range(0));
    auto a = random_dist(rng, atoms);
    auto b = random_dist(rng, atoms);
    for (auto _ : state) benchmark::DoNotOptimize(nbro::quadratic_wasserstein(a, b));
}
BENCHMARK(bm_wasserstein)->Arg(50)->Arg(500)->Arg(5000);

void bm_pair_correlation(benchmark::State& state) {
    nbro::Rng rng(7);
    nbro::DistTuple pa, pb;
    for (int j = 0; j < 2; ++j) {
        pa.push_back(std::make_shared<nbro::DiscreteDistribution>(random_dist(rng, 500)));
        pb.push_back(std::make_shared<nbro::DiscreteDistribution>(random_dist(rng, 500)));
    }
    Eigen::VectorXd xa = Eigen::VectorXd::Random(3), xb = Eigen::VectorXd::Random(3);
    nbro::KernelParams params;
    params.theta_x = Eigen::VectorXd::Ones(3);
    params.theta_p = Eigen::VectorXd::Ones(2);
    for (auto _ : state)
        benchmark::DoNotOptimize(nbro::pair_correlation(xa, pa, xb, pb, params, nullptr));
}
BENCHMARK(bm_pair_correlation);

nbro::TrainingSet synthetic_train(int s, nbro::Rng& rng) {
    nbro::TrainingSet train;
    train.means.resize(s);
    for (int i = 0; i < s; ++i) {
        nbro::GPPoint p;
        p.x = Eigen::VectorXd::Zero(2);
        p.x << rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0);
        p.dists.push_back(std::make_shared<nbro::DiscreteDistribution>(random_dist(rng, 100)));
        train.points.push_back(std::move(p));
        train.means[i] = rng.normal();
        train.reps.push_back(10);
    }
    train.pooled_var = 0.05;
    return train;
}

void bm_gp_fit(benchmark::State& state) {
    nbro::Rng rng(11);
    auto train = synthetic_train(static_cast<int>(state.range(0)), rng);
    auto bounds = nbro::HyperBounds::defaults(train);
    for (auto _ : state) {
        nbro::Rng fit_rng(13);
        benchmark::DoNotOptimize(nbro::GPModel::fit(train, bounds, 3, fit_rng));
    }
}
BENCHMARK(bm_gp_fit)->Arg(20)->Arg(60)->Unit(benchmark::kMillisecond);

void bm_gp_predict(benchmark::State& state) {
    nbro::Rng rng(11);
    auto train = synthetic_train(60, rng);
    auto bounds = nbro::HyperBounds::defaults(train);
    nbro::Rng fit_rng(13);
    auto model = nbro::GPModel::fit(train, bounds, 3, fit_rng);
    nbro::GPPoint p;
    p.x = Eigen::VectorXd::Zero(2);
    p.x << 0.3, 0.7;
    p.dists.push_back(std::make_shared<nbro::DiscreteDistribution>(random_dist(rng, 100)));
    for (auto _ : state) benchmark::DoNotOptimize(model.posterior_mean(p));
}
BENCHMARK(bm_gp_predict);

}  // namespace

BENCHMARK_MAIN();
