#include "nbro/baselines.hpp"

#include <cmath>
#include <stdexcept>

#include "nbro/simulators.hpp"
#include "nbro/stats.hpp"

namespace nbro {

ParametricPosterior pb_posterior(ParametricPosterior::Family family,
                                 std::span<const double> data) {
    if (data.empty()) throw std::invalid_argument("pb_posterior: empty data");
    for (double v : data)
        if (!(v > 0.0)) throw std::invalid_argument("pb_posterior: observations must be positive");
    ParametricPosterior post;
    post.family = family;
    if (family == ParametricPosterior::Family::exponential) {
        double sum = 0.0;
        for (double v : data) sum += v;
        post.shape = static_cast<double>(data.size());
        post.rate = sum;
        return post;
    }
    if (data.size() < 2)
        throw std::invalid_argument("pb_posterior: lognormal family needs at least 2 points");
    std::vector<double> logs;
    logs.reserve(data.size());
    for (double v : data) logs.push_back(std::log(v));
    double n = static_cast<double>(logs.size());
    double ybar = stats::mean(logs);
    double ss = 0.0;
    for (double y : logs) ss += (y - ybar) * (y - ybar);
    post.m = ybar;
    post.kappa = n;
    post.a = 0.5 * (n - 1.0);
    post.b = 0.5 * ss;
    if (!(post.b > 0.0)) post.b = 1e-12;  // identical observations
    return post;
}

DiscreteDistribution pb_sample_distribution(const ParametricPosterior& post, Rng& rng,
                                            int discretization) {
    if (discretization < 2)
        throw std::invalid_argument("pb_sample_distribution: discretization must be >= 2");
    if (post.family == ParametricPosterior::Family::exponential) {
        double lambda = rng.gamma(post.shape, post.rate);
        return discretize_quantiles(BaseDistribution::exponential(lambda), discretization);
    }
    double sigma2 = post.b / rng.gamma(post.a, 1.0);
    double mu = post.m + std::sqrt(sigma2 / post.kappa) * rng.normal();
    return discretize_quantiles(BaseDistribution::lognormal(mu, std::sqrt(sigma2)),
                                discretization);
}

RunResult nbro_optimize(const DesignSpace& space, const Simulator& sim,
                        const RealWorldData& data, const EgoConfig& cfg, const Rng& root,
                        double alpha) {
    ProductPosterior post = default_posterior(data, alpha);
    int truncation = cfg.truncation;
    DistSampler sampler = [post, truncation](Rng& rng) { return post.sample(truncation, rng); };
    return ego_run(space, sim, sampler, cfg, root);
}

RunResult plugin_optimize(const DesignSpace& space, const Simulator& sim,
                          const RealWorldData& data, const EgoConfig& cfg, const Rng& root) {
    DistTuple empirical;
    for (const auto& col : data.columns)
        empirical.push_back(std::make_shared<DiscreteDistribution>(
            DiscreteDistribution::empirical(col)));
    DistSampler sampler = [empirical](Rng&) { return empirical; };
    return ego_run(space, sim, sampler, cfg, root);
}

RunResult pb_optimize(const DesignSpace& space, const Simulator& sim, const RealWorldData& data,
                      ParametricPosterior::Family family, const EgoConfig& cfg, const Rng& root,
                      int discretization) {
    std::vector<ParametricPosterior> posts;
    for (const auto& col : data.columns) posts.push_back(pb_posterior(family, col));
    DistSampler sampler = [posts, discretization](Rng& rng) {
        DistTuple tuple;
        for (const auto& p : posts)
            tuple.push_back(std::make_shared<DiscreteDistribution>(
                pb_sample_distribution(p, rng, discretization)));
        return tuple;
    };
    return ego_run(space, sim, sampler, cfg, root);
}

}  // namespace nbro
