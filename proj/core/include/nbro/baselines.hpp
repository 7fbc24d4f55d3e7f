#pragma once

#include <span>

#include "nbro/ego.hpp"

namespace nbro {

// Conjugate posterior under Jeffreys priors, for the parametric-Bayes
// baseline.
struct ParametricPosterior {
    enum class Family { exponential, lognormal };
    Family family;
    // exponential: lambda ~ Gamma(shape, rate)
    double shape = 0.0, rate = 0.0;
    // lognormal: (mu, sigma2) ~ Normal-Inverse-Gamma(m, kappa, a, b)
    double m = 0.0, kappa = 0.0, a = 0.0, b = 0.0;
};

// exponential with p(lambda) ~ 1/lambda  ->  Gamma(n, sum xi)
// lognormal with p(mu, sigma2) ~ 1/sigma2 -> NIG on the log data
ParametricPosterior pb_posterior(ParametricPosterior::Family family,
                                 std::span<const double> data);

// Draw a parameter from the posterior and discretize the implied distribution
// at equal-probability quantiles, making PB draws interchangeable with DP
// draws in the shared acquisition machinery.
DiscreteDistribution pb_sample_distribution(const ParametricPosterior& post, Rng& rng,
                                            int discretization);

// Method runners sharing the acquisition loop.  With the same root seed all
// three produce the same initial design x-coordinates.

RunResult nbro_optimize(const DesignSpace& space, const Simulator& sim,
                        const RealWorldData& data, const EgoConfig& cfg, const Rng& root,
                        double alpha = 1.0);

// Plug-in: the input tuple is frozen at the empirical distribution, so the
// kernel reduces to its design part and the GP is effectively over x only.
RunResult plugin_optimize(const DesignSpace& space, const Simulator& sim,
                          const RealWorldData& data, const EgoConfig& cfg, const Rng& root);

RunResult pb_optimize(const DesignSpace& space, const Simulator& sim, const RealWorldData& data,
                      ParametricPosterior::Family family, const EgoConfig& cfg, const Rng& root,
                      int discretization = 10000);

}  // namespace nbro
