#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nbro/rng.hpp"

namespace nbro {

// Finite weighted support on the real line.  The universal representation for
// empirical data and posterior draws.  Immutable after construction:
//   - support strictly increasing (duplicates merged at exact equality)
//   - weights positive and summing to 1 within 1e-12
class DiscreteDistribution {
public:
    DiscreteDistribution(std::vector<double> support, std::vector<double> weights);

    static DiscreteDistribution point_mass(double a) { return {{a}, {1.0}}; }
    static DiscreteDistribution empirical(std::span<const double> data);

    const std::vector<double>& support() const { return support_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return support_.size(); }

    double mean() const;
    double variance() const;
    double cdf(double t) const;
    double quantile(double u) const;
    double sample(Rng& rng) const;
    // cumulative weights, cum_[i] = sum of weights_[0..i]; cum_.back() == 1
    const std::vector<double>& cumulative() const { return cum_; }

    bool operator==(const DiscreteDistribution& other) const {
        return support_ == other.support_ && weights_ == other.weights_;
    }

private:
    std::vector<double> support_;
    std::vector<double> weights_;
    std::vector<double> cum_;
};

using DistPtr = std::shared_ptr<const DiscreteDistribution>;
// A product-form distribution: one marginal per input dimension.
using DistTuple = std::vector<DistPtr>;

// Prior guess for the input distribution (the base of the Dirichlet process).
class BaseDistribution {
public:
    struct Uniform { double lo, hi; };
    struct Exponential { double rate; };
    struct Lognormal { double mu, sigma; };  // parameters of the underlying normal

    static BaseDistribution uniform(double lo, double hi);
    static BaseDistribution exponential(double rate);
    static BaseDistribution lognormal(double mu, double sigma);
    static BaseDistribution discrete(DiscreteDistribution d);

    double cdf(double t) const;
    double quantile(double u) const;
    double sample(Rng& rng) const;
    bool is_discrete() const;
    const DiscreteDistribution& as_discrete() const;
    // Integration window: [quantile(eps), quantile(1-eps)] for unbounded kinds.
    std::pair<double, double> integration_bounds(double eps = 1e-8) const;

private:
    using Kind = std::variant<Uniform, Exponential, Lognormal, DiscreteDistribution>;
    explicit BaseDistribution(Kind k) : kind_(std::move(k)) {}
    Kind kind_;
};

// Posterior Dirichlet process for one input dimension:
// DP(alpha + n, (alpha P0 + sum_j delta_{xi_j}) / (alpha + n)).
class DPPosterior {
public:
    DPPosterior(double alpha, BaseDistribution base, std::vector<double> data);

    double alpha() const { return alpha_; }
    double concentration() const { return alpha_ + static_cast<double>(data_.size()); }
    const std::vector<double>& data() const { return data_; }
    const BaseDistribution& base() const { return base_; }

    // cdf of the posterior base mixture (alpha F0(t) + #{xi_j <= t}) / (alpha+n)
    double base_mixture_cdf(double t) const;
    double sample_base_mixture(Rng& rng) const;

    // Stick-breaking draw truncated at K atoms; the final stick remainder is
    // folded into the last atom so weights sum to 1 exactly.
    DiscreteDistribution sample_distribution(int truncation, Rng& rng) const;

private:
    double alpha_;
    BaseDistribution base_;
    std::vector<double> data_;         // original order
    std::vector<double> sorted_data_;  // for cdf counting
};

// Independent univariate posteriors, one per input dimension.
class ProductPosterior {
public:
    explicit ProductPosterior(std::vector<DPPosterior> components);
    const std::vector<DPPosterior>& components() const { return components_; }
    std::size_t dims() const { return components_.size(); }
    DistTuple sample(int truncation, Rng& rng) const;

private:
    std::vector<DPPosterior> components_;
};

// Real-world observations: l columns of n values each.
struct RealWorldData {
    std::vector<std::vector<double>> columns;
    std::vector<std::string> names;

    std::size_t n() const { return columns.empty() ? 0 : columns[0].size(); }
    std::size_t dims() const { return columns.size(); }

    static RealWorldData read_csv(const std::string& path);
    void write_csv(const std::string& path) const;
};

DPPosterior dp_posterior(double alpha, BaseDistribution base, std::vector<double> data);

// Default posterior per dimension: alpha = 1, P0 = uniform(0, max(column)).
ProductPosterior default_posterior(const RealWorldData& data, double alpha = 1.0);

// Closed form for E_pi[E_P[h(x, xi)]] with a single-dimension posterior:
//   alpha/(alpha+n) E_{P0}[h] + 1/(alpha+n) sum_j h(xi_j).
// The P0 expectation uses 2001-point composite Simpson quadrature on the
// base's integration window (exact sum for discrete bases).
double nbro_objective_closed_form(const ProductPosterior& post,
                                  const std::function<double(double)>& h_at_x);

}  // namespace nbro
