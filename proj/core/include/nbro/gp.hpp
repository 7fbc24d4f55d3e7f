#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nbro/rng.hpp"
#include "nbro/wasserstein.hpp"

namespace nbro {

// One metamodel input: a design vector paired with a distribution tuple.
struct GPPoint {
    Eigen::VectorXd x;
    DistTuple dists;
};

bool same_point(const GPPoint& a, const GPPoint& b);

// Replicate-averaged training data for the nugget-effect model.
struct TrainingSet {
    std::vector<GPPoint> points;
    Eigen::VectorXd means;        // ybar at each point
    std::vector<int> reps;        // replications behind each mean (>= 2)
    double pooled_var = 0.0;      // sigma_eps^2 pooled across points

    std::size_t size() const { return points.size(); }
    void validate() const;
};

// Log-uniform search box per hyperparameter, in natural units.
struct HyperBounds {
    Eigen::VectorXd theta_x_lo, theta_x_hi;
    Eigen::VectorXd theta_p_lo, theta_p_hi;
    double tau2_lo = 1e-8, tau2_hi = 1e2;

    // Defaults: theta in [1e-2, 1e2] x (per-dimension range),
    // tau2 in [1e-4, 1e2] x var(ybar).
    static HyperBounds defaults(const TrainingSet& train);
};

struct LooRecord {
    double predicted_mean;
    double predicted_sd;
    double actual;
};

struct LooSummary {
    std::vector<LooRecord> records;
    double mean_abs_error = 0.0;
    double coverage95 = 0.0;  // fraction of actuals inside 95% predictive intervals
};

// Stochastic (nugget-effect) GP over design-distribution pairs with a
// constant trend under the vague prior (ordinary kriging).  Immutable once
// fitted; update() returns a new model.
class GPModel {
public:
    static GPModel fit(TrainingSet train, const HyperBounds& bounds, int restarts, Rng& rng);
    // Refactorize with explicitly given hyperparameters (no optimization).
    static GPModel with_params(TrainingSet train, KernelParams params);

    double posterior_mean(const GPPoint& p) const;
    double posterior_cov(const GPPoint& p1, const GPPoint& p2) const;
    double posterior_var(const GPPoint& p) const { return posterior_cov(p, p); }

    // Add one observation.  A point bit-identical to an existing training
    // input merges replicates instead of appending.  Hyperparameters are
    // refit every `refit_every` added points (counted since the last fit),
    // otherwise reused.
    GPModel update(const GPPoint& p, double ybar, int new_reps, int refit_every,
                   const HyperBounds& bounds, int restarts, Rng& rng) const;

    LooSummary loo_cv() const;

    const KernelParams& params() const { return params_; }
    double beta0() const { return beta0_; }
    double noise_var() const { return train_.pooled_var; }
    double jitter() const { return jitter_; }
    const TrainingSet& train() const { return train_; }
    double log_likelihood() const { return loglik_; }
    int updates_since_fit() const { return updates_since_fit_; }
    const std::shared_ptr<WdCache>& cache() const { return cache_; }

    // Correlation vector r((x,P), training points).
    Eigen::VectorXd corr_vector(const GPPoint& p) const;
    // Solve C z = v with the cached factorization.
    Eigen::VectorXd solve(const Eigen::VectorXd& v) const;
    double one_cinv_one() const { return one_cinv_one_; }
    const Eigen::VectorXd& cinv_residual() const { return alpha_; }
    const Eigen::VectorXd& cinv_one() const { return cinv_one_; }

    // Negative log marginal likelihood of the nugget model at given
    // hyperparameters (exposed for tests).
    static double negative_log_likelihood(const TrainingSet& train, const KernelParams& params,
                                          WdCache* cache);

    std::string serialize() const;
    static GPModel deserialize(const std::string& text);

private:
    GPModel() = default;
    void factorize();

    KernelParams params_;
    double beta0_ = 0.0;
    TrainingSet train_;
    std::shared_ptr<WdCache> cache_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;     // C^{-1}(y - beta0 1)
    Eigen::VectorXd cinv_one_;  // C^{-1} 1
    double one_cinv_one_ = 0.0;
    double jitter_ = 0.0;
    double loglik_ = 0.0;
    int updates_since_fit_ = 0;
};

}  // namespace nbro
