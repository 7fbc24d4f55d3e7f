#pragma once

#include <Eigen/Core>
#include <vector>

#include "nbro/gp.hpp"

namespace nbro {

// Monte-Carlo collapse of the metamodel over the input-distribution
// posterior.  Given atoms P_1..P_N drawn from the posterior,
//   mu(x)      = (1/N) sum_i m_s(x, P_i)
//   c(x, x')   = (1/N^2) sum_ij k_s((x,P_i), (x',P_j))
// Both reduce to ordinary-kriging expressions in the atom-averaged
// correlation vector, so a design evaluates in O(s^2) after setup.
class GObjectiveModel {
public:
    GObjectiveModel(GPModel model, std::vector<DistTuple> atoms);

    double g_mean(const Eigen::VectorXd& x) const;
    double g_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    double g_var(const Eigen::VectorXd& x) const { return g_cov(x, x); }

    struct Eval {
        double mean;
        double var;
    };
    // mean and variance in one pass (shared linear solves)
    Eval evaluate(const Eigen::VectorXd& x) const;

    struct Lookahead {
        double mu_prime;
        double sigma_prime;
    };
    // One-step-lookahead distribution of the objective mean at x_next, were
    // (x_next, p_next) to be simulated with `reps` replications: mu_prime is
    // the current mu(x_next); sigma_prime^2 is the variance of the posterior
    // mean shift plus the conditioned residual covariance.  Computed from the
    // explicit update formulas; algebraically the sum collapses to c(x_next,
    // x_next) independent of p_next.
    Lookahead lookahead(const Eigen::VectorXd& x_next, const DistTuple& p_next, int reps) const;

    const GPModel& model() const { return model_; }
    const std::vector<DistTuple>& atoms() const { return atoms_; }
    std::size_t n_mc() const { return atoms_.size(); }
    // times a numerically negative variance was clamped to zero
    int clamp_count() const { return clamps_; }

private:
    struct DesignStats {
        Eigen::VectorXd kbar;    // atom-averaged covariance vector to training
        Eigen::VectorXd z;      // C^{-1} kbar
        double etabar;
        double mean;
    };
    DesignStats design_stats(const Eigen::VectorXd& x) const;

    GPModel model_;
    std::vector<DistTuple> atoms_;
    Eigen::VectorXd bbar_;   // tau2 * mean_i r_M(train_t, P_i), per training point
    double mbar_ = 0.0;      // tau2 * mean_ij r_M(P_i, P_j)
    mutable int clamps_ = 0;
};

}  // namespace nbro
