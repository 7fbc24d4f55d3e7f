#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nbro/distribution.hpp"
#include "nbro/gmodel.hpp"
#include "nbro/gp.hpp"

namespace nbro {

// Either a continuous box or an explicit finite candidate list.
struct DesignSpace {
    Eigen::VectorXd lo, hi;                    // box bounds (also bound finite sets)
    std::vector<Eigen::VectorXd> candidates;   // nonempty -> finite space

    static DesignSpace box(Eigen::VectorXd lo, Eigen::VectorXd hi);
    static DesignSpace finite_set(std::vector<Eigen::VectorXd> candidates);

    bool finite() const { return !candidates.empty(); }
    Eigen::Index dims() const { return lo.size(); }
    void validate() const;
};

struct EvalRecord {
    int iteration = 0;   // 0 for the initial design
    Eigen::VectorXd x;
    DistTuple dists;
    double ybar = 0.0;
    int reps = 0;
    double T = 0.0;          // incumbent at proposal time (0 on initial rows)
    double ei_value = 0.0;
    bool has_ei = false;     // false on initial-design rows
};

struct OptState {
    std::vector<Eigen::VectorXd> visited;  // unique designs, first-seen order
    std::vector<EvalRecord> history;
    int budget = 0;
    int used = 0;
    std::uint64_t seed = 0;
    std::optional<GPModel> model;
};

struct EIResult {
    Eigen::VectorXd x;
    DistTuple dists;
    double ei_value = 0.0;
    double mu_prime = 0.0;
    double sigma_prime = 0.0;
    double T = 0.0;
    bool exploration_fallback = false;
};

struct EgoConfig {
    int s0 = 0;           // <= 0 means 10 * d
    int budget = 130;     // total evaluated points N, including the initial design
    int reps = 10;        // replications per evaluation
    int n_mc = 50;
    int truncation = 500;
    int n_fresh = 10;
    int n_rand = 1000;
    int refine_top = 5;
    int refine_iters = 50;
    int refit_every = 5;
    int restarts = 10;
    double ei_stop = -1.0;  // stop once max EI <= this; negative disables
    // budgets at which an interim recommendation is recorded
    std::vector<int> checkpoints;
};

// Replicate-averaged simulator call: one output draw for (x, input tuple).
using Simulator = std::function<double(const Eigen::VectorXd&, const DistTuple&, Rng&)>;
// Draws one distribution tuple from the (possibly degenerate) posterior.
using DistSampler = std::function<DistTuple(Rng&)>;

// Maximin-improved Latin hypercube over a box; sample without replacement
// over a finite candidate list.
std::vector<Eigen::VectorXd> initial_design(const DesignSpace& space, int s0, Rng& rng);

// T: the best (lowest) objective mean over visited designs.
double current_best(const GObjectiveModel& m, const std::vector<Eigen::VectorXd>& visited);

// Delta * Phi(Delta / sd) + sd * phi(Delta / sd), Delta = T - mu; max(Delta, 0)
// at sd = 0.
double expected_improvement(double T, double mu, double sd);

// Maximize EI over (design, distribution) candidates.  Distribution
// candidates are the model's atoms plus n_fresh fresh posterior draws; design
// candidates are fully enumerated (finite space) or random search plus
// pattern-search refinement (box).  All-zero EI falls back to maximum
// predictive sd, flagged in the result.
EIResult propose_next(const GObjectiveModel& m, const DesignSpace& space,
                      const DistSampler& sampler, const EgoConfig& cfg, double T, Rng& rng);

struct RunResult {
    Eigen::VectorXd x_hat;
    double mu_hat = 0.0;
    OptState state;
    LooSummary loo;
    // (budget used, recommendation at that point), per configured checkpoint
    std::vector<std::pair<int, Eigen::VectorXd>> checkpoint_recs;
};

// Full acquisition loop: initial design, fit, validate, acquire until the
// budget is spent, recommend the visited design with the lowest final
// objective mean.  `root` seeds every stage through named substreams.
RunResult ego_run(const DesignSpace& space, const Simulator& sim, const DistSampler& sampler,
                  const EgoConfig& cfg, const Rng& root);

// History CSV: iteration, design components, per-dimension atom summaries,
// ybar, reps, T, ei, and the final recommendation mean on every row.
void write_history_csv(const RunResult& result, const std::string& path);

}  // namespace nbro
