#pragma once

#include <string>
#include <vector>

#include "nbro/baselines.hpp"
#include "nbro/simulators.hpp"
#include "nbro/stats.hpp"

namespace nbro {

struct Truth {
    Eigen::VectorXd x_star;
    double f_star = 0.0;
};

// (GAP, xGAP): objective loss at x_hat under the true evaluator, and the
// Euclidean distance to the true optimizer.
std::pair<double, double> gap_metrics(const Eigen::VectorXd& x_hat, const Truth& truth,
                                      const std::function<double(const Eigen::VectorXd&)>& evaluator);

// Exhaustive closed-form grid over the inventory box.  Optionally persists
// the full grid as CSV (s, S, cost).
Truth inventory_grid_truth(int grid_s = 126, int grid_S = 125, const std::string& csv_path = "");

// Brute-force posterior-objective reference g(x) = mean over posterior draws
// of the replicate-averaged simulator output.
std::vector<DistTuple> reference_draws(const DistSampler& sampler, int draws, const Rng& root);
double g_estimate(const Eigen::VectorXd& x, const Simulator& sim,
                  const std::vector<DistTuple>& draws, int reps, Rng& rng);

struct GReference {
    Eigen::VectorXd x_min;
    double g_min = 0.0;
    std::vector<double> values;  // aligned with the input grid
};
GReference g_reference(const std::vector<Eigen::VectorXd>& grid, const Simulator& sim,
                       const std::vector<DistTuple>& draws, int reps, const Rng& root);

struct MetricRecord {
    std::string experiment;
    std::string method;  // nbro | plugin | pb_exp | pb_lognormal
    int n = 0;
    int budget = 0;
    std::uint64_t seed = 0;
    double gap = -1.0;  // negative = not computed
    double xgap = -1.0;
    double ggap = -1.0;
    double gxgap = -1.0;
    double runtime_seconds = 0.0;
};
// Metrics only; the CSV is byte-reproducible from (config, seed).
void write_metrics_csv(const std::vector<MetricRecord>& rows, const std::string& path);
// Wall-clock timings, kept out of the CSV so reruns stay byte-identical.
void write_runtime_log(const std::vector<MetricRecord>& rows, const std::string& path);

// Run configuration, read from a JSON file with sections problem, posterior,
// gp, ego, seeds, and experiment.  Missing fields keep their defaults.
struct HarnessConfig {
    // problem
    std::string problem = "inventory";  // inventory | ccf
    int data_n = 1000;
    double alpha = 1.0;
    std::string data_csv;  // optional: load real-world data instead of generating
    // posterior / gp / ego
    EgoConfig ego;
    // experiment
    int macro_reps = 20;
    std::vector<int> n_sweep = {10, 100, 1000};
    int gref_draws = 100;
    int gref_reps = 100;
    int gref_grid = 10;  // grid points per design dimension
    int pb_discretization = 10000;
    // seeds
    std::uint64_t seed = 20240001;

    std::string scale = "desk";  // desk | full
};
HarnessConfig load_config(const std::string& path);
// Full-scale overrides: 100 macro-reps, the complete n sweep, 10^4 x 10^3 reference.
void apply_scale(HarnessConfig& cfg, const std::string& scale);

// The problem bound to concrete simulator, design space, and truth.
struct Problem {
    DesignSpace space;
    Simulator sim;
    Truth truth;
    std::function<double(const Eigen::VectorXd&)> true_evaluator;
    std::function<RealWorldData(int n, Rng&)> data_gen;
};
Problem make_problem(const HarnessConfig& cfg);

// One optimization run of a named method on the configured problem.
RunResult run_single(const HarnessConfig& cfg, const std::string& method, const Rng& root);

// Convergence of the posterior optimum toward the true optimum as the data
// size grows; one row per (n, macro-rep), metrics in ggap/gxgap.
std::vector<MetricRecord> converge_n(const HarnessConfig& cfg);

// Quality of the interim recommendation across budget checkpoints; one row
// per (checkpoint, macro-rep), metric in ggap.
std::vector<MetricRecord> converge_budget(const HarnessConfig& cfg);

struct CompareResult {
    std::vector<MetricRecord> rows;
    std::vector<std::string> test_lines;  // Mood test summaries
};
// All four methods on shared seeds across the configured n values.
CompareResult compare_methods(const HarnessConfig& cfg);

// manifest.txt: config hash, seed, scale, version
void write_manifest(const std::string& path, const std::string& config_text,
                    const HarnessConfig& cfg);

}  // namespace nbro
