// Command-line front end: single runs, the comparison and convergence
// experiments, the ground-truth grid, and standalone simulator calls.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nbro/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string scale = "desk";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "root RNG seed")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--scale", opts.scale, "desk or full")
        ->check(CLI::IsMember({"desk", "full"}));
}

nbro::HarnessConfig make_config(const CommonOpts& opts, std::string* config_text) {
    nbro::HarnessConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = nbro::load_config(opts.config_path);
        std::ifstream in(opts.config_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        *config_text = ss.str();
    }
    nbro::apply_scale(cfg, opts.scale);
    if (opts.seed_set) cfg.seed = opts.seed;
    if (config_text->empty()) *config_text = "defaults seed=" + std::to_string(cfg.seed);
    fs::create_directories(opts.out_dir);
    return cfg;
}

void finish(const CommonOpts& opts, const nbro::HarnessConfig& cfg,
            const std::string& config_text) {
    nbro::write_manifest(opts.out_dir + "/manifest.txt", config_text, cfg);
}

int do_run(const CommonOpts& opts, const std::string& method, const std::string& problem) {
    std::string text;
    nbro::HarnessConfig cfg = make_config(opts, &text);
    if (!problem.empty()) cfg.problem = problem;
    nbro::RunResult result = nbro::run_single(cfg, method, nbro::Rng(cfg.seed));
    nbro::write_history_csv(result, opts.out_dir + "/history.csv");
    finish(opts, cfg, text);
    std::cout << "recommendation:";
    for (Eigen::Index i = 0; i < result.x_hat.size(); ++i) std::cout << ' ' << result.x_hat[i];
    std::cout << "\nobjective mean: " << result.mu_hat << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation optimization under input uncertainty"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string method = "nbro";

    auto* run = app.add_subcommand("run", "one optimization run");
    add_common(run, opts);
    run->add_option("--method", method, "nbro, plugin, pb_exp or pb_lognormal")
        ->check(CLI::IsMember({"nbro", "plugin", "pb_exp", "pb_lognormal"}));

    auto* compare = app.add_subcommand("compare", "all four methods on shared seeds");
    add_common(compare, opts);

    auto* conv_n = app.add_subcommand("converge-n", "posterior optimum vs data size");
    add_common(conv_n, opts);

    auto* conv_b = app.add_subcommand("converge-budget", "recommendation vs budget");
    add_common(conv_b, opts);

    auto* ccf = app.add_subcommand("ccf", "critical care facility run");
    add_common(ccf, opts);

    auto* grid = app.add_subcommand("grid-truth", "inventory ground-truth grid");
    add_common(grid, opts);

    auto* sim_inv = app.add_subcommand("sim-inventory", "standalone inventory simulation");
    add_common(sim_inv, opts);
    double inv_s = 14902.0, inv_S = 27092.0;
    int sim_reps = 30;
    sim_inv->add_option("--s", inv_s, "reorder level");
    sim_inv->add_option("--S", inv_S, "order-up-to level");
    sim_inv->add_option("--reps", sim_reps, "replications");

    auto* sim_ccf = app.add_subcommand("sim-ccf", "standalone critical care simulation");
    add_common(sim_ccf, opts);
    int x1 = 12, x2 = 5, x3 = 22;
    double days = 300.0;
    sim_ccf->add_option("--x1", x1, "ICU beds");
    sim_ccf->add_option("--x2", x2, "CCU beds");
    sim_ccf->add_option("--x3", x3, "IC beds");
    sim_ccf->add_option("--days", days, "post-warmup run length");
    sim_ccf->add_option("--reps", sim_reps, "replications");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(opts, method, "");
        if (ccf->parsed()) return do_run(opts, "nbro", "ccf");

        std::string text;
        nbro::HarnessConfig cfg = make_config(opts, &text);
        if (compare->parsed()) {
            auto result = nbro::compare_methods(cfg);
            nbro::write_metrics_csv(result.rows, opts.out_dir + "/compare_metrics.csv");
            nbro::write_runtime_log(result.rows, opts.out_dir + "/compare_runtimes.log");
            std::ofstream tests(opts.out_dir + "/compare_tests.txt");
            for (const auto& line : result.test_lines) {
                tests << line << '\n';
                std::cout << line << '\n';
            }
            finish(opts, cfg, text);
            return 0;
        }
        if (conv_n->parsed()) {
            auto rows = nbro::converge_n(cfg);
            nbro::write_metrics_csv(rows, opts.out_dir + "/converge_n.csv");
            nbro::write_runtime_log(rows, opts.out_dir + "/converge_n_runtimes.log");
            finish(opts, cfg, text);
            return 0;
        }
        if (conv_b->parsed()) {
            auto rows = nbro::converge_budget(cfg);
            nbro::write_metrics_csv(rows, opts.out_dir + "/converge_budget.csv");
            nbro::write_runtime_log(rows, opts.out_dir + "/converge_budget_runtimes.log");
            finish(opts, cfg, text);
            return 0;
        }
        if (grid->parsed()) {
            nbro::Truth truth =
                nbro::inventory_grid_truth(126, 125, opts.out_dir + "/grid_truth.csv");
            finish(opts, cfg, text);
            std::cout << "argmin: " << truth.x_star[0] << ' ' << truth.x_star[1]
                      << "\nminimum: " << truth.f_star << '\n';
            return 0;
        }
        if (sim_inv->parsed()) {
            nbro::InventoryConfig inv_cfg;
            nbro::DiscreteDistribution demand = nbro::true_inventory_demand();
            Eigen::VectorXd x(2);
            x << inv_s, inv_S;
            nbro::Rng rng(cfg.seed);
            std::ofstream out(opts.out_dir + "/sim_inventory.csv");
            out << "s,S,seed,output\n";
            double acc = 0.0;
            for (int k = 0; k < sim_reps; ++k) {
                double y = nbro::inventory_simulate(x, demand, inv_cfg, rng);
                acc += y;
                char buf[160];
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%llu,%.17g\n", inv_s, inv_S,
                              static_cast<unsigned long long>(cfg.seed), y);
                out << buf;
            }
            finish(opts, cfg, text);
            std::cout << "mean output: " << acc / sim_reps << '\n';
            return 0;
        }
        if (sim_ccf->parsed()) {
            nbro::CcfConfig ccf_cfg;
            ccf_cfg.days = days;
            nbro::DistTuple inputs = nbro::true_ccf_inputs(ccf_cfg, 10000);
            Eigen::VectorXd x(3);
            x << x1, x2, x3;
            nbro::Rng rng(cfg.seed);
            std::ofstream out(opts.out_dir + "/sim_ccf.csv");
            out << "x1,x2,x3,seed,output\n";
            double acc = 0.0;
            for (int k = 0; k < sim_reps; ++k) {
                double y = nbro::ccf_simulate(x, inputs, ccf_cfg, rng);
                acc += y;
                char buf[160];
                std::snprintf(buf, sizeof(buf), "%d,%d,%d,%llu,%.17g\n", x1, x2, x3,
                              static_cast<unsigned long long>(cfg.seed), y);
                out << buf;
            }
            finish(opts, cfg, text);
            std::cout << "mean denials/day: " << acc / sim_reps << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
