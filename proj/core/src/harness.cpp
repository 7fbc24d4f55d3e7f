#include "nbro/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace nbro {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<Eigen::VectorXd> box_grid(const DesignSpace& space, int per_dim) {
    if (space.finite()) return space.candidates;
    std::vector<Eigen::VectorXd> grid;
    const Eigen::Index d = space.dims();
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    while (true) {
        Eigen::VectorXd x(d);
        for (Eigen::Index k = 0; k < d; ++k)
            x[k] = space.lo[k] + (space.hi[k] - space.lo[k]) * idx[static_cast<std::size_t>(k)] /
                                     (per_dim - 1);
        grid.push_back(std::move(x));
        Eigen::Index k = 0;
        for (; k < d; ++k) {
            if (++idx[static_cast<std::size_t>(k)] < per_dim) break;
            idx[static_cast<std::size_t>(k)] = 0;
        }
        if (k == d) break;
    }
    return grid;
}

DistSampler posterior_sampler(const RealWorldData& data, double alpha, int truncation) {
    ProductPosterior post = default_posterior(data, alpha);
    return [post, truncation](Rng& rng) { return post.sample(truncation, rng); };
}

}  // namespace

std::pair<double, double> gap_metrics(const Eigen::VectorXd& x_hat, const Truth& truth,
                                      const std::function<double(const Eigen::VectorXd&)>& evaluator) {
    double gap = std::fabs(truth.f_star - evaluator(x_hat));
    double xgap = (truth.x_star - x_hat).norm();
    return {gap, xgap};
}

Truth inventory_grid_truth(int grid_s, int grid_S, const std::string& csv_path) {
    Eigen::VectorXd lo = inventory_lo(), hi = inventory_hi();
    Truth truth;
    truth.f_star = std::numeric_limits<double>::infinity();
    std::ofstream out;
    if (!csv_path.empty()) {
        out.open(csv_path);
        if (!out) throw std::runtime_error("cannot open " + csv_path);
        out << "s,S,cost\n";
    }
    for (int i = 0; i < grid_s; ++i) {
        double s_level = lo[0] + (hi[0] - lo[0]) * i / (grid_s - 1);
        for (int j = 0; j < grid_S; ++j) {
            double big_s = lo[1] + (hi[1] - lo[1]) * j / (grid_S - 1);
            double f = inventory_analytic_cost(s_level, big_s, kInventoryLambda);
            if (out.is_open()) out << fmt(s_level) << ',' << fmt(big_s) << ',' << fmt(f) << '\n';
            if (f < truth.f_star) {
                truth.f_star = f;
                truth.x_star = (Eigen::VectorXd(2) << s_level, big_s).finished();
            }
        }
    }
    return truth;
}

std::vector<DistTuple> reference_draws(const DistSampler& sampler, int draws, const Rng& root) {
    Rng rng = root.substream("reference-draws");
    std::vector<DistTuple> out;
    for (int i = 0; i < draws; ++i) out.push_back(sampler(rng));
    return out;
}

double g_estimate(const Eigen::VectorXd& x, const Simulator& sim,
                  const std::vector<DistTuple>& draws, int reps, Rng& rng) {
    double acc = 0.0;
    for (const auto& p : draws) {
        double ybar = 0.0;
        for (int k = 0; k < reps; ++k) ybar += sim(x, p, rng);
        acc += ybar / reps;
    }
    return acc / static_cast<double>(draws.size());
}

GReference g_reference(const std::vector<Eigen::VectorXd>& grid, const Simulator& sim,
                       const std::vector<DistTuple>& draws, int reps, const Rng& root) {
    GReference out;
    out.g_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Rng rng = root.substream("reference-point", i);
        double g = g_estimate(grid[i], sim, draws, reps, rng);
        out.values.push_back(g);
        if (g < out.g_min) {
            out.g_min = g;
            out.x_min = grid[i];
        }
    }
    return out;
}

void write_metrics_csv(const std::vector<MetricRecord>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "experiment,method,n,budget,seed,gap,xgap,ggap,gxgap\n";
    for (const auto& r : rows) {
        auto metric = [](double v) { return v < 0.0 ? std::string() : fmt(v); };
        out << r.experiment << ',' << r.method << ',' << r.n << ',' << r.budget << ',' << r.seed
            << ',' << metric(r.gap) << ',' << metric(r.xgap) << ',' << metric(r.ggap) << ','
            << metric(r.gxgap) << '\n';
    }
}

void write_runtime_log(const std::vector<MetricRecord>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (const auto& r : rows)
        out << r.experiment << ' ' << r.method << " n=" << r.n << " budget=" << r.budget
            << " seed=" << r.seed << " runtime_seconds=" << r.runtime_seconds << '\n';
}

HarnessConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    HarnessConfig cfg;
    if (j.contains("problem")) {
        const auto& p = j["problem"];
        if (p.contains("name")) cfg.problem = p["name"].get<std::string>();
        if (p.contains("data_n")) cfg.data_n = p["data_n"].get<int>();
        if (p.contains("data_csv")) cfg.data_csv = p["data_csv"].get<std::string>();
    }
    if (j.contains("posterior")) {
        const auto& p = j["posterior"];
        if (p.contains("alpha")) cfg.alpha = p["alpha"].get<double>();
        if (p.contains("truncation")) cfg.ego.truncation = p["truncation"].get<int>();
        if (p.contains("n_mc")) cfg.ego.n_mc = p["n_mc"].get<int>();
    }
    if (j.contains("gp")) {
        const auto& p = j["gp"];
        if (p.contains("restarts")) cfg.ego.restarts = p["restarts"].get<int>();
        if (p.contains("refit_every")) cfg.ego.refit_every = p["refit_every"].get<int>();
    }
    if (j.contains("ego")) {
        const auto& p = j["ego"];
        if (p.contains("s0")) cfg.ego.s0 = p["s0"].get<int>();
        if (p.contains("budget")) cfg.ego.budget = p["budget"].get<int>();
        if (p.contains("reps")) cfg.ego.reps = p["reps"].get<int>();
        if (p.contains("n_fresh")) cfg.ego.n_fresh = p["n_fresh"].get<int>();
        if (p.contains("n_rand")) cfg.ego.n_rand = p["n_rand"].get<int>();
        if (p.contains("ei_stop")) cfg.ego.ei_stop = p["ei_stop"].get<double>();
        if (p.contains("checkpoints")) cfg.ego.checkpoints = p["checkpoints"].get<std::vector<int>>();
    }
    if (j.contains("experiment")) {
        const auto& p = j["experiment"];
        if (p.contains("macro_reps")) cfg.macro_reps = p["macro_reps"].get<int>();
        if (p.contains("n_sweep")) cfg.n_sweep = p["n_sweep"].get<std::vector<int>>();
        if (p.contains("gref_draws")) cfg.gref_draws = p["gref_draws"].get<int>();
        if (p.contains("gref_reps")) cfg.gref_reps = p["gref_reps"].get<int>();
        if (p.contains("gref_grid")) cfg.gref_grid = p["gref_grid"].get<int>();
        if (p.contains("pb_discretization"))
            cfg.pb_discretization = p["pb_discretization"].get<int>();
    }
    if (j.contains("seeds")) {
        const auto& p = j["seeds"];
        if (p.contains("root")) cfg.seed = p["root"].get<std::uint64_t>();
    }
    return cfg;
}

void apply_scale(HarnessConfig& cfg, const std::string& scale) {
    cfg.scale = scale;
    if (scale == "desk") return;
    if (scale != "full") throw std::invalid_argument("scale must be desk or full");
    cfg.macro_reps = 100;
    cfg.n_sweep = {10, 20, 50, 100, 500, 1000, 10000, 100000, 500000};
    cfg.gref_draws = 10000;
    cfg.gref_reps = 1000;
    cfg.gref_grid = 50;
}

Problem make_problem(const HarnessConfig& cfg) {
    Problem prob;
    if (cfg.problem == "inventory") {
        prob.space = DesignSpace::box(inventory_lo(), inventory_hi());
        InventoryConfig inv;
        prob.sim = [inv](const Eigen::VectorXd& x, const DistTuple& dists, Rng& rng) {
            return inventory_simulate(x, *dists.at(0), inv, rng);
        };
        prob.truth = inventory_grid_truth();
        prob.true_evaluator = [](const Eigen::VectorXd& x) {
            return inventory_analytic_cost(x[0], x[1], kInventoryLambda);
        };
        prob.data_gen = [](int n, Rng& rng) { return true_inventory_data(n, rng); };
        return prob;
    }
    if (cfg.problem == "ccf") {
        prob.space = DesignSpace::finite_set(enumerate_ccf_designs());
        CcfConfig ccf;
        prob.sim = [ccf](const Eigen::VectorXd& x, const DistTuple& dists, Rng& rng) {
            return ccf_simulate(x, dists, ccf, rng);
        };
        prob.truth.x_star = (Eigen::VectorXd(3) << 12.0, 5.0, 22.0).finished();
        prob.truth.f_star = 0.596;
        // long-horizon estimate with the true inputs (heavy; only used for GAP)
        prob.true_evaluator = [ccf](const Eigen::VectorXd& x) {
            CcfConfig long_cfg = ccf;
            long_cfg.days = 10000.0;
            DistTuple inputs = true_ccf_inputs(long_cfg, 10000);
            Rng rng(977001);
            double acc = 0.0;
            const int reps = 5;
            for (int k = 0; k < reps; ++k) acc += ccf_simulate(x, inputs, long_cfg, rng);
            return acc / reps;
        };
        prob.data_gen = [](int n, Rng& rng) { return true_ccf_data(n, rng); };
        return prob;
    }
    throw std::invalid_argument("unknown problem: " + cfg.problem);
}

RunResult run_single(const HarnessConfig& cfg, const std::string& method, const Rng& root) {
    Problem prob = make_problem(cfg);
    RealWorldData data;
    if (!cfg.data_csv.empty()) {
        data = RealWorldData::read_csv(cfg.data_csv);
    } else {
        Rng data_rng = root.substream("data");
        data = prob.data_gen(cfg.data_n, data_rng);
    }
    EgoConfig ego = cfg.ego;
    if (cfg.problem == "ccf" && cfg.ego.s0 <= 0) {
        ego.s0 = 50;
        ego.reps = 5;
    }
    if (method == "nbro") return nbro_optimize(prob.space, prob.sim, data, ego, root, cfg.alpha);
    if (method == "plugin") return plugin_optimize(prob.space, prob.sim, data, ego, root);
    if (method == "pb_exp")
        return pb_optimize(prob.space, prob.sim, data, ParametricPosterior::Family::exponential,
                           ego, root, cfg.pb_discretization);
    if (method == "pb_lognormal")
        return pb_optimize(prob.space, prob.sim, data, ParametricPosterior::Family::lognormal,
                           ego, root, cfg.pb_discretization);
    throw std::invalid_argument("unknown method: " + method);
}

std::vector<MetricRecord> converge_n(const HarnessConfig& cfg) {
    Problem prob = make_problem(cfg);
    std::vector<Eigen::VectorXd> grid = box_grid(prob.space, cfg.gref_grid);
    std::vector<MetricRecord> rows;
    Rng root(cfg.seed);
    for (int n : cfg.n_sweep) {
        Rng n_rng = root.substream("n-level", static_cast<std::uint64_t>(n));
        for (int rep = 0; rep < cfg.macro_reps; ++rep) {
            auto start = std::chrono::steady_clock::now();
            Rng rep_rng = n_rng.substream("rep", static_cast<std::uint64_t>(rep));
            Rng data_rng = rep_rng.substream("data");
            RealWorldData data = prob.data_gen(n, data_rng);
            DistSampler sampler = posterior_sampler(data, cfg.alpha, cfg.ego.truncation);
            auto draws = reference_draws(sampler, cfg.gref_draws, rep_rng);
            GReference ref = g_reference(grid, prob.sim, draws, cfg.gref_reps, rep_rng);
            MetricRecord row;
            row.experiment = "converge_n";
            row.method = "nbro";
            row.n = n;
            row.seed = rep_rng.seed();
            row.ggap = std::fabs(prob.truth.f_star - ref.g_min);
            row.gxgap = (prob.truth.x_star - ref.x_min).norm();
            row.runtime_seconds = elapsed_seconds(start);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<MetricRecord> converge_budget(const HarnessConfig& cfg) {
    Problem prob = make_problem(cfg);
    HarnessConfig local = cfg;
    if (local.ego.checkpoints.empty()) {
        int s0 = local.ego.s0 > 0 ? local.ego.s0 : static_cast<int>(10 * prob.space.dims());
        int span = local.ego.budget - s0;
        for (int k = 0; k <= 4; ++k) local.ego.checkpoints.push_back(s0 + span * k / 4);
    }
    std::vector<Eigen::VectorXd> grid = box_grid(prob.space, cfg.gref_grid);
    std::vector<MetricRecord> rows;
    Rng root(cfg.seed);
    for (int rep = 0; rep < cfg.macro_reps; ++rep) {
        auto start = std::chrono::steady_clock::now();
        Rng rep_rng = root.substream("budget-rep", static_cast<std::uint64_t>(rep));
        RunResult run = run_single(local, "nbro", rep_rng);

        Rng data_rng = rep_rng.substream("data");
        RealWorldData data = prob.data_gen(cfg.data_n, data_rng);
        DistSampler sampler = posterior_sampler(data, cfg.alpha, cfg.ego.truncation);
        auto draws = reference_draws(sampler, cfg.gref_draws, rep_rng);
        GReference ref = g_reference(grid, prob.sim, draws, cfg.gref_reps, rep_rng);
        double run_time = elapsed_seconds(start);

        for (std::size_t c = 0; c < run.checkpoint_recs.size(); ++c) {
            const auto& [budget, x_rec] = run.checkpoint_recs[c];
            Rng eval_rng = rep_rng.substream("checkpoint-eval", c);
            double g_rec = g_estimate(x_rec, prob.sim, draws, cfg.gref_reps, eval_rng);
            MetricRecord row;
            row.experiment = "converge_budget";
            row.method = "nbro";
            row.n = cfg.data_n;
            row.budget = budget;
            row.seed = rep_rng.seed();
            row.ggap = std::fabs(g_rec - ref.g_min);
            row.runtime_seconds = run_time;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

CompareResult compare_methods(const HarnessConfig& cfg) {
    Problem prob = make_problem(cfg);
    CompareResult result;
    const std::vector<std::string> methods = {"nbro", "plugin", "pb_exp", "pb_lognormal"};
    Rng root(cfg.seed);
    for (int n : cfg.n_sweep) {
        std::map<std::string, std::vector<double>> gaps;
        for (int rep = 0; rep < cfg.macro_reps; ++rep) {
            Rng rep_rng = root.substream("compare", static_cast<std::uint64_t>(n))
                              .substream("rep", static_cast<std::uint64_t>(rep));
            HarnessConfig local = cfg;
            local.data_n = n;
            for (const auto& method : methods) {
                auto start = std::chrono::steady_clock::now();
                RunResult run = run_single(local, method, rep_rng);
                auto [gap, xgap] = gap_metrics(run.x_hat, prob.truth, prob.true_evaluator);
                MetricRecord row;
                row.experiment = "compare";
                row.method = method;
                row.n = n;
                row.budget = cfg.ego.budget;
                row.seed = rep_rng.seed();
                row.gap = gap;
                row.xgap = xgap;
                row.runtime_seconds = elapsed_seconds(start);
                gaps[method].push_back(gap);
                result.rows.push_back(std::move(row));
            }
        }
        for (const auto& other : {"plugin", "pb_exp", "pb_lognormal"}) {
            std::ostringstream line;
            line << "n=" << n << " nbro_median=" << stats::median(gaps["nbro"]) << " " << other
                 << "_median=" << stats::median(gaps[other]);
            try {
                auto test = stats::mood_median_test(gaps["nbro"], gaps[other]);
                line << " mood_stat=" << test.statistic << " p=" << test.p_value;
            } catch (const std::invalid_argument&) {
                line << " mood_stat=degenerate";
            }
            result.test_lines.push_back(line.str());
        }
    }
    return result;
}

void write_manifest(const std::string& path, const std::string& config_text,
                    const HarnessConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    char hash[20];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(fnv1a(config_text)));
    out << "version: nbro 0.1.0\n"
        << "config_hash: " << hash << '\n'
        << "seed: " << cfg.seed << '\n'
        << "scale: " << cfg.scale << '\n'
        << "problem: " << cfg.problem << '\n';
}

}  // namespace nbro
