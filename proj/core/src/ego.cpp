#include "nbro/ego.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "nbro/stats.hpp"

namespace nbro {

namespace {

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

bool same_design(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) return false;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

double min_pairwise_dist(const std::vector<Eigen::VectorXd>& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            best = std::min(best, (pts[i] - pts[j]).squaredNorm());
    return best;
}

// Derivative-free box-constrained maximization by coordinate pattern search
// with step halving.
Eigen::VectorXd pattern_search(const std::function<double(const Eigen::VectorXd&)>& f,
                               Eigen::VectorXd x, const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi, int iters, double tol_frac) {
    Eigen::VectorXd step = 0.1 * (hi - lo);
    Eigen::VectorXd tol = tol_frac * (hi - lo);
    double fx = f(x);
    for (int it = 0; it < iters; ++it) {
        bool improved = false;
        for (Eigen::Index d = 0; d < x.size(); ++d) {
            for (double dir : {1.0, -1.0}) {
                Eigen::VectorXd trial = x;
                trial[d] = std::clamp(trial[d] + dir * step[d], lo[d], hi[d]);
                if (trial[d] == x[d]) continue;
                double ft = f(trial);
                if (ft > fx) {
                    x = trial;
                    fx = ft;
                    improved = true;
                }
            }
        }
        if (!improved) {
            step *= 0.5;
            if ((step.array() < tol.array()).all()) break;
        }
    }
    return x;
}

void append_field(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    if (!line.empty()) line += ',';
    line += buf;
}

}  // namespace

DesignSpace DesignSpace::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
    DesignSpace s;
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    s.validate();
    return s;
}

DesignSpace DesignSpace::finite_set(std::vector<Eigen::VectorXd> candidates) {
    if (candidates.empty()) throw std::invalid_argument("DesignSpace: empty candidate list");
    std::vector<Eigen::VectorXd> unique;
    for (auto& c : candidates) {
        bool dup = false;
        for (const auto& u : unique)
            if (same_design(u, c)) {
                dup = true;
                break;
            }
        if (!dup) unique.push_back(std::move(c));
    }
    DesignSpace s;
    s.candidates = std::move(unique);
    const Eigen::Index d = s.candidates[0].size();
    s.lo = s.candidates[0];
    s.hi = s.candidates[0];
    for (const auto& c : s.candidates) {
        if (c.size() != d) throw std::invalid_argument("DesignSpace: mixed dimensions");
        s.lo = s.lo.cwiseMin(c);
        s.hi = s.hi.cwiseMax(c);
    }
    return s;
}

void DesignSpace::validate() const {
    if (lo.size() == 0 || lo.size() != hi.size())
        throw std::invalid_argument("DesignSpace: bad bounds");
    if (candidates.empty())
        for (Eigen::Index i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw std::invalid_argument("DesignSpace: lo must be < hi");
}

std::vector<Eigen::VectorXd> initial_design(const DesignSpace& space, int s0, Rng& rng) {
    if (s0 < 2) throw std::invalid_argument("initial_design: s0 must be >= 2");
    if (space.finite()) {
        if (static_cast<std::size_t>(s0) > space.candidates.size())
            throw std::invalid_argument("initial_design: s0 exceeds candidate count");
        auto perm = rng.permutation(space.candidates.size());
        std::vector<Eigen::VectorXd> out;
        for (int i = 0; i < s0; ++i) out.push_back(space.candidates[perm[static_cast<std::size_t>(i)]]);
        return out;
    }
    const Eigen::Index d = space.dims();
    auto build = [&](const std::vector<std::vector<std::size_t>>& perms) {
        std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(s0),
                                         Eigen::VectorXd(d));
        for (Eigen::Index k = 0; k < d; ++k)
            for (int i = 0; i < s0; ++i) {
                double u = (static_cast<double>(perms[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]) +
                            rng.uniform()) /
                           static_cast<double>(s0);
                pts[static_cast<std::size_t>(i)][k] = space.lo[k] + u * (space.hi[k] - space.lo[k]);
            }
        return pts;
    };
    std::vector<std::vector<std::size_t>> perms;
    for (Eigen::Index k = 0; k < d; ++k) perms.push_back(rng.permutation(static_cast<std::size_t>(s0)));
    std::vector<Eigen::VectorXd> best = build(perms);
    // normalize distances per dimension when scoring maximin
    auto scaled = [&](const std::vector<Eigen::VectorXd>& pts) {
        std::vector<Eigen::VectorXd> out = pts;
        for (auto& p : out)
            for (Eigen::Index k = 0; k < d; ++k) p[k] = (p[k] - space.lo[k]) / (space.hi[k] - space.lo[k]);
        return out;
    };
    double best_score = min_pairwise_dist(scaled(best));
    for (int attempt = 0; attempt < 40; ++attempt) {
        auto cand_perms = perms;
        // swap two strata in one random dimension, preserving the LHS property
        std::size_t k = rng.uniform_int(static_cast<std::uint64_t>(d));
        std::size_t i = rng.uniform_int(static_cast<std::uint64_t>(s0));
        std::size_t j = rng.uniform_int(static_cast<std::uint64_t>(s0));
        std::swap(cand_perms[k][i], cand_perms[k][j]);
        auto cand = build(cand_perms);
        double score = min_pairwise_dist(scaled(cand));
        if (score > best_score) {
            best_score = score;
            best = std::move(cand);
            perms = std::move(cand_perms);
        }
    }
    return best;
}

double current_best(const GObjectiveModel& m, const std::vector<Eigen::VectorXd>& visited) {
    if (visited.empty()) throw std::invalid_argument("current_best: no visited designs");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : visited) best = std::min(best, m.g_mean(x));
    return best;
}

double expected_improvement(double T, double mu, double sd) {
    if (sd < 0.0) throw std::invalid_argument("expected_improvement: negative sd");
    double delta = T - mu;
    if (sd == 0.0) return std::max(delta, 0.0);
    double z = delta / sd;
    return delta * stats::normal_cdf(z) + sd * stats::normal_pdf(z);
}

EIResult propose_next(const GObjectiveModel& m, const DesignSpace& space,
                      const DistSampler& sampler, const EgoConfig& cfg, double T, Rng& rng) {
    auto score = [&](const Eigen::VectorXd& x) {
        auto e = m.evaluate(x);
        double sd = std::sqrt(e.var);
        return std::pair<double, double>(expected_improvement(T, e.mean, sd), sd);
    };

    // stage 1: pick the design
    Eigen::VectorXd best_x;
    double best_ei = -1.0, best_sd = -1.0;
    Eigen::VectorXd best_sd_x;
    auto consider = [&](const Eigen::VectorXd& x) {
        auto [ei, sd] = score(x);
        if (ei > best_ei || (ei == best_ei && (best_x.size() == 0 || lex_less(x, best_x)))) {
            best_ei = ei;
            best_x = x;
        }
        if (sd > best_sd) {
            best_sd = sd;
            best_sd_x = x;
        }
    };
    if (space.finite()) {
        for (const auto& c : space.candidates) consider(c);
    } else {
        std::vector<std::pair<double, Eigen::VectorXd>> pool;
        for (int i = 0; i < cfg.n_rand; ++i) {
            Eigen::VectorXd x(space.dims());
            for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = rng.uniform(space.lo[k], space.hi[k]);
            consider(x);
            pool.emplace_back(score(x).first, std::move(x));
        }
        std::stable_sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) {
            return a.first > b.first;
        });
        int top = std::min<int>(cfg.refine_top, static_cast<int>(pool.size()));
        for (int i = 0; i < top; ++i) {
            Eigen::VectorXd refined = pattern_search(
                [&](const Eigen::VectorXd& x) { return score(x).first; }, pool[static_cast<std::size_t>(i)].second,
                space.lo, space.hi, cfg.refine_iters, 1e-6);
            consider(refined);
        }
    }

    EIResult out;
    out.T = T;
    bool fallback = !(best_ei > 0.0);
    out.exploration_fallback = fallback;
    out.x = fallback ? best_sd_x : best_x;

    // stage 2: pick the distribution candidate at the chosen design
    std::vector<DistTuple> pcands = m.atoms();
    for (int i = 0; i < cfg.n_fresh; ++i) pcands.push_back(sampler(rng));
    double pick_ei = -1.0, pick_sd = -1.0;
    for (const auto& p : pcands) {
        auto la = m.lookahead(out.x, p, cfg.reps);
        double ei = expected_improvement(T, la.mu_prime, la.sigma_prime);
        bool better = fallback ? (la.sigma_prime > pick_sd) : (ei > pick_ei);
        if (better || out.dists.empty()) {
            pick_ei = ei;
            pick_sd = la.sigma_prime;
            out.dists = p;
            out.ei_value = ei;
            out.mu_prime = la.mu_prime;
            out.sigma_prime = la.sigma_prime;
        }
    }
    return out;
}

RunResult ego_run(const DesignSpace& space, const Simulator& sim, const DistSampler& sampler,
                  const EgoConfig& cfg, const Rng& root) {
    space.validate();
    if (cfg.reps < 2) throw std::invalid_argument("ego_run: reps must be >= 2");
    if (cfg.n_mc < 1) throw std::invalid_argument("ego_run: n_mc must be >= 1");
    const Eigen::Index d = space.dims();
    int s0 = cfg.s0 > 0 ? cfg.s0 : static_cast<int>(10 * d);
    if (cfg.budget < s0) throw std::invalid_argument("ego_run: budget below initial design size");

    RunResult result;
    OptState& state = result.state;
    state.budget = cfg.budget;
    state.seed = root.seed();

    Rng design_rng = root.substream("initial-design");
    auto xs = initial_design(space, s0, design_rng);
    Rng dist_rng = root.substream("initial-dists");
    Rng sim_rng = root.substream("simulate");

    TrainingSet train;
    train.means.resize(s0);
    double var_sum = 0.0;
    for (int i = 0; i < s0; ++i) {
        DistTuple p = sampler(dist_rng);
        Rng r = sim_rng.substream("point", static_cast<std::uint64_t>(i));
        std::vector<double> ys;
        for (int k = 0; k < cfg.reps; ++k) ys.push_back(sim(xs[static_cast<std::size_t>(i)], p, r));
        double ybar = stats::mean(ys);
        var_sum += stats::variance(ys);
        train.points.push_back({xs[static_cast<std::size_t>(i)], p});
        train.means[i] = ybar;
        train.reps.push_back(cfg.reps);

        EvalRecord rec;
        rec.iteration = 0;
        rec.x = xs[static_cast<std::size_t>(i)];
        rec.dists = std::move(p);
        rec.ybar = ybar;
        rec.reps = cfg.reps;
        state.history.push_back(std::move(rec));
        bool seen = false;
        for (const auto& v : state.visited)
            if (same_design(v, xs[static_cast<std::size_t>(i)])) {
                seen = true;
                break;
            }
        if (!seen) state.visited.push_back(xs[static_cast<std::size_t>(i)]);
    }
    train.pooled_var = var_sum / s0;
    state.used = s0;

    Rng fit_rng = root.substream("fit");
    GPModel model = GPModel::fit(train, HyperBounds::defaults(train), cfg.restarts, fit_rng);
    if (model.train().size() >= 3) result.loo = model.loo_cv();

    auto recommend = [&](const GPModel& mdl, const std::vector<DistTuple>& at) {
        GObjectiveModel gm(mdl, at);
        double best = std::numeric_limits<double>::infinity();
        Eigen::VectorXd arg;
        for (const auto& x : state.visited) {
            double mu = gm.g_mean(x);
            if (mu < best) {
                best = mu;
                arg = x;
            }
        }
        return std::pair<double, Eigen::VectorXd>(best, arg);
    };
    auto is_checkpoint = [&](int used) {
        return std::find(cfg.checkpoints.begin(), cfg.checkpoints.end(), used) !=
               cfg.checkpoints.end();
    };
    if (is_checkpoint(state.used)) {
        Rng cp_rng = root.substream("checkpoint-atoms", static_cast<std::uint64_t>(state.used));
        std::vector<DistTuple> cp_atoms;
        for (int i = 0; i < cfg.n_mc; ++i) cp_atoms.push_back(sampler(cp_rng));
        result.checkpoint_recs.emplace_back(state.used, recommend(model, cp_atoms).second);
    }

    std::vector<DistTuple> atoms;
    int iter = 0;
    while (state.used < cfg.budget) {
        ++iter;
        Rng it_rng = root.substream("iter", static_cast<std::uint64_t>(iter));
        Rng atom_rng = it_rng.substream("atoms");
        atoms.clear();
        for (int i = 0; i < cfg.n_mc; ++i) atoms.push_back(sampler(atom_rng));
        GObjectiveModel m(model, atoms);
        double T = current_best(m, state.visited);

        Rng prop_rng = it_rng.substream("propose");
        EIResult prop = propose_next(m, space, sampler, cfg, T, prop_rng);

        Rng eval_rng = it_rng.substream("evaluate");
        std::vector<double> ys;
        for (int k = 0; k < cfg.reps; ++k) ys.push_back(sim(prop.x, prop.dists, eval_rng));
        double ybar = stats::mean(ys);

        Rng refit_rng = it_rng.substream("refit");
        model = model.update({prop.x, prop.dists}, ybar, cfg.reps, cfg.refit_every,
                             HyperBounds::defaults(model.train()), cfg.restarts, refit_rng);

        EvalRecord rec;
        rec.iteration = iter;
        rec.x = prop.x;
        rec.dists = prop.dists;
        rec.ybar = ybar;
        rec.reps = cfg.reps;
        rec.T = T;
        rec.ei_value = prop.ei_value;
        rec.has_ei = true;
        state.history.push_back(std::move(rec));
        bool seen = false;
        for (const auto& v : state.visited)
            if (same_design(v, prop.x)) {
                seen = true;
                break;
            }
        if (!seen) state.visited.push_back(prop.x);
        ++state.used;

        if (is_checkpoint(state.used))
            result.checkpoint_recs.emplace_back(state.used, recommend(model, atoms).second);

        if (cfg.ei_stop >= 0.0 && prop.ei_value <= cfg.ei_stop) break;
    }

    if (atoms.empty()) {
        Rng atom_rng = root.substream("recommend-atoms");
        for (int i = 0; i < cfg.n_mc; ++i) atoms.push_back(sampler(atom_rng));
    }
    auto [best, arg] = recommend(model, atoms);
    result.mu_hat = best;
    result.x_hat = arg;
    state.model = std::move(model);
    return result;
}

void write_history_csv(const RunResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    const auto& hist = result.state.history;
    if (hist.empty()) {
        out << "iteration\n";
        return;
    }
    const Eigen::Index d = hist[0].x.size();
    const std::size_t l = hist[0].dists.size();
    out << "iteration";
    for (Eigen::Index k = 0; k < d; ++k) out << ",x" << (k + 1);
    for (std::size_t j = 0; j < l; ++j)
        out << ",p" << (j + 1) << "_mean,p" << (j + 1) << "_sd,p" << (j + 1) << "_atoms";
    out << ",ybar,reps,T,ei,mu_recommend\n";
    for (const auto& rec : hist) {
        std::string line;
        append_field(line, rec.iteration);
        for (Eigen::Index k = 0; k < d; ++k) append_field(line, rec.x[k]);
        for (const auto& p : rec.dists) {
            append_field(line, p->mean());
            append_field(line, std::sqrt(p->variance()));
            append_field(line, static_cast<double>(p->size()));
        }
        append_field(line, rec.ybar);
        append_field(line, rec.reps);
        if (rec.has_ei) {
            append_field(line, rec.T);
            append_field(line, rec.ei_value);
        } else {
            line += ",,";
        }
        append_field(line, result.mu_hat);
        out << line << '\n';
    }
}

}  // namespace nbro
