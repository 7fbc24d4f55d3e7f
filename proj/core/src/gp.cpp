#include "nbro/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace nbro {

namespace {

bool same_tuple(const DistTuple& a, const DistTuple& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a[j].get() == b[j].get()) continue;
        if (!(*a[j] == *b[j])) return false;
    }
    return true;
}

// Distance structures shared by all likelihood evaluations of one fit.
struct DistanceData {
    std::vector<Eigen::MatrixXd> dx2;  // per design dim, squared differences
    std::vector<Eigen::MatrixXd> wd;   // per input dim, WD values

    static DistanceData build(const TrainingSet& train, WdCache* cache) {
        DistanceData out;
        const std::size_t s = train.size();
        const Eigen::Index d = train.points[0].x.size();
        const std::size_t l = train.points[0].dists.size();
        out.dx2.assign(static_cast<std::size_t>(d), Eigen::MatrixXd::Zero(s, s));
        out.wd.assign(l, Eigen::MatrixXd::Zero(s, s));
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = i + 1; j < s; ++j) {
                for (Eigen::Index k = 0; k < d; ++k) {
                    double diff = train.points[i].x[k] - train.points[j].x[k];
                    out.dx2[static_cast<std::size_t>(k)](i, j) =
                        out.dx2[static_cast<std::size_t>(k)](j, i) = diff * diff;
                }
                for (std::size_t m = 0; m < l; ++m) {
                    double v = cache->distance(train.points[i].dists[m],
                                               train.points[j].dists[m]);
                    out.wd[m](i, j) = out.wd[m](j, i) = v;
                }
            }
        return out;
    }

    Eigen::MatrixXd correlation(const KernelParams& p) const {
        const Eigen::Index s = dx2.empty() ? wd[0].rows() : dx2[0].rows();
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(s, s);
        for (std::size_t k = 0; k < dx2.size(); ++k)
            e -= dx2[k] / (2.0 * p.theta_x[static_cast<Eigen::Index>(k)] *
                           p.theta_x[static_cast<Eigen::Index>(k)]);
        for (std::size_t m = 0; m < wd.size(); ++m)
            e -= wd[m] / (2.0 * p.theta_p[static_cast<Eigen::Index>(m)] *
                          p.theta_p[static_cast<Eigen::Index>(m)]);
        return e.array().exp().matrix();
    }
};

Eigen::VectorXd noise_diag(const TrainingSet& train) {
    Eigen::VectorXd d(train.size());
    for (std::size_t i = 0; i < train.size(); ++i)
        d[static_cast<Eigen::Index>(i)] = train.pooled_var / train.reps[i];
    return d;
}

constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

// 0.5 log|C| + 0.5 r' C^{-1} r + 0.5 log(1' C^{-1} 1) up to constants,
// with the trend profiled out by GLS.
double nll_given_R(const Eigen::MatrixXd& R, const TrainingSet& train, double tau2) {
    const Eigen::Index s = R.rows();
    Eigen::VectorXd noise = noise_diag(train);
    for (double j : kJitterLadder) {
        Eigen::MatrixXd C = tau2 * R;
        C.diagonal() += noise;
        C.diagonal().array() += j * tau2;
        Eigen::LLT<Eigen::MatrixXd> llt(C);
        if (llt.info() != Eigen::Success) continue;
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < s; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
        Eigen::VectorXd one = Eigen::VectorXd::Ones(s);
        Eigen::VectorXd ci_one = llt.solve(one);
        Eigen::VectorXd ci_y = llt.solve(train.means);
        double s1 = one.dot(ci_one);
        if (!(s1 > 0.0)) continue;
        double beta = one.dot(ci_y) / s1;
        Eigen::VectorXd r = train.means - beta * one;
        double quad = r.dot(llt.solve(r));
        return 0.5 * (logdet + quad + std::log(s1));
    }
    return std::numeric_limits<double>::infinity();
}

struct LogBox {
    Eigen::VectorXd lo, hi;  // in log space

    Eigen::VectorXd clamp(const Eigen::VectorXd& v) const {
        return v.cwiseMax(lo).cwiseMin(hi);
    }
};

KernelParams unpack(const Eigen::VectorXd& logv, Eigen::Index d, Eigen::Index l) {
    KernelParams p;
    p.theta_x = logv.head(d).array().exp().matrix();
    p.theta_p = logv.segment(d, l).array().exp().matrix();
    p.tau2 = std::exp(logv[d + l]);
    return p;
}

// Nelder-Mead with box projection; good enough for the <= 6 dimensional
// hyperparameter spaces here.
Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x0, const LogBox& box, int max_iter) {
    const Eigen::Index n = x0.size();
    std::vector<Eigen::VectorXd> pts;
    std::vector<double> vals;
    pts.push_back(box.clamp(x0));
    vals.push_back(f(pts[0]));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd p = pts[0];
        double step = 0.25 * (box.hi[i] - box.lo[i]);
        p[i] = (p[i] + step <= box.hi[i]) ? p[i] + step : p[i] - step;
        pts.push_back(box.clamp(p));
        vals.push_back(f(pts.back()));
    }
    auto order = [&]() {
        std::vector<std::size_t> idx(pts.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return vals[a] < vals[b];
        });
        std::vector<Eigen::VectorXd> p2;
        std::vector<double> v2;
        for (std::size_t k : idx) {
            p2.push_back(pts[k]);
            v2.push_back(vals[k]);
        }
        pts.swap(p2);
        vals.swap(v2);
    };
    for (int it = 0; it < max_iter; ++it) {
        order();
        if (std::fabs(vals.back() - vals.front()) < 1e-10 * (1.0 + std::fabs(vals.front())))
            break;
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) centroid += pts[i];
        centroid /= static_cast<double>(n);
        Eigen::VectorXd xr = box.clamp(centroid + (centroid - pts.back()));
        double fr = f(xr);
        if (fr < vals.front()) {
            Eigen::VectorXd xe = box.clamp(centroid + 2.0 * (centroid - pts.back()));
            double fe = f(xe);
            if (fe < fr) {
                pts.back() = xe;
                vals.back() = fe;
            } else {
                pts.back() = xr;
                vals.back() = fr;
            }
        } else if (fr < vals[vals.size() - 2]) {
            pts.back() = xr;
            vals.back() = fr;
        } else {
            Eigen::VectorXd xc = box.clamp(centroid + 0.5 * (pts.back() - centroid));
            double fc = f(xc);
            if (fc < vals.back()) {
                pts.back() = xc;
                vals.back() = fc;
            } else {
                for (std::size_t i = 1; i < pts.size(); ++i) {
                    pts[i] = box.clamp(pts[0] + 0.5 * (pts[i] - pts[0]));
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    order();
    return pts[0];
}

}  // namespace

bool same_point(const GPPoint& a, const GPPoint& b) {
    if (a.x.size() != b.x.size()) return false;
    for (Eigen::Index i = 0; i < a.x.size(); ++i)
        if (a.x[i] != b.x[i]) return false;
    return same_tuple(a.dists, b.dists);
}

void TrainingSet::validate() const {
    if (points.size() < 2) throw std::invalid_argument("TrainingSet: need at least 2 points");
    if (static_cast<std::size_t>(means.size()) != points.size() || reps.size() != points.size())
        throw std::invalid_argument("TrainingSet: size mismatch");
    if (pooled_var < 0.0) throw std::invalid_argument("TrainingSet: negative pooled variance");
    for (int r : reps)
        if (r < 1) throw std::invalid_argument("TrainingSet: replications must be >= 1");
    for (const auto& p : points) {
        if (p.x.size() != points[0].x.size() || p.dists.size() != points[0].dists.size())
            throw std::invalid_argument("TrainingSet: inhomogeneous point dimensions");
    }
}

HyperBounds HyperBounds::defaults(const TrainingSet& train) {
    train.validate();
    const Eigen::Index d = train.points[0].x.size();
    const std::size_t l = train.points[0].dists.size();
    HyperBounds b;
    b.theta_x_lo.resize(d);
    b.theta_x_hi.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) {
        double lo = train.points[0].x[k], hi = lo;
        for (const auto& p : train.points) {
            lo = std::min(lo, p.x[k]);
            hi = std::max(hi, p.x[k]);
        }
        double range = hi - lo;
        if (!(range > 0.0)) range = 1.0;
        b.theta_x_lo[k] = 1e-2 * range;
        b.theta_x_hi[k] = 1e2 * range;
    }
    b.theta_p_lo.resize(static_cast<Eigen::Index>(l));
    b.theta_p_hi.resize(static_cast<Eigen::Index>(l));
    for (std::size_t m = 0; m < l; ++m) {
        double maxwd = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i)
            for (std::size_t j = i + 1; j < train.size(); ++j)
                maxwd = std::max(maxwd, quadratic_wasserstein(*train.points[i].dists[m],
                                                              *train.points[j].dists[m]));
        double range = std::sqrt(maxwd);
        if (!(range > 0.0)) range = 1.0;
        b.theta_p_lo[static_cast<Eigen::Index>(m)] = 1e-2 * range;
        b.theta_p_hi[static_cast<Eigen::Index>(m)] = 1e2 * range;
    }
    double v = 0.0;
    double mbar = train.means.mean();
    for (Eigen::Index i = 0; i < train.means.size(); ++i)
        v += (train.means[i] - mbar) * (train.means[i] - mbar);
    v /= std::max<double>(1.0, static_cast<double>(train.means.size() - 1));
    v = std::max(v, 1e-8);
    b.tau2_lo = 1e-4 * v;
    b.tau2_hi = 1e2 * v;
    return b;
}

double GPModel::negative_log_likelihood(const TrainingSet& train, const KernelParams& params,
                                        WdCache* cache) {
    WdCache local;
    DistanceData dd = DistanceData::build(train, cache ? cache : &local);
    return nll_given_R(dd.correlation(params), train, params.tau2);
}

GPModel GPModel::fit(TrainingSet train, const HyperBounds& bounds, int restarts, Rng& rng) {
    train.validate();
    if (restarts < 1) throw std::invalid_argument("fit: restarts must be >= 1");
    auto cache = std::make_shared<WdCache>();
    DistanceData dd = DistanceData::build(train, cache.get());
    const Eigen::Index d = train.points[0].x.size();
    const Eigen::Index l = static_cast<Eigen::Index>(train.points[0].dists.size());
    const Eigen::Index nv = d + l + 1;

    LogBox box;
    box.lo.resize(nv);
    box.hi.resize(nv);
    for (Eigen::Index k = 0; k < d; ++k) {
        box.lo[k] = std::log(bounds.theta_x_lo[k]);
        box.hi[k] = std::log(bounds.theta_x_hi[k]);
    }
    for (Eigen::Index m = 0; m < l; ++m) {
        box.lo[d + m] = std::log(bounds.theta_p_lo[m]);
        box.hi[d + m] = std::log(bounds.theta_p_hi[m]);
    }
    box.lo[d + l] = std::log(bounds.tau2_lo);
    box.hi[d + l] = std::log(bounds.tau2_hi);

    auto objective = [&](const Eigen::VectorXd& logv) -> double {
        KernelParams p = unpack(box.clamp(logv), d, l);
        return nll_given_R(dd.correlation(p), train, p.tau2);
    };

    // Latin-hypercube starts in log space
    Rng start_rng = rng.substream("fit-starts");
    std::vector<Eigen::VectorXd> starts;
    {
        std::vector<std::vector<std::size_t>> perms;
        for (Eigen::Index k = 0; k < nv; ++k)
            perms.push_back(start_rng.permutation(static_cast<std::size_t>(restarts)));
        for (int r = 0; r < restarts; ++r) {
            Eigen::VectorXd v(nv);
            for (Eigen::Index k = 0; k < nv; ++k) {
                double u = (static_cast<double>(perms[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)]) +
                            start_rng.uniform()) /
                           static_cast<double>(restarts);
                v[k] = box.lo[k] + u * (box.hi[k] - box.lo[k]);
            }
            starts.push_back(v);
        }
    }

    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_v = 0.5 * (box.lo + box.hi);
    for (const auto& s0 : starts) {
        Eigen::VectorXd v = nelder_mead(objective, s0, box, 200);
        double val = objective(v);
        if (val < best) {
            best = val;
            best_v = v;
        }
    }
    if (!std::isfinite(best))
        throw std::runtime_error("GP fit failed: covariance not SPD at any candidate");

    GPModel model;
    model.params_ = unpack(box.clamp(best_v), d, l);
    model.train_ = std::move(train);
    model.cache_ = cache;
    model.loglik_ = -best;
    model.updates_since_fit_ = 0;
    model.factorize();
    return model;
}

GPModel GPModel::with_params(TrainingSet train, KernelParams params) {
    train.validate();
    params.validate();
    GPModel model;
    model.params_ = std::move(params);
    model.train_ = std::move(train);
    model.cache_ = std::make_shared<WdCache>();
    model.loglik_ = -negative_log_likelihood(model.train_, model.params_, model.cache_.get());
    model.updates_since_fit_ = 0;
    model.factorize();
    return model;
}

void GPModel::factorize() {
    DistanceData dd = DistanceData::build(train_, cache_.get());
    Eigen::MatrixXd R = dd.correlation(params_);
    Eigen::VectorXd noise = noise_diag(train_);
    for (double j : kJitterLadder) {
        Eigen::MatrixXd C = params_.tau2 * R;
        C.diagonal() += noise;
        C.diagonal().array() += j * params_.tau2;
        llt_.compute(C);
        if (llt_.info() == Eigen::Success) {
            jitter_ = j * params_.tau2;
            Eigen::VectorXd one = Eigen::VectorXd::Ones(C.rows());
            cinv_one_ = llt_.solve(one);
            one_cinv_one_ = one.dot(cinv_one_);
            beta0_ = one.dot(llt_.solve(train_.means)) / one_cinv_one_;
            alpha_ = llt_.solve(train_.means - beta0_ * one);
            return;
        }
    }
    throw std::runtime_error("GPModel: covariance not SPD after maximum jitter");
}

Eigen::VectorXd GPModel::corr_vector(const GPPoint& p) const {
    const std::size_t s = train_.size();
    Eigen::VectorXd k(static_cast<Eigen::Index>(s));
    for (std::size_t i = 0; i < s; ++i) {
        k[static_cast<Eigen::Index>(i)] =
            design_correlation(p.x, train_.points[i].x, params_.theta_x) *
            dist_correlation(p.dists, train_.points[i].dists, params_.theta_p, cache_.get());
    }
    return k;
}

Eigen::VectorXd GPModel::solve(const Eigen::VectorXd& v) const { return llt_.solve(v); }

double GPModel::posterior_mean(const GPPoint& p) const {
    Eigen::VectorXd k = params_.tau2 * corr_vector(p);
    return beta0_ + k.dot(alpha_);
}

double GPModel::posterior_cov(const GPPoint& p1, const GPPoint& p2) const {
    Eigen::VectorXd k1 = params_.tau2 * corr_vector(p1);
    Eigen::VectorXd k2 = (&p1 == &p2) ? k1 : (params_.tau2 * corr_vector(p2)).eval();
    double r12 = pair_correlation(p1.x, p1.dists, p2.x, p2.dists, params_, cache_.get());
    double eta1 = 1.0 - cinv_one_.dot(k1);
    double eta2 = (&p1 == &p2) ? eta1 : 1.0 - cinv_one_.dot(k2);
    return params_.tau2 * r12 - k1.dot(llt_.solve(k2)) + eta1 * eta2 / one_cinv_one_;
}

GPModel GPModel::update(const GPPoint& p, double ybar, int new_reps, int refit_every,
                        const HyperBounds& bounds, int restarts, Rng& rng) const {
    TrainingSet next = train_;
    bool merged = false;
    for (std::size_t i = 0; i < next.size(); ++i) {
        if (same_point(next.points[i], p)) {
            double r_old = next.reps[i];
            next.means[static_cast<Eigen::Index>(i)] =
                (next.means[static_cast<Eigen::Index>(i)] * r_old + ybar * new_reps) /
                (r_old + new_reps);
            next.reps[i] += new_reps;
            merged = true;
            break;
        }
    }
    if (!merged) {
        next.points.push_back(p);
        next.means.conservativeResize(next.means.size() + 1);
        next.means[next.means.size() - 1] = ybar;
        next.reps.push_back(new_reps);
    }
    int count = updates_since_fit_ + 1;
    if (count >= refit_every) {
        return fit(std::move(next), bounds, restarts, rng);
    }
    GPModel model = with_params(std::move(next), params_);
    model.updates_since_fit_ = count;
    return model;
}

LooSummary GPModel::loo_cv() const {
    const std::size_t s = train_.size();
    if (s < 3) throw std::invalid_argument("loo_cv: need at least 3 training points");
    LooSummary out;
    double abs_err = 0.0;
    int inside = 0;
    for (std::size_t leave = 0; leave < s; ++leave) {
        TrainingSet sub;
        sub.pooled_var = train_.pooled_var;
        sub.means.resize(static_cast<Eigen::Index>(s - 1));
        Eigen::Index j = 0;
        for (std::size_t i = 0; i < s; ++i) {
            if (i == leave) continue;
            sub.points.push_back(train_.points[i]);
            sub.means[j++] = train_.means[static_cast<Eigen::Index>(i)];
            sub.reps.push_back(train_.reps[i]);
        }
        GPModel m = with_params(std::move(sub), params_);
        double mu = m.posterior_mean(train_.points[leave]);
        double var = std::max(0.0, m.posterior_var(train_.points[leave])) +
                     train_.pooled_var / train_.reps[leave];
        double sd = std::sqrt(var);
        double actual = train_.means[static_cast<Eigen::Index>(leave)];
        out.records.push_back({mu, sd, actual});
        abs_err += std::fabs(mu - actual);
        if (std::fabs(actual - mu) <= 1.959963984540054 * sd) ++inside;
    }
    out.mean_abs_error = abs_err / static_cast<double>(s);
    out.coverage95 = static_cast<double>(inside) / static_cast<double>(s);
    return out;
}

std::string GPModel::serialize() const {
    nlohmann::json j;
    j["kind"] = "nbro-gp-model";
    j["version"] = 1;
    j["theta_x"] = std::vector<double>(params_.theta_x.data(),
                                       params_.theta_x.data() + params_.theta_x.size());
    j["theta_p"] = std::vector<double>(params_.theta_p.data(),
                                       params_.theta_p.data() + params_.theta_p.size());
    j["tau2"] = params_.tau2;
    j["pooled_var"] = train_.pooled_var;
    j["reps"] = train_.reps;
    j["means"] = std::vector<double>(train_.means.data(),
                                     train_.means.data() + train_.means.size());
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : train_.points) {
        nlohmann::json jp;
        jp["x"] = std::vector<double>(p.x.data(), p.x.data() + p.x.size());
        nlohmann::json dists = nlohmann::json::array();
        for (const auto& dptr : p.dists) {
            nlohmann::json jd;
            jd["support"] = dptr->support();
            jd["weights"] = dptr->weights();
            dists.push_back(std::move(jd));
        }
        jp["dists"] = std::move(dists);
        pts.push_back(std::move(jp));
    }
    j["points"] = std::move(pts);
    return j.dump(2);
}

GPModel GPModel::deserialize(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("kind") != "nbro-gp-model") throw std::runtime_error("not a gp model file");
    KernelParams params;
    auto tx = j.at("theta_x").get<std::vector<double>>();
    auto tp = j.at("theta_p").get<std::vector<double>>();
    params.theta_x = Eigen::Map<Eigen::VectorXd>(tx.data(), static_cast<Eigen::Index>(tx.size()));
    params.theta_p = Eigen::Map<Eigen::VectorXd>(tp.data(), static_cast<Eigen::Index>(tp.size()));
    params.tau2 = j.at("tau2").get<double>();
    TrainingSet train;
    train.pooled_var = j.at("pooled_var").get<double>();
    train.reps = j.at("reps").get<std::vector<int>>();
    auto means = j.at("means").get<std::vector<double>>();
    train.means = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<Eigen::Index>(means.size()));
    for (const auto& jp : j.at("points")) {
        GPPoint p;
        auto x = jp.at("x").get<std::vector<double>>();
        p.x = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
        for (const auto& jd : jp.at("dists")) {
            p.dists.push_back(std::make_shared<DiscreteDistribution>(
                jd.at("support").get<std::vector<double>>(),
                jd.at("weights").get<std::vector<double>>()));
        }
        train.points.push_back(std::move(p));
    }
    return with_params(std::move(train), std::move(params));
}

}  // namespace nbro
