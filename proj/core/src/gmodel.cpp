#include "nbro/gmodel.hpp"

#include <cmath>
#include <stdexcept>

namespace nbro {

GObjectiveModel::GObjectiveModel(GPModel model, std::vector<DistTuple> atoms)
    : model_(std::move(model)), atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw std::invalid_argument("GObjectiveModel: need at least one atom");
    const auto& train = model_.train();
    const std::size_t l = train.points[0].dists.size();
    for (const auto& a : atoms_)
        if (a.size() != l)
            throw std::invalid_argument("GObjectiveModel: atom dimension mismatch");

    const std::size_t s = train.size();
    const std::size_t n = atoms_.size();
    const auto& params = model_.params();
    WdCache* cache = model_.cache().get();

    bbar_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s));
    for (std::size_t t = 0; t < s; ++t) {
        double acc = 0.0;
        for (const auto& a : atoms_)
            acc += dist_correlation(train.points[t].dists, a, params.theta_p, cache);
        bbar_[static_cast<Eigen::Index>(t)] = params.tau2 * acc / static_cast<double>(n);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += 1.0;  // diagonal, r_M = 1
        for (std::size_t j = i + 1; j < n; ++j)
            acc += 2.0 * dist_correlation(atoms_[i], atoms_[j], params.theta_p, cache);
    }
    mbar_ = params.tau2 * acc / static_cast<double>(n * n);
}

GObjectiveModel::DesignStats GObjectiveModel::design_stats(const Eigen::VectorXd& x) const {
    const auto& train = model_.train();
    const std::size_t s = train.size();
    DesignStats st;
    st.kbar.resize(static_cast<Eigen::Index>(s));
    for (std::size_t t = 0; t < s; ++t)
        st.kbar[static_cast<Eigen::Index>(t)] =
            design_correlation(x, train.points[t].x, model_.params().theta_x) *
            bbar_[static_cast<Eigen::Index>(t)];
    st.z = model_.solve(st.kbar);
    st.etabar = 1.0 - model_.cinv_one().dot(st.kbar);
    st.mean = model_.beta0() + st.kbar.dot(model_.cinv_residual());
    return st;
}

double GObjectiveModel::g_mean(const Eigen::VectorXd& x) const { return design_stats(x).mean; }

double GObjectiveModel::g_cov(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
    DesignStats sx = design_stats(x);
    bool same = (&x == &y) || x == y;
    DesignStats sy = same ? sx : design_stats(y);
    double rx = same ? 1.0 : design_correlation(x, y, model_.params().theta_x);
    double v = rx * mbar_ - sx.kbar.dot(sy.z) + sx.etabar * sy.etabar / model_.one_cinv_one();
    if (same && v < 0.0) {
        ++clamps_;
        v = 0.0;
    }
    return v;
}

GObjectiveModel::Eval GObjectiveModel::evaluate(const Eigen::VectorXd& x) const {
    DesignStats st = design_stats(x);
    double v = mbar_ - st.kbar.dot(st.z) + st.etabar * st.etabar / model_.one_cinv_one();
    if (v < 0.0) {
        ++clamps_;
        v = 0.0;
    }
    return {st.mean, v};
}

GObjectiveModel::Lookahead GObjectiveModel::lookahead(const Eigen::VectorXd& x_next,
                                                      const DistTuple& p_next, int reps) const {
    if (reps < 1) throw std::invalid_argument("lookahead: reps must be >= 1");
    const auto& params = model_.params();
    WdCache* cache = model_.cache().get();
    GPPoint next{x_next, p_next};

    double denom = model_.posterior_var(next) + model_.noise_var() / reps;
    if (!(denom > 0.0)) throw std::runtime_error("lookahead: nonpositive denominator");

    // atom-averaged k_s((x_next, P_i), next), linear in the atoms so it only
    // needs the averaged correlation pieces
    Eigen::VectorXd kn = params.tau2 * model_.corr_vector(next);
    Eigen::VectorXd zn = model_.solve(kn);
    double eta_n = 1.0 - model_.cinv_one().dot(kn);
    double rmbar = 0.0;
    for (const auto& a : atoms_)
        rmbar += dist_correlation(a, p_next, params.theta_p, cache);
    rmbar /= static_cast<double>(atoms_.size());
    DesignStats st = design_stats(x_next);
    double ubar = params.tau2 * rmbar - st.kbar.dot(zn) + st.etabar * eta_n / model_.one_cinv_one();

    double cxx = mbar_ - st.kbar.dot(st.z) + st.etabar * st.etabar / model_.one_cinv_one();
    double mean_shift_var = ubar * ubar / denom;
    double reduced = cxx - mean_shift_var;
    if (reduced < 0.0) {
        ++clamps_;
        reduced = 0.0;
    }
    return {st.mean, std::sqrt(reduced + mean_shift_var)};
}

}  // namespace nbro
