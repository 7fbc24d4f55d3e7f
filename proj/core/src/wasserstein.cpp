#include "nbro/wasserstein.hpp"

#include <cmath>
#include <stdexcept>

namespace nbro {

double quadratic_wasserstein(const DiscreteDistribution& q, const DiscreteDistribution& r) {
    if (&q == &r) return 0.0;
    const auto& qs = q.support();
    const auto& rs = r.support();
    const auto& qc = q.cumulative();
    const auto& rc = r.cumulative();
    std::size_t i = 0, j = 0;
    double prev = 0.0, acc = 0.0;
    while (i < qs.size() && j < rs.size()) {
        double level = std::min(qc[i], rc[j]);
        double du = level - prev;
        if (du > 0.0) {
            double d = qs[i] - rs[j];
            acc += du * d * d;
            prev = level;
        }
        if (qc[i] <= level) ++i;
        if (rc[j] <= level) ++j;
    }
    return acc;
}

void KernelParams::validate() const {
    if (!(tau2 > 0.0)) throw std::invalid_argument("KernelParams: tau2 must be positive");
    for (Eigen::Index i = 0; i < theta_x.size(); ++i)
        if (!(theta_x[i] > 0.0)) throw std::invalid_argument("KernelParams: theta_x must be positive");
    for (Eigen::Index i = 0; i < theta_p.size(); ++i)
        if (!(theta_p[i] > 0.0)) throw std::invalid_argument("KernelParams: theta_p must be positive");
}

double WdCache::distance(const DistPtr& a, const DistPtr& b) {
    if (a.get() == b.get()) return 0.0;
    auto key = a.get() < b.get()
                   ? std::make_pair(static_cast<const void*>(a.get()),
                                    static_cast<const void*>(b.get()))
                   : std::make_pair(static_cast<const void*>(b.get()),
                                    static_cast<const void*>(a.get()));
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = map_.find(key);
        if (it != map_.end()) {
            // a recycled address means the entry belongs to dead objects
            if (!it->second.a.expired() && !it->second.b.expired()) return it->second.value;
            map_.erase(it);
        }
    }
    double d = quadratic_wasserstein(*a, *b);
    std::lock_guard<std::mutex> lock(mu_);
    map_[key] = Entry{a, b, d};
    return d;
}

std::size_t WdCache::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return map_.size();
}

double dist_correlation(const DistTuple& a, const DistTuple& b,
                        const Eigen::VectorXd& theta_p, WdCache* cache) {
    if (a.size() != b.size() || static_cast<Eigen::Index>(a.size()) != theta_p.size())
        throw std::invalid_argument("dist_correlation: dimension mismatch");
    double e = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double wd = cache ? cache->distance(a[j], b[j])
                          : (a[j].get() == b[j].get() ? 0.0 : quadratic_wasserstein(*a[j], *b[j]));
        e += wd / (2.0 * theta_p[static_cast<Eigen::Index>(j)] * theta_p[static_cast<Eigen::Index>(j)]);
    }
    return std::exp(-e);
}

double design_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& theta_x) {
    if (x.size() != y.size() || x.size() != theta_x.size())
        throw std::invalid_argument("design_correlation: dimension mismatch");
    double e = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        e += d * d / (2.0 * theta_x[i] * theta_x[i]);
    }
    return std::exp(-e);
}

double pair_correlation(const Eigen::VectorXd& x, const DistTuple& px,
                        const Eigen::VectorXd& y, const DistTuple& py,
                        const KernelParams& params, WdCache* cache) {
    params.validate();
    return design_correlation(x, y, params.theta_x) *
           dist_correlation(px, py, params.theta_p, cache);
}

}  // namespace nbro
