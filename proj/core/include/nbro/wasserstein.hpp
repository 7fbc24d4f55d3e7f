#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <mutex>
#include <unordered_map>

#include "nbro/distribution.hpp"

namespace nbro {

// Quadratic Wasserstein transport value between two univariate discrete
// distributions: WD(Q,R) = int_0^1 (F_Q^{-1}(u) - F_R^{-1}(u))^2 du, computed
// exactly by merging the two cumulative-weight breakpoint sequences.  Note
// this is the squared-cost value itself, not its square root; the kernel
// consumes it directly.
double quadratic_wasserstein(const DiscreteDistribution& q, const DiscreteDistribution& r);

// Correlation kernel hyperparameters: design length scales theta_x (one per
// design dimension), distribution length scales theta_p (one per input
// dimension), and the process variance tau2.
struct KernelParams {
    Eigen::VectorXd theta_x;
    Eigen::VectorXd theta_p;
    double tau2 = 1.0;

    void validate() const;
};

// Memoizes WD values per unordered distribution pair.  Keys are object
// addresses (distributions are immutable and shared), but a freed
// distribution's address can be recycled by a later allocation, so each
// entry also holds weak references and is dropped once either side dies.
class WdCache {
public:
    double distance(const DistPtr& a, const DistPtr& b);
    std::size_t size() const;

private:
    struct Entry {
        std::weak_ptr<const DiscreteDistribution> a, b;
        double value;
    };
    struct KeyHash {
        std::size_t operator()(const std::pair<const void*, const void*>& k) const {
            auto h1 = std::hash<const void*>{}(k.first);
            auto h2 = std::hash<const void*>{}(k.second);
            return h1 ^ (h2 * 0x9e3779b97f4a7c15ULL);
        }
    };
    mutable std::mutex mu_;
    std::unordered_map<std::pair<const void*, const void*>, Entry, KeyHash> map_;
};

// exp{-sum_j WD(P_j, P'_j) / (2 theta_p_j^2)}
double dist_correlation(const DistTuple& a, const DistTuple& b,
                        const Eigen::VectorXd& theta_p, WdCache* cache = nullptr);

// exp{-sum_i (x_i - x'_i)^2 / (2 theta_x_i^2)}
double design_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& theta_x);

// Full pair correlation r_X(x,x') * r_M(P,P') in (0, 1].
double pair_correlation(const Eigen::VectorXd& x, const DistTuple& px,
                        const Eigen::VectorXd& y, const DistTuple& py,
                        const KernelParams& params, WdCache* cache = nullptr);

}  // namespace nbro
