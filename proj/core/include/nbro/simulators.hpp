#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "nbro/distribution.hpp"

namespace nbro {

// Discretize an arbitrary base at m equal-probability quantiles (midpoint
// rule): atoms at Q((k + 0.5) / m), uniform weights.
DiscreteDistribution discretize_quantiles(const BaseDistribution& base, int m);

// ---------------------------------------------------------------------------
// (s, S) periodic-review inventory

struct InventoryConfig {
    double fixed_order_cost = 100.0;
    double unit_cost = 1.0;
    double holding_cost = 1.0;
    double backorder_cost = 100.0;
    int periods = 1000;
    int warmup = 100;
    // The closed-form expected cost carries a 1/100 prefactor; the simulator
    // output is scaled the same way so the two are directly comparable.
    double output_scale = 0.01;
};

// x = (s, S).  Zero lead time: each period the demand is drawn and netted,
// holding/backorder costs accrue on the post-demand level, then the position
// is reviewed and an order placed up to S (arriving immediately).  Returns
// the scaled cost averaged over post-warmup periods.
double inventory_simulate(const Eigen::VectorXd& x, const DiscreteDistribution& demand,
                          const InventoryConfig& cfg, Rng& rng);

// Closed-form expected cost for exponential(lambda) demand.
double inventory_analytic_cost(double s_level, double big_s, double lambda);

inline constexpr double kInventoryLambda = 2e-4;
// Design box: s in [10000, 22500], S in [22600, 35000].
Eigen::VectorXd inventory_lo();
Eigen::VectorXd inventory_hi();

// ---------------------------------------------------------------------------
// Critical-care facility

struct CcfConfig {
    double arrival_rate = 3.3;  // per day, exponential interarrival
    double icu_mean = 3.4, icu_sd = 3.5;
    double ccu_mean = 3.8, ccu_sd = 1.6;
    double iicu_mean = 15.0, iicu_sd = 7.0;
    double iccu_mean = 17.0, iccu_sd = 3.0;
    // categories 1..4: exit after ICU, exit after CCU, ICU then IICU,
    // CCU then ICCU
    std::array<double, 4> routing{0.2, 0.55, 0.2, 0.05};
    double days = 300.0;
    double warmup = 300.0;
};

struct CcfCounts {
    long long arrivals = 0;
    long long denied = 0;  // whole run, including warmup
    long long exits = 0;
    long long in_system = 0;  // at the horizon

    bool conserved() const { return arrivals == denied + exits + in_system; }
};

// x = (ICU beds, CCU beds, IC beds); inputs = (interarrival, ICU stay, CCU
// stay, IICU stay, ICCU stay, routing category).  Patients denied when their
// first unit is full; patients needing intermediate care block their bed
// until an IC bed frees (FIFO).  Returns denials per day after warmup.
double ccf_simulate(const Eigen::VectorXd& x, const DistTuple& inputs, const CcfConfig& cfg,
                    Rng& rng, CcfCounts* counts = nullptr);

// All positive-integer bed triples with 26 <= x1 + x2 + 0.5 x3 <= 28 and
// every count below the resource cap of 28 (binding only for x3).
std::vector<Eigen::VectorXd> enumerate_ccf_designs();

// ---------------------------------------------------------------------------
// True inputs for experiment setup

// mean/sd of the lognormal itself -> (mu, sigma) of the underlying normal
std::pair<double, double> lognormal_from_moments(double mean, double sd);

// n i.i.d. draws per input process from the true distributions.
RealWorldData true_inventory_data(int n, Rng& rng);
RealWorldData true_ccf_data(int n, Rng& rng);

// High-fidelity discretizations of the true inputs, for oracle evaluation.
DiscreteDistribution true_inventory_demand(int atoms = 100000);
DistTuple true_ccf_inputs(const CcfConfig& cfg = {}, int atoms = 100000);

}  // namespace nbro
