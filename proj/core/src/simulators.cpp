#include "nbro/simulators.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace nbro {

DiscreteDistribution discretize_quantiles(const BaseDistribution& base, int m) {
    if (m < 2) throw std::invalid_argument("discretize_quantiles: need at least 2 atoms");
    std::vector<double> support(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k)
        support[static_cast<std::size_t>(k)] = base.quantile((k + 0.5) / m);
    std::vector<double> weights(static_cast<std::size_t>(m), 1.0 / m);
    return {std::move(support), std::move(weights)};
}

double inventory_simulate(const Eigen::VectorXd& x, const DiscreteDistribution& demand,
                          const InventoryConfig& cfg, Rng& rng) {
    if (x.size() != 2) throw std::invalid_argument("inventory_simulate: design must be (s, S)");
    if (cfg.warmup >= cfg.periods)
        throw std::invalid_argument("inventory_simulate: warmup must be < periods");
    const double s_level = x[0], big_s = x[1];
    double inv = big_s;
    double total = 0.0;
    int counted = 0;
    for (int t = 0; t < cfg.periods; ++t) {
        inv -= demand.sample(rng);
        double cost = 0.0;
        if (inv >= 0.0)
            cost += cfg.holding_cost * inv;
        else
            cost += cfg.backorder_cost * (-inv);
        if (inv < s_level) {
            cost += cfg.fixed_order_cost + cfg.unit_cost * (big_s - inv);
            inv = big_s;
        }
        if (t >= cfg.warmup) {
            total += cost;
            ++counted;
        }
    }
    return cfg.output_scale * total / counted;
}

double inventory_analytic_cost(double s_level, double big_s, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("inventory_analytic_cost: lambda must be > 0");
    double inv_l = 1.0 / lambda;
    double num = 100.0 + s_level - inv_l + 0.5 * lambda * (big_s * big_s - s_level * s_level) +
                 101.0 * inv_l * std::exp(-lambda * s_level);
    return 0.01 * (inv_l + num / (1.0 + lambda * (big_s - s_level)));
}

Eigen::VectorXd inventory_lo() {
    Eigen::VectorXd v(2);
    v << 10000.0, 22600.0;
    return v;
}

Eigen::VectorXd inventory_hi() {
    Eigen::VectorXd v(2);
    v << 22500.0, 35000.0;
    return v;
}

namespace {

int routing_category(double v) {
    return std::clamp(static_cast<int>(std::lround(v)), 1, 4);
}

double positive_draw(const DiscreteDistribution& d, Rng& rng) {
    double v = d.sample(rng);
    return v > 0.0 ? v : 1e-9;
}

}  // namespace

double ccf_simulate(const Eigen::VectorXd& x, const DistTuple& inputs, const CcfConfig& cfg,
                    Rng& rng, CcfCounts* counts) {
    if (x.size() != 3) throw std::invalid_argument("ccf_simulate: design must be (x1, x2, x3)");
    if (inputs.size() != 6) throw std::invalid_argument("ccf_simulate: need 6 input distributions");
    const int icu_beds = static_cast<int>(std::lround(x[0]));
    const int ccu_beds = static_cast<int>(std::lround(x[1]));
    const int ic_beds = static_cast<int>(std::lround(x[2]));
    const DiscreteDistribution& interarrival = *inputs[0];
    const DiscreteDistribution& routing = *inputs[5];
    const double horizon = cfg.warmup + cfg.days;

    enum Kind { kArrival = 0, kStayDone = 1, kIcDone = 2 };
    // (time, seq, kind, unit): unit 0 = ICU, 1 = CCU; seq breaks time ties
    // deterministically in schedule order
    using Event = std::tuple<double, long long, int, int>;
    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
    long long seq = 0;

    // queued (bed-blocking) patients, FIFO by blocking start: unit only
    std::vector<int> ic_queue;
    std::size_t queue_head = 0;
    int icu_busy = 0, ccu_busy = 0, ic_busy = 0;
    CcfCounts acc;
    long long denied_post = 0;

    auto stay_dist = [&](int unit, bool intermediate) -> const DiscreteDistribution& {
        if (!intermediate) return unit == 0 ? *inputs[1] : *inputs[2];
        return unit == 0 ? *inputs[3] : *inputs[4];
    };

    events.emplace(positive_draw(interarrival, rng), seq++, kArrival, 0);
    while (!events.empty()) {
        auto [t, sq, kind, unit] = events.top();
        events.pop();
        if (t > horizon) break;
        if (kind == kArrival) {
            ++acc.arrivals;
            int cat = routing_category(routing.sample(rng));
            int u = (cat == 1 || cat == 3) ? 0 : 1;  // first unit: ICU or CCU
            bool wants_ic = (cat == 3 || cat == 4);
            bool full = (u == 0) ? (icu_busy >= icu_beds) : (ccu_busy >= ccu_beds);
            if (full) {
                ++acc.denied;
                if (t > cfg.warmup) ++denied_post;
            } else {
                (u == 0 ? icu_busy : ccu_busy) += 1;
                double stay = positive_draw(stay_dist(u, false), rng);
                // encode destination in the unit payload: +2 marks an IC move
                events.emplace(t + stay, seq++, kStayDone, u + (wants_ic ? 2 : 0));
            }
            events.emplace(t + positive_draw(interarrival, rng), seq++, kArrival, 0);
        } else if (kind == kStayDone) {
            int u = unit & 1;
            bool wants_ic = unit >= 2;
            if (!wants_ic) {
                (u == 0 ? icu_busy : ccu_busy) -= 1;
                ++acc.exits;
            } else if (ic_busy < ic_beds) {
                ++ic_busy;
                (u == 0 ? icu_busy : ccu_busy) -= 1;
                events.emplace(t + positive_draw(stay_dist(u, true), rng), seq++, kIcDone, 0);
            } else {
                ic_queue.push_back(u);  // blocks its ICU/CCU bed
            }
        } else {  // kIcDone: the finishing IC patient leaves
            ++acc.exits;
            if (queue_head < ic_queue.size()) {
                int u = ic_queue[queue_head++];
                (u == 0 ? icu_busy : ccu_busy) -= 1;  // transfer frees the blocked bed
                events.emplace(t + positive_draw(stay_dist(u, true), rng), seq++, kIcDone, 0);
            } else {
                --ic_busy;
            }
        }
    }
    // bed-blocked patients are counted inside icu_busy/ccu_busy
    acc.in_system = icu_busy + ccu_busy + ic_busy;
    if (counts) *counts = acc;
    return static_cast<double>(denied_post) / cfg.days;
}

std::vector<Eigen::VectorXd> enumerate_ccf_designs() {
    std::vector<Eigen::VectorXd> out;
    for (int x1 = 1; x1 <= 27; ++x1)
        for (int x2 = 1; x2 <= 27; ++x2)
            for (int x3 = 1; x3 <= 27; ++x3) {
                double total = x1 + x2 + 0.5 * x3;
                if (total >= 26.0 && total <= 28.0) {
                    Eigen::VectorXd v(3);
                    v << x1, x2, x3;
                    out.push_back(std::move(v));
                }
            }
    return out;
}

std::pair<double, double> lognormal_from_moments(double mean, double sd) {
    if (!(mean > 0.0) || !(sd > 0.0))
        throw std::invalid_argument("lognormal_from_moments: mean and sd must be > 0");
    double s2 = std::log(1.0 + (sd / mean) * (sd / mean));
    return {std::log(mean) - 0.5 * s2, std::sqrt(s2)};
}

RealWorldData true_inventory_data(int n, Rng& rng) {
    RealWorldData data;
    data.names = {"demand"};
    std::vector<double> col;
    for (int i = 0; i < n; ++i) col.push_back(rng.exponential(kInventoryLambda));
    data.columns.push_back(std::move(col));
    return data;
}

RealWorldData true_ccf_data(int n, Rng& rng) {
    CcfConfig cfg;
    RealWorldData data;
    data.names = {"interarrival", "icu_stay", "ccu_stay", "iicu_stay", "iccu_stay", "routing"};
    data.columns.assign(6, {});
    auto icu = lognormal_from_moments(cfg.icu_mean, cfg.icu_sd);
    auto ccu = lognormal_from_moments(cfg.ccu_mean, cfg.ccu_sd);
    auto iicu = lognormal_from_moments(cfg.iicu_mean, cfg.iicu_sd);
    auto iccu = lognormal_from_moments(cfg.iccu_mean, cfg.iccu_sd);
    for (int i = 0; i < n; ++i) {
        data.columns[0].push_back(rng.exponential(cfg.arrival_rate));
        data.columns[1].push_back(rng.lognormal(icu.first, icu.second));
        data.columns[2].push_back(rng.lognormal(ccu.first, ccu.second));
        data.columns[3].push_back(rng.lognormal(iicu.first, iicu.second));
        data.columns[4].push_back(rng.lognormal(iccu.first, iccu.second));
        double u = rng.uniform();
        double acc = 0.0;
        int cat = 4;
        for (int c = 0; c < 4; ++c) {
            acc += cfg.routing[static_cast<std::size_t>(c)];
            if (u < acc) {
                cat = c + 1;
                break;
            }
        }
        data.columns[5].push_back(cat);
    }
    return data;
}

DiscreteDistribution true_inventory_demand(int atoms) {
    return discretize_quantiles(BaseDistribution::exponential(kInventoryLambda), atoms);
}

DistTuple true_ccf_inputs(const CcfConfig& cfg, int atoms) {
    DistTuple out;
    out.push_back(std::make_shared<DiscreteDistribution>(
        discretize_quantiles(BaseDistribution::exponential(cfg.arrival_rate), atoms)));
    for (auto [mean, sd] : {std::pair{cfg.icu_mean, cfg.icu_sd}, {cfg.ccu_mean, cfg.ccu_sd},
                            {cfg.iicu_mean, cfg.iicu_sd}, {cfg.iccu_mean, cfg.iccu_sd}}) {
        auto [mu, sg] = lognormal_from_moments(mean, sd);
        out.push_back(std::make_shared<DiscreteDistribution>(
            discretize_quantiles(BaseDistribution::lognormal(mu, sg), atoms)));
    }
    out.push_back(std::make_shared<DiscreteDistribution>(
        std::vector<double>{1.0, 2.0, 3.0, 4.0},
        std::vector<double>{cfg.routing[0], cfg.routing[1], cfg.routing[2], cfg.routing[3]}));
    return out;
}

}  // namespace nbro
