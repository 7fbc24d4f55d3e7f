#include "nbro/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "nbro/stats.hpp"

namespace nbro {

DiscreteDistribution::DiscreteDistribution(std::vector<double> support,
                                           std::vector<double> weights) {
    if (support.size() != weights.size() || support.empty())
        throw std::invalid_argument("DiscreteDistribution: size mismatch or empty");
    std::vector<std::size_t> idx(support.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w))
            throw std::invalid_argument("DiscreteDistribution: negative or non-finite weight");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("DiscreteDistribution: zero total weight");
    for (std::size_t k : idx) {
        if (!std::isfinite(support[k]))
            throw std::invalid_argument("DiscreteDistribution: non-finite atom");
        double w = weights[k] / total;
        if (w == 0.0) continue;  // zero-weight atoms dropped
        if (!support_.empty() && support_.back() == support[k]) {
            weights_.back() += w;  // exact-equality merge
        } else {
            support_.push_back(support[k]);
            weights_.push_back(w);
        }
    }
    if (support_.empty()) throw std::invalid_argument("DiscreteDistribution: no positive-weight atoms");
    cum_.resize(weights_.size());
    double c = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        c += weights_[i];
        cum_[i] = c;
    }
    cum_.back() = 1.0;
}

DiscreteDistribution DiscreteDistribution::empirical(std::span<const double> data) {
    if (data.empty()) throw std::invalid_argument("empirical: empty data");
    std::vector<double> s(data.begin(), data.end());
    std::vector<double> w(s.size(), 1.0 / static_cast<double>(s.size()));
    return DiscreteDistribution(std::move(s), std::move(w));
}

double DiscreteDistribution::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) m += support_[i] * weights_[i];
    return m;
}

double DiscreteDistribution::variance() const {
    double m = mean(), v = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i)
        v += weights_[i] * (support_[i] - m) * (support_[i] - m);
    return v;
}

double DiscreteDistribution::cdf(double t) const {
    auto it = std::upper_bound(support_.begin(), support_.end(), t);
    if (it == support_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double DiscreteDistribution::quantile(double u) const {
    if (u <= 0.0) return support_.front();
    if (u >= 1.0) return support_.back();
    auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    return support_[static_cast<std::size_t>(it - cum_.begin())];
}

double DiscreteDistribution::sample(Rng& rng) const {
    return quantile(rng.uniform());
}

BaseDistribution BaseDistribution::uniform(double lo, double hi) {
    if (!(hi > lo)) throw std::invalid_argument("uniform base: need hi > lo");
    return BaseDistribution(Kind{Uniform{lo, hi}});
}

BaseDistribution BaseDistribution::exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential base: need rate > 0");
    return BaseDistribution(Kind{Exponential{rate}});
}

BaseDistribution BaseDistribution::lognormal(double mu, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("lognormal base: need sigma > 0");
    return BaseDistribution(Kind{Lognormal{mu, sigma}});
}

BaseDistribution BaseDistribution::discrete(DiscreteDistribution d) {
    return BaseDistribution(Kind{std::move(d)});
}

double BaseDistribution::cdf(double t) const {
    return std::visit(
        [t](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                if (t <= k.lo) return 0.0;
                if (t >= k.hi) return 1.0;
                return (t - k.lo) / (k.hi - k.lo);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return t <= 0.0 ? 0.0 : 1.0 - std::exp(-k.rate * t);
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return t <= 0.0 ? 0.0 : stats::normal_cdf((std::log(t) - k.mu) / k.sigma);
            } else {
                return k.cdf(t);
            }
        },
        kind_);
}

double BaseDistribution::quantile(double u) const {
    return std::visit(
        [u](const auto& k) -> double {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return k.lo + u * (k.hi - k.lo);
            } else if constexpr (std::is_same_v<T, Exponential>) {
                return -std::log1p(-u) / k.rate;
            } else if constexpr (std::is_same_v<T, Lognormal>) {
                return std::exp(k.mu + k.sigma * stats::normal_quantile(u));
            } else {
                return k.quantile(u);
            }
        },
        kind_);
}

double BaseDistribution::sample(Rng& rng) const {
    double u;
    do {
        u = rng.uniform();
    } while (u <= 0.0 || u >= 1.0);
    return quantile(u);
}

bool BaseDistribution::is_discrete() const {
    return std::holds_alternative<DiscreteDistribution>(kind_);
}

const DiscreteDistribution& BaseDistribution::as_discrete() const {
    return std::get<DiscreteDistribution>(kind_);
}

std::pair<double, double> BaseDistribution::integration_bounds(double eps) const {
    return std::visit(
        [&](const auto& k) -> std::pair<double, double> {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Uniform>) {
                return {k.lo, k.hi};
            } else if constexpr (std::is_same_v<T, DiscreteDistribution>) {
                return {k.support().front(), k.support().back()};
            } else {
                return {quantile(eps), quantile(1.0 - eps)};
            }
        },
        kind_);
}

DPPosterior::DPPosterior(double alpha, BaseDistribution base, std::vector<double> data)
    : alpha_(alpha), base_(std::move(base)), data_(std::move(data)), sorted_data_(data_) {
    if (!(alpha_ > 0.0)) throw std::invalid_argument("DPPosterior: alpha must be positive");
    if (data_.empty()) throw std::invalid_argument("DPPosterior: data must be nonempty");
    std::sort(sorted_data_.begin(), sorted_data_.end());
}

double DPPosterior::base_mixture_cdf(double t) const {
    auto it = std::upper_bound(sorted_data_.begin(), sorted_data_.end(), t);
    double count = static_cast<double>(it - sorted_data_.begin());
    return (alpha_ * base_.cdf(t) + count) / concentration();
}

double DPPosterior::sample_base_mixture(Rng& rng) const {
    double c = concentration();
    double u = rng.uniform(0.0, c);
    if (u < alpha_) return base_.sample(rng);
    std::size_t j = rng.uniform_int(data_.size());
    return data_[j];
}

DiscreteDistribution DPPosterior::sample_distribution(int truncation, Rng& rng) const {
    if (truncation < 1) throw std::invalid_argument("sample_distribution: truncation must be >= 1");
    std::size_t k = static_cast<std::size_t>(truncation);
    std::vector<double> atoms(k), w(k);
    double stick = 1.0;
    double c = concentration();
    for (std::size_t i = 0; i < k; ++i) {
        atoms[i] = sample_base_mixture(rng);
        if (i + 1 == k) {
            w[i] = stick;  // remainder folded into the last atom
        } else {
            double v = rng.beta_one(c);
            w[i] = stick * v;
            stick *= (1.0 - v);
        }
    }
    return DiscreteDistribution(std::move(atoms), std::move(w));
}

ProductPosterior::ProductPosterior(std::vector<DPPosterior> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("ProductPosterior: need at least one dimension");
}

DistTuple ProductPosterior::sample(int truncation, Rng& rng) const {
    // key an independent child off fresh entropy so successive calls on the
    // same stream produce fresh tuples
    Rng call(rng.next_u64());
    DistTuple out;
    out.reserve(components_.size());
    for (std::size_t j = 0; j < components_.size(); ++j) {
        Rng sub = call.substream("dim", j);
        out.push_back(std::make_shared<DiscreteDistribution>(
            components_[j].sample_distribution(truncation, sub)));
    }
    return out;
}

RealWorldData RealWorldData::read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    RealWorldData out;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path);
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) out.names.push_back(cell);
    out.columns.resize(out.names.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::size_t j = 0;
        while (std::getline(ls, cell, ',')) {
            if (j >= out.columns.size()) throw std::runtime_error("ragged csv row in " + path);
            out.columns[j++].push_back(std::stod(cell));
        }
        if (j != out.columns.size()) throw std::runtime_error("ragged csv row in " + path);
    }
    if (out.n() == 0) throw std::runtime_error("csv has no data rows: " + path);
    for (const auto& c : out.columns)
        if (c.size() != out.n()) throw std::runtime_error("columns of unequal length in " + path);
    return out;
}

void RealWorldData::write_csv(const std::string& path) const {
    std::ofstream outf(path);
    if (!outf) throw std::runtime_error("cannot write " + path);
    for (std::size_t j = 0; j < names.size(); ++j)
        outf << names[j] << (j + 1 < names.size() ? "," : "\n");
    char buf[64];
    for (std::size_t i = 0; i < n(); ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", columns[j][i]);
            outf << buf << (j + 1 < columns.size() ? "," : "\n");
        }
    }
}

DPPosterior dp_posterior(double alpha, BaseDistribution base, std::vector<double> data) {
    return DPPosterior(alpha, std::move(base), std::move(data));
}

ProductPosterior default_posterior(const RealWorldData& data, double alpha) {
    std::vector<DPPosterior> comps;
    comps.reserve(data.dims());
    for (const auto& col : data.columns) {
        double hi = *std::max_element(col.begin(), col.end());
        if (hi <= 0.0) hi = 1.0;
        comps.emplace_back(alpha, BaseDistribution::uniform(0.0, hi), col);
    }
    return ProductPosterior(std::move(comps));
}

double nbro_objective_closed_form(const ProductPosterior& post,
                                  const std::function<double(double)>& h_at_x) {
    if (post.dims() != 1)
        throw std::invalid_argument(
            "nbro_objective_closed_form: only single-dimension posteriors are supported");
    const DPPosterior& p = post.components()[0];
    double alpha = p.alpha();
    double n = static_cast<double>(p.data().size());
    double base_expect;
    if (p.base().is_discrete()) {
        const auto& d = p.base().as_discrete();
        base_expect = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i)
            base_expect += d.weights()[i] * h_at_x(d.support()[i]);
    } else {
        // E_{P0}[h] = int_0^1 h(Q0(u)) du, composite Simpson on the quantile
        // scale, truncated at the 1e-8 tails for unbounded bases.
        const double eps = 1e-8;
        const int n_pts = 2001;
        double lo = eps, hi = 1.0 - eps;
        double hstep = (hi - lo) / (n_pts - 1);
        double acc = 0.0;
        for (int i = 0; i < n_pts; ++i) {
            double u = lo + hstep * i;
            double coef = (i == 0 || i == n_pts - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            acc += coef * h_at_x(p.base().quantile(u));
        }
        base_expect = acc * hstep / 3.0 / (hi - lo);
    }
    double data_sum = 0.0;
    for (double xi : p.data()) data_sum += h_at_x(xi);
    double c = alpha + n;
    return (alpha / c) * base_expect + data_sum / c;
}

}  // namespace nbro
