#include "nbro/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nbro::stats {

double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
    // Acklam 2003
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

namespace {

// Regularized upper incomplete gamma Q(a, x), series/continued-fraction split.
double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        // lower series
        double sum = 1.0 / a, term = sum, ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return 1.0 - p;
    }
    // Lentz continued fraction for the upper tail
    double tiny = 1e-300;
    double b0 = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b0, h = d;
    for (int i = 1; i <= 500; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b0 += 2.0;
        d = an * d + b0;
        if (std::fabs(d) < tiny) d = tiny;
        c = b0 + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi2_sf(double x, int df) {
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * df, 0.5 * x);
}

double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double median(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty sample");
    std::vector<double> w(v.begin(), v.end());
    std::sort(w.begin(), w.end());
    std::size_t n = w.size();
    return (n % 2 == 1) ? w[n / 2] : 0.5 * (w[n / 2 - 1] + w[n / 2]);
}

TestResult jarque_bera(std::span<const double> samples) {
    std::size_t n = samples.size();
    if (n < 20) throw std::invalid_argument("jarque_bera: need at least 20 samples");
    double m = mean(samples);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : samples) {
        double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 <= 0.0) throw std::invalid_argument("jarque_bera: degenerate (constant) sample");
    double skew = m3 / std::pow(m2, 1.5);
    double kurt = m4 / (m2 * m2);
    double jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
    return {jb, chi2_sf(jb, 2)};
}

TestResult mood_median_test(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("mood_median_test: empty sample");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    double med = median(pooled);
    // counts strictly above / not above
    double a_above = 0, b_above = 0;
    for (double x : a) a_above += (x > med) ? 1 : 0;
    for (double x : b) b_above += (x > med) ? 1 : 0;
    double a_below = static_cast<double>(a.size()) - a_above;
    double b_below = static_cast<double>(b.size()) - b_above;
    double row1 = a_above + b_above, row2 = a_below + b_below;
    double n = row1 + row2;
    if (row1 == 0.0 || row2 == 0.0)
        throw std::invalid_argument("mood_median_test: all values equal to the pooled median");
    double ca = static_cast<double>(a.size()), cb = static_cast<double>(b.size());
    double stat = 0.0;
    const double obs[2][2] = {{a_above, b_above}, {a_below, b_below}};
    const double rows[2] = {row1, row2};
    const double cols[2] = {ca, cb};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double e = rows[i] * cols[j] / n;
            stat += (obs[i][j] - e) * (obs[i][j] - e) / e;
        }
    return {stat, chi2_sf(stat, 1)};
}

TestResult mann_kendall_decreasing(std::span<const double> v) {
    std::size_t n = v.size();
    if (n < 3) throw std::invalid_argument("mann_kendall: need at least 3 points");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = v[j] - v[i];
            s += (d > 0) - (d < 0);
        }
    double var = n * (n - 1.0) * (2.0 * n + 5.0) / 18.0;
    double z;
    if (s > 0) z = (s - 1.0) / std::sqrt(var);
    else if (s < 0) z = (s + 1.0) / std::sqrt(var);
    else z = 0.0;
    // one-sided: decreasing trend corresponds to z << 0
    return {z, normal_cdf(z)};
}

}  // namespace nbro::stats
