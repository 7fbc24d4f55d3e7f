#pragma once

#include <cstddef>
#include <span>
#include <utility>

namespace nbro::stats {

double normal_pdf(double z);
double normal_cdf(double z);
// Inverse standard normal cdf (Acklam's rational approximation plus one
// Halley refinement step; |error| < 1e-15 over (0,1)).
double normal_quantile(double p);

// Upper tail of the chi-square distribution.
double chi2_sf(double x, int df);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // unbiased
double median(std::span<const double> v);

struct TestResult {
    double statistic;
    double p_value;
};

// JB = n/6 (skew^2 + (kurt-3)^2/4), p-value from chi-square with 2 df.
// Requires at least 20 samples and nonzero sample variance.
TestResult jarque_bera(std::span<const double> samples);

// Mood's median test: 2x2 chi-square on counts above/below the pooled median.
TestResult mood_median_test(std::span<const double> a, std::span<const double> b);

// Mann-Kendall trend test; negative statistic indicates a decreasing trend.
// Returns the one-sided p-value for a decreasing trend.
TestResult mann_kendall_decreasing(std::span<const double> v);

}  // namespace nbro::stats
