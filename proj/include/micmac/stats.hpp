#pragma once

#include <string>
#include <vector>

namespace micmac {

struct Group {
    std::string name;
    std::vector<double> values;
};

/// Named groups of per-experiment scores; at least two groups of two values each.
using GroupSamples = std::vector<Group>;

struct PairwiseComparison {
    std::string group_a;
    std::string group_b;
    double mean_diff = 0.0;  // mean_a - mean_b
    double q = 0.0;
    double p = 1.0;
};

/// P(Q <= q) for the studentized range of k normal means with df error degrees
/// of freedom, by nested adaptive quadrature (outer over the chi scale, inner
/// over the location). Absolute error target 1e-6.
double studentized_range_cdf(double q, int k, double df);

/// Tukey HSD (Tukey-Kramer for unequal sizes): q = |mean_i - mean_j| / sqrt(MSE / n~)
/// with n~ the harmonic mean of the pair's sizes and MSE the one-way ANOVA
/// within-group mean square; p = 1 - F(q; k, N - k). When MSE is zero, p is 0 for
/// unequal means and 1 for equal means.
std::vector<PairwiseComparison> tukey_hsd(const GroupSamples& groups);

}  // namespace micmac
