#include "micmac/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace micmac {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946;

double phi(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr unsigned kMaxDepth = 15;

/// P(range of k iid standard normals <= w).
double range_cdf(double w, int k) {
    if (w <= 0.0) return 0.0;
    auto integrand = [&](double z) {
        const double inner = Phi(z) - Phi(z - w);
        return phi(z) * std::pow(std::max(inner, 0.0), k - 1);
    };
    // The integrand vanishes outside [-8.5, 8.5 + w] to double precision.
    const double value = Quadrature::integrate(integrand, -8.5, 8.5 + w, kMaxDepth, 1e-11);
    return std::clamp(static_cast<double>(k) * value, 0.0, 1.0);
}

}  // namespace

double studentized_range_cdf(double q, int k, double df) {
    if (!std::isfinite(q)) throw std::invalid_argument("studentized_range_cdf: non-finite q");
    if (k < 2) throw std::invalid_argument("studentized_range_cdf: k must be >= 2");
    if (!(df >= 1.0)) throw std::invalid_argument("studentized_range_cdf: df must be >= 1");
    if (q <= 0.0) return 0.0;

    // s = sqrt(X / df), X ~ chi^2(df); integrate the range cdf at q*s against the
    // density of s over its central 1 - 2e-15 mass.
    const boost::math::chi_squared chi(df);
    const double lo = std::sqrt(boost::math::quantile(chi, 1e-15) / df);
    const double hi = std::sqrt(boost::math::quantile(boost::math::complement(chi, 1e-15)) / df);
    const double log_norm = std::log(2.0) + 0.5 * df * std::log(0.5 * df) - std::lgamma(0.5 * df);
    auto density = [&](double s) {
        if (s <= 0.0) return 0.0;
        return std::exp(log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s);
    };
    auto integrand = [&](double s) {
        const double f = density(s);
        return f > 0.0 ? f * range_cdf(q * s, k) : 0.0;
    };
    const double value = Quadrature::integrate(integrand, lo, hi, kMaxDepth, 1e-10);
    return std::clamp(value, 0.0, 1.0);
}

std::vector<PairwiseComparison> tukey_hsd(const GroupSamples& groups) {
    if (groups.size() < 2) throw std::invalid_argument("need >= 2 groups");
    std::size_t total = 0;
    double ss_within = 0.0;
    std::vector<double> means;
    for (const auto& g : groups) {
        if (g.values.size() < 2) throw std::invalid_argument("tukey_hsd: group '" + g.name + "' needs >= 2 values");
        double m = 0.0;
        for (double v : g.values) m += v;
        m /= static_cast<double>(g.values.size());
        for (double v : g.values) ss_within += (v - m) * (v - m);
        means.push_back(m);
        total += g.values.size();
    }
    const int k = static_cast<int>(groups.size());
    const double df = static_cast<double>(total - groups.size());
    const double mse = ss_within / df;

    std::vector<PairwiseComparison> out;
    for (std::size_t a = 0; a < groups.size(); ++a) {
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
            PairwiseComparison c;
            c.group_a = groups[a].name;
            c.group_b = groups[b].name;
            c.mean_diff = means[a] - means[b];
            const double diff = std::abs(c.mean_diff);
            const double n_tilde = 2.0 / (1.0 / static_cast<double>(groups[a].values.size()) +
                                          1.0 / static_cast<double>(groups[b].values.size()));
            // Relative guard: a pooled variance that is pure rounding residue counts as zero.
            double scale = 0.0;
            for (double m : means) scale = std::max(scale, std::abs(m));
            if (mse <= 1e-28 * std::max(1.0, scale * scale)) {
                c.q = diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
                c.p = diff > 0.0 ? 0.0 : 1.0;
            } else {
                c.q = diff / std::sqrt(mse / n_tilde);
                c.p = std::clamp(1.0 - studentized_range_cdf(c.q, k, df), 0.0, 1.0);
            }
            out.push_back(std::move(c));
        }
    }
    return out;
}

}  // namespace micmac
