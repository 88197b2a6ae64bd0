#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "micmac/selectors.hpp"

namespace micmac {

std::vector<int> discretize_mean_std(std::span<const double> column, double width) {
    const double n = static_cast<double>(column.size());
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : column) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    std::vector<int> out(column.size(), 1);
    if (!(sd > 0.0)) return out;
    for (std::size_t i = 0; i < column.size(); ++i) {
        if (column[i] < mean - width * sd) out[i] = 0;
        else if (column[i] > mean + width * sd) out[i] = 2;
    }
    return out;
}

double mutual_information(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw std::invalid_argument("mutual_information: length mismatch");
    if (a.empty()) throw std::invalid_argument("mutual_information: empty vectors");
    std::map<std::pair<int, int>, std::size_t> joint;
    std::map<int, std::size_t> ma, mb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++joint[{a[i], b[i]}];
        ++ma[a[i]];
        ++mb[b[i]];
    }
    const double n = static_cast<double>(a.size());
    double mi = 0.0;
    for (const auto& [cell, count] : joint) {
        const double pab = static_cast<double>(count) / n;
        const double pa = static_cast<double>(ma[cell.first]) / n;
        const double pb = static_cast<double>(mb[cell.second]) / n;
        mi += pab * std::log(pab / (pa * pb));
    }
    return std::max(0.0, mi);
}

namespace {

enum class Criterion { difference, dynamic_ratio };

std::vector<FeatureId> greedy_mi_select(const Dataset& train, std::size_t k,
                                        std::optional<std::span<const FeatureId>> candidates, double bin_width,
                                        Criterion criterion) {
    if (k == 0) throw std::invalid_argument("mrmr_select: k must be >= 1");
    std::vector<FeatureId> pool;
    if (candidates) pool.assign(candidates->begin(), candidates->end());
    else {
        pool.resize(train.n_features());
        std::iota(pool.begin(), pool.end(), 0);
    }
    if (k > pool.size()) throw std::invalid_argument("mrmr_select: k exceeds the number of candidate features");

    std::vector<std::vector<int>> codes(pool.size());
    std::vector<double> relevance(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        codes[i] = discretize_mean_std(train.values.column(pool[i]), bin_width);
        relevance[i] = mutual_information(codes[i], train.labels);
    }

    std::vector<double> redundancy_sum(pool.size(), 0.0);
    std::vector<bool> taken(pool.size(), false);
    std::vector<FeatureId> out;
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = pool.size();
        double best_score = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (taken[i]) continue;
            double score = relevance[i];
            if (step > 0) {
                if (criterion == Criterion::difference) {
                    score = relevance[i] - redundancy_sum[i] / static_cast<double>(step);
                } else {
                    score = relevance[i] * (1.0 + static_cast<double>(step)) / (1.0 + redundancy_sum[i]);
                }
            }
            const bool better = score > best_score ||
                                (score == best_score && train.feature_names[pool[i]] < train.feature_names[pool[best]]);
            if (best == pool.size() || better) {
                best = i;
                best_score = score;
            }
        }
        taken[best] = true;
        out.push_back(pool[best]);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (!taken[i]) redundancy_sum[i] += mutual_information(codes[i], codes[best]);
        }
    }
    return out;
}

}  // namespace

std::vector<FeatureId> mrmr_select(const Dataset& train, std::size_t k,
                                   std::optional<std::span<const FeatureId>> candidates, double bin_width) {
    return greedy_mi_select(train, k, candidates, bin_width, Criterion::difference);
}

std::vector<FeatureId> mdrmr_select(const Dataset& train, std::size_t k,
                                    std::optional<std::span<const FeatureId>> candidates, double bin_width) {
    return greedy_mi_select(train, k, candidates, bin_width, Criterion::dynamic_ratio);
}

}  // namespace micmac
