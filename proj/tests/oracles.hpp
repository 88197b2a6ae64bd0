#pragma once

// Independent reference implementations used to check the library. They share
// no code with src/ beyond the public data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "micmac/cv.hpp"
#include "micmac/learners.hpp"
#include "micmac/selectors.hpp"

namespace oracle {

using Columns = std::vector<std::vector<double>>;  // column-major

inline std::vector<double> zscore(const std::vector<double>& fit_on, const std::vector<double>& apply_to) {
    long double sum = 0.0L;
    for (double v : fit_on) sum += v;
    const double mean = static_cast<double>(sum / fit_on.size());
    long double ss = 0.0L;
    for (double v : fit_on) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(static_cast<double>(ss / fit_on.size()));
    std::vector<double> out(apply_to.size(), 0.0);
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) return out;
    for (std::size_t i = 0; i < apply_to.size(); ++i) out[i] = (apply_to[i] - mean) / sd;
    return out;
}

inline double abs_cos(const std::vector<double>& a, const std::vector<double>& b) {
    long double ab = 0.0L, aa = 0.0L, bb = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += static_cast<long double>(a[i]) * b[i];
        aa += static_cast<long double>(a[i]) * a[i];
        bb += static_cast<long double>(b[i]) * b[i];
    }
    if (aa == 0.0L || bb == 0.0L) return 0.0;
    return std::min(1.0, static_cast<double>(std::abs(ab) / std::sqrt(aa * bb)));
}

/// Plain K-nearest-neighbour vote: sort all training rows by (distance, index).
inline int knn_predict(const Columns& train, const std::vector<int>& y, const std::vector<double>& query, int k) {
    const std::size_t n = y.size();
    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::size_t c = 0; c < train.size(); ++c) d += (query[c] - train[c][i]) * (query[c] - train[c][i]);
        order[i] = {d, i};
    }
    std::sort(order.begin(), order.end());
    int ones = 0;
    for (int j = 0; j < k; ++j) ones += y[order[j].second];
    if (2 * ones == k) return y[order[0].second];
    return 2 * ones > k ? 1 : 0;
}

/// Validation accuracy of a wrapper on the given (already standardized) columns.
using PhiFn = std::function<double(const Columns& train, const std::vector<int>& ytr, const Columns& val,
                                   const std::vector<int>& yva)>;

inline PhiFn knn_phi(int k) {
    return [k](const Columns& tr, const std::vector<int>& ytr, const Columns& va, const std::vector<int>& yva) {
        std::size_t correct = 0;
        std::vector<double> q(va.size());
        for (std::size_t r = 0; r < yva.size(); ++r) {
            for (std::size_t c = 0; c < va.size(); ++c) q[c] = va[c][r];
            correct += knn_predict(tr, ytr, q, k) == yva[r];
        }
        return static_cast<double>(correct) / static_cast<double>(yva.size());
    };
}

/// φ through the library's public train/accuracy API for learners that are not
/// re-implemented here.
inline PhiFn library_phi(micmac::LearnerConfig cfg) {
    return [cfg](const Columns& tr, const std::vector<int>& ytr, const Columns& va, const std::vector<int>& yva) {
        micmac::Matrix xt(ytr.size(), tr.size()), xv(yva.size(), va.size());
        for (std::size_t c = 0; c < tr.size(); ++c) {
            for (std::size_t r = 0; r < ytr.size(); ++r) xt(r, c) = tr[c][r];
            for (std::size_t r = 0; r < yva.size(); ++r) xv(r, c) = va[c][r];
        }
        return micmac::accuracy(micmac::train(cfg, xt, ytr), xv, yva);
    };
}

/// Greedy selection that re-evaluates the merit of every candidate from scratch
/// at every step and sorts the full candidate list.
inline std::vector<std::size_t> micmac_sequence(const micmac::Dataset& train, const micmac::Dataset& val,
                                                const std::vector<std::size_t>& f0, double threshold, double epsilon,
                                                std::size_t max_selected, const PhiFn& phi) {
    Columns tr_std, va_std;
    for (auto f : f0) {
        const auto tr_col = train.values.column(f);
        tr_std.push_back(zscore(tr_col, tr_col));
        va_std.push_back(zscore(tr_col, val.values.column(f)));
    }
    auto cols_of = [](const Columns& all, const std::vector<std::size_t>& pos) {
        Columns out;
        for (auto p : pos) out.push_back(all[p]);
        return out;
    };
    std::vector<std::size_t> chosen{0};
    for (;;) {
        if (chosen.size() >= max_selected || chosen.size() == f0.size()) break;
        const double base = phi(cols_of(tr_std, chosen), train.labels, cols_of(va_std, chosen), val.labels);
        // (merit, gain, -rank) sorted descending
        std::vector<std::tuple<double, double, long>> scored;
        for (std::size_t c = 0; c < f0.size(); ++c) {
            if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
            auto with = chosen;
            with.push_back(c);
            const double gain = phi(cols_of(tr_std, with), train.labels, cols_of(va_std, with), val.labels) - base;
            double red = 0.0;
            for (auto s : chosen) red += abs_cos(tr_std[c], tr_std[s]);
            scored.emplace_back(gain / std::max(red, epsilon), gain, -static_cast<long>(c));
        }
        std::sort(scored.begin(), scored.end(), std::greater<>());
        if (!(std::get<0>(scored.front()) > threshold)) break;
        chosen.push_back(static_cast<std::size_t>(-std::get<2>(scored.front())));
    }
    std::vector<std::size_t> out;
    for (auto p : chosen) out.push_back(f0[p]);
    return out;
}

inline std::vector<int> discretize(const std::vector<double>& col, double width) {
    const double n = static_cast<double>(col.size());
    double mean = 0.0;
    for (double v : col) mean += v / n;
    double var = 0.0;
    for (double v : col) var += (v - mean) * (v - mean) / n;
    const double sd = std::sqrt(var);
    std::vector<int> out;
    for (double v : col) out.push_back(v < mean - width * sd ? 0 : (v > mean + width * sd ? 2 : 1));
    return out;
}

/// Mutual information by explicit contingency table summation (nats).
inline double mutual_information(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<int, std::size_t> ia, ib;
    for (int v : a) ia.emplace(v, ia.size());
    for (int v : b) ib.emplace(v, ib.size());
    std::vector<std::vector<double>> table(ia.size(), std::vector<double>(ib.size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) table[ia[a[i]]][ib[b[i]]] += 1.0;
    const double n = static_cast<double>(a.size());
    std::vector<double> pa(ia.size(), 0.0), pb(ib.size(), 0.0);
    for (std::size_t r = 0; r < table.size(); ++r) {
        for (std::size_t c = 0; c < table[r].size(); ++c) {
            pa[r] += table[r][c] / n;
            pb[c] += table[r][c] / n;
        }
    }
    double mi = 0.0;
    for (std::size_t r = 0; r < table.size(); ++r) {
        for (std::size_t c = 0; c < table[r].size(); ++c) {
            if (table[r][c] == 0.0) continue;
            const double p = table[r][c] / n;
            mi += p * std::log(p / (pa[r] * pb[c]));
        }
    }
    return std::max(0.0, mi);
}

/// Greedy difference-form mRMR over every candidate at every step.
inline std::vector<std::size_t> mrmr_greedy(const micmac::Dataset& d, std::size_t k, double width = 1.0) {
    std::vector<std::vector<int>> disc;
    for (std::size_t f = 0; f < d.n_features(); ++f) disc.push_back(discretize(d.values.column(f), width));
    std::vector<std::size_t> chosen;
    while (chosen.size() < k) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t pick = d.n_features();
        for (std::size_t f = 0; f < d.n_features(); ++f) {
            if (std::find(chosen.begin(), chosen.end(), f) != chosen.end()) continue;
            double red = 0.0;
            for (auto s : chosen) red += mutual_information(disc[f], disc[s]);
            const double score =
                mutual_information(disc[f], d.labels) - (chosen.empty() ? 0.0 : red / static_cast<double>(chosen.size()));
            if (score > best || (score == best && pick < d.n_features() && d.feature_names[f] < d.feature_names[pick])) {
                best = score;
                pick = f;
            }
        }
        chosen.push_back(pick);
    }
    return chosen;
}

/// Maximum of the C-SVM dual by accelerated projected gradient. The projection
/// onto {0 <= a <= C, y'a = 0} bisects on the multiplier of the equality.
inline double svm_dual_optimum(const micmac::Matrix& kernel, const std::vector<int>& y_pm, double c,
                               int iterations = 200000) {
    const std::size_t n = y_pm.size();
    std::vector<double> q(n * n);
    double trace = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) q[i * n + j] = y_pm[i] * y_pm[j] * kernel(i, j);
        trace += q[i * n + i];
    }
    // Power iteration for the Lipschitz constant.
    std::vector<double> v(n, 1.0), w(n);
    double lip = trace;
    for (int it = 0; it < 500; ++it) {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = 0.0;
            for (std::size_t j = 0; j < n; ++j) w[i] += q[i * n + j] * v[j];
            norm += w[i] * w[i];
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) break;
        lip = norm;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
    }
    lip *= 1.0001;
    auto project = [&](std::vector<double>& a) {
        auto excess = [&](double nu) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += y_pm[i] * std::clamp(a[i] - nu * y_pm[i], 0.0, c);
            return s;
        };
        double lo = -1e6, hi = 1e6;  // excess is non-increasing in nu
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) > 0.0 ? lo : hi) = mid;
        }
        const double nu = 0.5 * (lo + hi);
        for (std::size_t i = 0; i < n; ++i) a[i] = std::clamp(a[i] - nu * y_pm[i], 0.0, c);
    };
    auto objective = [&](const std::vector<double>& a) {
        double lin = 0.0, quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lin += a[i];
            for (std::size_t j = 0; j < n; ++j) quad += a[i] * a[j] * q[i * n + j];
        }
        return lin - 0.5 * quad;
    };
    std::vector<double> a(n, 0.0), prev(n, 0.0), z(n, 0.0), g(n);
    double t = 1.0;
    for (int it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            g[i] = 1.0;
            for (std::size_t j = 0; j < n; ++j) g[i] -= q[i * n + j] * z[j];
        }
        prev = a;
        for (std::size_t i = 0; i < n; ++i) a[i] = z[i] + g[i] / lip;
        project(a);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t i = 0; i < n; ++i) z[i] = a[i] + (t - 1.0) / t_next * (a[i] - prev[i]);
        t = t_next;
        if (it % 1000 == 999) {
            double step = 0.0;
            for (std::size_t i = 0; i < n; ++i) step = std::max(step, std::abs(a[i] - prev[i]));
            if (step < 1e-13) break;
        }
    }
    return objective(a);
}

/// Studentized range statistic of groups: max pairwise |mean diff| / sqrt(MSE / n~).
inline std::vector<double> pairwise_q(const std::vector<std::vector<double>>& groups) {
    std::vector<double> means;
    double ss = 0.0;
    std::size_t total = 0;
    for (const auto& g : groups) {
        const double m = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
        for (double v : g) ss += (v - m) * (v - m);
        means.push_back(m);
        total += g.size();
    }
    const double mse = ss / static_cast<double>(total - groups.size());
    std::vector<double> q;
    for (std::size_t a = 0; a < groups.size(); ++a) {
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
            const double nt = 2.0 / (1.0 / groups[a].size() + 1.0 / groups[b].size());
            q.push_back(std::abs(means[a] - means[b]) / std::sqrt(mse / nt));
        }
    }
    return q;
}

/// Family-wise permutation p-values: share of label permutations whose largest
/// pairwise statistic reaches the observed statistic of each pair.
inline std::vector<double> tukey_permutation_p(const std::vector<std::vector<double>>& groups, std::size_t n_perm,
                                               std::uint64_t seed) {
    const std::vector<double> observed = pairwise_q(groups);
    std::vector<double> pooled;
    for (const auto& g : groups) pooled.insert(pooled.end(), g.begin(), g.end());
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> hits(observed.size(), 0);
    std::vector<std::vector<double>> shuffled(groups.size());
    for (std::size_t p = 0; p < n_perm; ++p) {
        std::shuffle(pooled.begin(), pooled.end(), rng);
        std::size_t pos = 0;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            shuffled[g].assign(pooled.begin() + static_cast<std::ptrdiff_t>(pos),
                               pooled.begin() + static_cast<std::ptrdiff_t>(pos + groups[g].size()));
            pos += groups[g].size();
        }
        const auto q = pairwise_q(shuffled);
        const double mx = *std::max_element(q.begin(), q.end());
        for (std::size_t i = 0; i < observed.size(); ++i) hits[i] += mx >= observed[i] - 1e-12;
    }
    std::vector<double> p;
    for (auto h : hits) p.push_back(static_cast<double>(h) / static_cast<double>(n_perm));
    return p;
}

/// Monte-Carlo CDF of the studentized range at each of qs.
inline std::vector<double> studentized_range_mc(int k, double df, const std::vector<double>& qs, std::size_t draws,
                                                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    std::chi_squared_distribution<double> chi(df);
    std::vector<std::size_t> below(qs.size(), 0);
    for (std::size_t d = 0; d < draws; ++d) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int i = 0; i < k; ++i) {
            const double v = z(rng);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double q = (hi - lo) / std::sqrt(chi(rng) / df);
        for (std::size_t i = 0; i < qs.size(); ++i) below[i] += q <= qs[i];
    }
    std::vector<double> out;
    for (auto b : below) out.push_back(static_cast<double>(b) / static_cast<double>(draws));
    return out;
}

}  // namespace oracle
