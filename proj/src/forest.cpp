#include <algorithm>
#include <cmath>
#include <numeric>

#include "micmac/learners.hpp"
#include "micmac/random.hpp"

namespace micmac {

int Tree::depth() const {
    int d = 0;
    for (const auto& n : nodes) d = std::max(d, n.depth);
    return d;
}

namespace {

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double decrease = -1.0;  // weighted impurity decrease
    std::size_t n_left = 0;
};

double gini(std::size_t pos, std::size_t total) {
    if (total == 0) return 0.0;
    const double p = static_cast<double>(pos) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const int> y, std::size_t mtry, int max_depth, Rng& rng,
                std::vector<double>& importance)
        : x_(x), y_(y), mtry_(mtry), max_depth_(max_depth), rng_(rng), importance_(importance) {}

    Tree build(std::vector<std::size_t> samples) {
        total_ = samples.size();
        Tree t;
        grow(t, samples, 0);
        return t;
    }

private:
    int grow(Tree& t, std::vector<std::size_t>& samples, int depth) {
        const int id = static_cast<int>(t.nodes.size());
        t.nodes.emplace_back();
        std::size_t pos = 0;
        for (auto s : samples) pos += y_[s] == 1;
        t.nodes[id].depth = depth;
        t.nodes[id].p_positive = static_cast<double>(pos) / static_cast<double>(samples.size());
        if (depth >= max_depth_ || pos == 0 || pos == samples.size()) return id;

        const SplitCandidate best = find_split(samples, pos);
        if (best.feature < 0) return id;

        importance_[best.feature] += best.decrease / static_cast<double>(total_);
        std::vector<std::size_t> left, right;
        for (auto s : samples) (x_(s, best.feature) <= best.threshold ? left : right).push_back(s);
        samples.clear();
        samples.shrink_to_fit();

        t.nodes[id].feature = best.feature;
        t.nodes[id].threshold = best.threshold;
        const int l = grow(t, left, depth + 1);
        const int r = grow(t, right, depth + 1);
        t.nodes[id].left = l;
        t.nodes[id].right = r;
        return id;
    }

    // Tries mtry random features; if none of them can split the node (all
    // constant here) keeps drawing features until one can or all are exhausted.
    SplitCandidate find_split(const std::vector<std::size_t>& samples, std::size_t pos) {
        const std::size_t p = x_.cols();
        std::vector<std::size_t> order(p);
        std::iota(order.begin(), order.end(), 0);
        const double n = static_cast<double>(samples.size());
        const double parent = n * gini(pos, samples.size());

        SplitCandidate best;
        std::vector<std::pair<double, int>> column(samples.size());
        for (std::size_t drawn = 0; drawn < p; ++drawn) {
            if (drawn >= mtry_ && best.feature >= 0) break;
            std::uniform_int_distribution<std::size_t> pick(drawn, p - 1);
            std::swap(order[drawn], order[pick(rng_)]);
            const std::size_t f = order[drawn];

            for (std::size_t i = 0; i < samples.size(); ++i) column[i] = {x_(samples[i], f), y_[samples[i]]};
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;

            std::size_t left_pos = 0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                left_pos += column[i].second == 1;
                if (column[i].first == column[i + 1].first) continue;
                const std::size_t nl = i + 1;
                const std::size_t nr = column.size() - nl;
                const double child = static_cast<double>(nl) * gini(left_pos, nl) +
                                     static_cast<double>(nr) * gini(pos - left_pos, nr);
                const double decrease = parent - child;
                if (decrease > best.decrease) {
                    best.feature = static_cast<int>(f);
                    best.threshold = 0.5 * (column[i].first + column[i + 1].first);
                    // midpoint may round onto the upper value for adjacent doubles
                    if (best.threshold >= column[i + 1].first) best.threshold = column[i].first;
                    best.decrease = decrease;
                    best.n_left = nl;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const int> y_;
    std::size_t mtry_;
    int max_depth_;
    Rng& rng_;
    std::vector<double>& importance_;
    std::size_t total_ = 0;
};

}  // namespace

ForestState train_forest(const LearnerConfig& cfg, const Matrix& x, std::span<const int> y) {
    const std::size_t n = x.rows();
    const std::size_t p = x.cols();
    const std::size_t mtry = std::min(
        p, cfg.rf_features_per_split.value_or(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(p))))));

    ForestState f;
    f.trees.resize(cfg.rf_trees);
    std::vector<std::vector<double>> per_tree(cfg.rf_trees, std::vector<double>(p, 0.0));

    // Each tree draws from its own counter-derived stream, so the forest is
    // identical for any thread count.
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < cfg.rf_trees; ++t) {
        Rng rng(derive_seed(cfg.seed, {t}));
        std::uniform_int_distribution<std::size_t> draw(0, n - 1);
        std::vector<std::size_t> boot(n);
        for (auto& b : boot) b = draw(rng);
        TreeBuilder builder(x, y, mtry, cfg.rf_max_depth, rng, per_tree[t]);
        f.trees[t] = builder.build(std::move(boot));
    }

    // Per-tree normalization, averaged, then renormalized.
    f.importance.assign(p, 0.0);
    for (const auto& imp : per_tree) {
        const double s = std::accumulate(imp.begin(), imp.end(), 0.0);
        if (s <= 0.0) continue;
        for (std::size_t j = 0; j < p; ++j) f.importance[j] += imp[j] / s;
    }
    const double total = std::accumulate(f.importance.begin(), f.importance.end(), 0.0);
    if (total > 0.0) {
        for (auto& v : f.importance) v /= total;
    }
    return f;
}

std::vector<int> predict_forest(const ForestState& f, const Matrix& x) {
    std::vector<int> out(x.rows());
    for (std::size_t q = 0; q < x.rows(); ++q) {
        const auto row = x.row(q);
        double vote = 0.0;
        for (const auto& t : f.trees) {
            int node = 0;
            while (t.nodes[node].feature >= 0) {
                const auto& nd = t.nodes[node];
                node = row[nd.feature] <= nd.threshold ? nd.left : nd.right;
            }
            vote += t.nodes[node].p_positive;
        }
        out[q] = vote / static_cast<double>(f.trees.size()) > 0.5 ? 1 : 0;
    }
    return out;
}

}  // namespace micmac
