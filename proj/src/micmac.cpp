#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <unordered_set>

#include "micmac/selectors.hpp"

namespace micmac {

namespace {

// Train/validation columns restricted to the candidate pool, standardized on
// the training rows, with the pairwise |cos| redundancy table.
struct FoldView {
    Matrix train;
    Matrix val;
    std::vector<int> train_y;
    std::vector<int> val_y;
    Matrix abs_cos;
};

FoldView make_view(const Dataset& train, const Dataset& val, std::span<const FeatureId> pool) {
    FoldView v;
    const Matrix raw_train = train.values.select_cols(pool);
    std::vector<RowId> rows(raw_train.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const Scaler s = fit_scaler(raw_train, rows);
    v.train = apply_scaler(s, raw_train);
    v.val = apply_scaler(s, val.values.select_cols(pool));
    v.train_y = train.labels;
    v.val_y = val.labels;

    const std::size_t p = pool.size();
    std::vector<std::vector<double>> cols(p);
    for (std::size_t j = 0; j < p; ++j) cols[j] = v.train.column(j);
    v.abs_cos = Matrix(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        v.abs_cos(a, a) = cosine_redundancy(cols[a], cols[a]);
        for (std::size_t b = a + 1; b < p; ++b) {
            const double c = cosine_redundancy(cols[a], cols[b]);
            v.abs_cos(a, b) = c;
            v.abs_cos(b, a) = c;
        }
    }
    return v;
}

double phi_retrain(const FoldView& v, const LearnerConfig& wrapper, std::span<const std::size_t> cols) {
    const TrainedModel m = train(wrapper, v.train.select_cols(cols), v.train_y);
    return accuracy(m, v.val.select_cols(cols), v.val_y);
}

// Retrains the wrapper for every candidate.
class RetrainEvaluator {
public:
    RetrainEvaluator(const FoldView& v, const LearnerConfig& wrapper, bool parallel)
        : v_(v), wrapper_(wrapper), parallel_(parallel) {}

    double seed(std::size_t first) {
        const std::size_t cols[] = {first};
        return phi_retrain(v_, wrapper_, cols);
    }

    std::vector<double> candidates(const std::vector<std::size_t>& selected, const std::vector<std::size_t>& remaining) {
        std::vector<double> phi(remaining.size());
        const auto n = static_cast<std::ptrdiff_t>(remaining.size());
#pragma omp parallel for schedule(dynamic) if (parallel_)
        for (std::ptrdiff_t c = 0; c < n; ++c) {
            std::vector<std::size_t> cols = selected;
            cols.push_back(remaining[c]);
            phi[c] = phi_retrain(v_, wrapper_, cols);
        }
        return phi;
    }

    void accept(std::size_t) {}

private:
    const FoldView& v_;
    const LearnerConfig& wrapper_;
    bool parallel_;
};

// KNN wrapper with cached validation-to-training squared distances over the
// selected columns; a candidate only adds its own column's contribution. The
// summation order matches a from-scratch KNN fit, so results are bit-identical.
class IncrementalKnnEvaluator {
public:
    IncrementalKnnEvaluator(const FoldView& v, int k)
        : v_(v), k_(k), base_(v.val.rows() * v.train.rows(), 0.0) {}

    double seed(std::size_t first) {
        accept(first);
        return score_with(std::nullopt);
    }

    std::vector<double> candidates(const std::vector<std::size_t>&, const std::vector<std::size_t>& remaining) {
        std::vector<double> phi(remaining.size());
        const auto n = static_cast<std::ptrdiff_t>(remaining.size());
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t c = 0; c < n; ++c) phi[c] = score_with(remaining[c]);
        return phi;
    }

    void accept(std::size_t col) {
        const std::size_t nt = v_.train.rows();
        for (std::size_t q = 0; q < v_.val.rows(); ++q) {
            const double xq = v_.val(q, col);
            double* row = base_.data() + q * nt;
            for (std::size_t i = 0; i < nt; ++i) {
                const double d = xq - v_.train(i, col);
                row[i] += d * d;
            }
        }
    }

private:
    double score_with(std::optional<std::size_t> extra) const {
        const std::size_t nt = v_.train.rows();
        std::vector<double> d2(nt);
        std::size_t correct = 0;
        for (std::size_t q = 0; q < v_.val.rows(); ++q) {
            const double* row = base_.data() + q * nt;
            if (extra) {
                const double xq = v_.val(q, *extra);
                for (std::size_t i = 0; i < nt; ++i) {
                    const double d = xq - v_.train(i, *extra);
                    d2[i] = row[i] + d * d;
                }
            } else {
                std::copy(row, row + nt, d2.begin());
            }
            correct += knn_vote(d2, v_.train_y, k_) == v_.val_y[q];
        }
        return static_cast<double>(correct) / static_cast<double>(v_.val.rows());
    }

    const FoldView& v_;
    int k_;
    std::vector<double> base_;
};

void check_inputs(const Dataset& train, const Dataset& val, std::span<const FeatureId> f0, const SelectorConfig& cfg) {
    cfg.validate();
    if (f0.size() < 2) throw std::invalid_argument("micmac_select: need at least 2 candidate features");
    std::unordered_set<FeatureId> seen;
    for (auto f : f0) {
        if (f >= train.n_features()) throw std::invalid_argument("micmac_select: feature id out of range");
        if (!seen.insert(f).second) throw std::invalid_argument("micmac_select: duplicate feature in F0");
    }
    if (train.n_features() != val.n_features()) throw std::invalid_argument("micmac_select: feature count mismatch");
    if (val.n_samples() == 0) throw std::invalid_argument("micmac_select: empty validation set");
    assert_subject_disjoint(train, val, "micmac_select");
}

template <typename Evaluator>
SelectionTrace run_micmac(const Dataset& train, std::span<const FeatureId> f0, const SelectorConfig& cfg,
                          const FoldView& v, Evaluator& eval) {
    SelectionTrace t;
    t.threshold = cfg.threshold;

    std::vector<std::size_t> selected{0};  // positions in f0
    std::vector<std::size_t> remaining;
    for (std::size_t i = 1; i < f0.size(); ++i) remaining.push_back(i);

    const auto record = [&](std::size_t pos, double mu, double gain, double phi) {
        t.features.push_back(f0[pos]);
        t.names.push_back(train.feature_names[f0[pos]]);
        t.merit.push_back(mu);
        t.gain.push_back(gain);
        t.phi_after.push_back(phi);
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double phi_current = eval.seed(0);
    record(0, nan, nan, phi_current);

    for (;;) {
        if (selected.size() >= cfg.max_selected) {
            t.reason = Termination::cap;
            break;
        }
        if (remaining.empty()) {
            t.reason = Termination::exhausted;
            break;
        }
        const std::vector<double> phi = eval.candidates(selected, remaining);

        std::size_t best = 0;
        double best_mu = -std::numeric_limits<double>::infinity();
        double best_gain = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < remaining.size(); ++c) {
            double redundancy = 0.0;
            for (auto s : selected) redundancy += v.abs_cos(remaining[c], s);
            const double gain = phi[c] - phi_current;
            const double mu = gain / std::max(redundancy, cfg.epsilon);
            // Ties: larger raw gain, then earlier F0 rank (remaining is in F0 order).
            if (mu > best_mu || (mu == best_mu && gain > best_gain)) {
                best = c;
                best_mu = mu;
                best_gain = gain;
            }
        }
        if (!(best_mu > cfg.threshold)) {
            t.reason = Termination::threshold;
            t.rejected_merit = best_mu;
            break;
        }
        const std::size_t pos = remaining[best];
        record(pos, best_mu, best_gain, phi[best]);
        phi_current = phi[best];
        selected.push_back(pos);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
        eval.accept(pos);
    }
    return t;
}

}  // namespace

std::string to_string(Termination t) {
    switch (t) {
        case Termination::threshold: return "threshold";
        case Termination::cap: return "cap";
        case Termination::exhausted: return "exhausted";
    }
    return "?";
}

void SelectorConfig::validate() const {
    wrapper.validate();
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
    if (max_selected < 1) throw std::invalid_argument("max_selected must be >= 1");
    if (preselect_n < 1) throw std::invalid_argument("preselect_n must be >= 1");
    if (!(mi_bin_width > 0.0)) throw std::invalid_argument("mi_bin_width must be > 0");
}

double merit(FeatureId candidate, const SelectionTrace& selected, const Dataset& train, const Dataset& val,
             const SelectorConfig& cfg) {
    if (selected.features.empty()) throw std::invalid_argument("merit: selection is empty");
    if (std::find(selected.features.begin(), selected.features.end(), candidate) != selected.features.end()) {
        throw std::invalid_argument("merit: candidate already selected");
    }
    assert_subject_disjoint(train, val, "merit");
    std::vector<FeatureId> pool = selected.features;
    pool.push_back(candidate);
    const FoldView v = make_view(train, val, pool);

    std::vector<std::size_t> cols(selected.features.size());
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
    const double before = phi_retrain(v, cfg.wrapper, cols);
    cols.push_back(pool.size() - 1);
    const double after = phi_retrain(v, cfg.wrapper, cols);

    double redundancy = 0.0;
    for (std::size_t i = 0; i + 1 < pool.size(); ++i) redundancy += v.abs_cos(pool.size() - 1, i);
    return (after - before) / std::max(redundancy, cfg.epsilon);
}

SelectionTrace micmac_select(const Dataset& train, const Dataset& val, std::span<const FeatureId> f0,
                             const SelectorConfig& cfg) {
    check_inputs(train, val, f0, cfg);
    const FoldView v = make_view(train, val, f0);
    if (cfg.wrapper.kind == LearnerKind::knn) {
        IncrementalKnnEvaluator eval(v, cfg.wrapper.knn_k);
        return run_micmac(train, f0, cfg, v, eval);
    }
    RetrainEvaluator eval(v, cfg.wrapper, true);
    return run_micmac(train, f0, cfg, v, eval);
}

SelectionTrace micmac_select_serial(const Dataset& train, const Dataset& val, std::span<const FeatureId> f0,
                                    const SelectorConfig& cfg) {
    check_inputs(train, val, f0, cfg);
    const FoldView v = make_view(train, val, f0);
    RetrainEvaluator eval(v, cfg.wrapper, false);
    return run_micmac(train, f0, cfg, v, eval);
}

}  // namespace micmac
