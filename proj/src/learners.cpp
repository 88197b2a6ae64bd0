#include "micmac/learners.hpp"

#include <algorithm>
#include <stdexcept>

namespace micmac {

// Defined in svm.cpp / forest.cpp.
SvmState train_svm(const LearnerConfig& cfg, const Matrix& x, std::span<const int> y);
std::vector<int> predict_svm(const SvmState& s, const Matrix& x);
ForestState train_forest(const LearnerConfig& cfg, const Matrix& x, std::span<const int> y);
std::vector<int> predict_forest(const ForestState& f, const Matrix& x);

std::string to_string(LearnerKind kind) {
    switch (kind) {
        case LearnerKind::knn: return "knn";
        case LearnerKind::svm: return "svm";
        case LearnerKind::rf: return "rf";
    }
    return "?";
}

LearnerKind parse_learner_kind(const std::string& name) {
    if (name == "knn") return LearnerKind::knn;
    if (name == "svm") return LearnerKind::svm;
    if (name == "rf") return LearnerKind::rf;
    throw std::invalid_argument("unknown learner '" + name + "' (valid: knn, svm, rf)");
}

void LearnerConfig::validate() const {
    if (knn_k < 1 || knn_k % 2 == 0) throw std::invalid_argument("knn_k must be odd and >= 1");
    if (!(svm_c > 0.0)) throw std::invalid_argument("svm_c must be > 0");
    if (svm_gamma && !(*svm_gamma > 0.0)) throw std::invalid_argument("svm_gamma must be > 0");
    if (!(svm_tol > 0.0)) throw std::invalid_argument("svm_tol must be > 0");
    if (rf_max_depth < 1) throw std::invalid_argument("rf_max_depth must be >= 1");
    if (rf_trees < 1) throw std::invalid_argument("rf_trees must be >= 1");
    if (rf_features_per_split && *rf_features_per_split < 1) {
        throw std::invalid_argument("rf_features_per_split must be >= 1");
    }
}

int knn_vote(std::span<const double> sq_dist, std::span<const int> train_y, int k) {
    const std::size_t n = sq_dist.size();
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
    // Running k-best list ordered by (distance, row index).
    std::size_t best[64];
    std::vector<std::size_t> heap_storage;
    std::size_t* nearest = best;
    if (kk > 64) {
        heap_storage.resize(kk);
        nearest = heap_storage.data();
    }
    std::size_t filled = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sq_dist[i];
        if (filled == kk && !(d < sq_dist[nearest[kk - 1]])) continue;
        std::size_t pos = filled < kk ? filled++ : kk - 1;
        while (pos > 0 && d < sq_dist[nearest[pos - 1]]) {
            nearest[pos] = nearest[pos - 1];
            --pos;
        }
        nearest[pos] = i;
    }
    std::size_t ones = 0;
    for (std::size_t i = 0; i < filled; ++i) ones += train_y[nearest[i]] == 1;
    const std::size_t zeros = filled - ones;
    if (ones == zeros) return train_y[nearest[0]];
    return ones > zeros ? 1 : 0;
}

namespace {

void check_training_input(const Matrix& x, std::span<const int> y) {
    if (x.cols() == 0) throw std::invalid_argument("train: empty feature set");
    if (x.rows() != y.size()) throw std::invalid_argument("train: label count does not match rows");
    if (x.rows() < 2) throw std::invalid_argument("train: need at least 2 samples");
    bool has0 = false, has1 = false;
    for (int v : y) {
        if (v == 0) has0 = true;
        else if (v == 1) has1 = true;
        else throw std::invalid_argument("train: labels must be 0 or 1");
    }
    if (!has0 || !has1) throw std::invalid_argument("train: single-class input");
}

std::vector<int> predict_knn(const KnnState& s, const Matrix& x) {
    std::vector<int> out(x.rows());
    std::vector<double> d2(s.train_x.rows());
    for (std::size_t q = 0; q < x.rows(); ++q) {
        const auto query = x.row(q);
        for (std::size_t i = 0; i < s.train_x.rows(); ++i) {
            const auto t = s.train_x.row(i);
            double acc = 0.0;
            for (std::size_t j = 0; j < t.size(); ++j) {
                const double diff = query[j] - t[j];
                acc += diff * diff;
            }
            d2[i] = acc;
        }
        out[q] = knn_vote(d2, s.train_y, s.k);
    }
    return out;
}

}  // namespace

TrainedModel train(const LearnerConfig& cfg, const Matrix& x, std::span<const int> y) {
    cfg.validate();
    check_training_input(x, y);
    TrainedModel m;
    m.kind = cfg.kind;
    m.n_features = x.cols();
    switch (cfg.kind) {
        case LearnerKind::knn:
            m.state = KnnState{x, std::vector<int>(y.begin(), y.end()), cfg.knn_k};
            break;
        case LearnerKind::svm:
            m.state = train_svm(cfg, x, y);
            break;
        case LearnerKind::rf:
            m.state = train_forest(cfg, x, y);
            break;
    }
    return m;
}

TrainedModel train_standardized(const LearnerConfig& cfg, const Matrix& x, std::span<const int> y) {
    std::vector<RowId> all(x.rows());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Scaler s = fit_scaler(x, all);
    TrainedModel m = train(cfg, apply_scaler(s, x), y);
    m.scaler = std::move(s);
    return m;
}

std::vector<int> predict(const TrainedModel& m, const Matrix& x) {
    if (x.cols() != m.n_features) {
        throw std::invalid_argument("predict: model expects " + std::to_string(m.n_features) + " features, got " +
                                    std::to_string(x.cols()));
    }
    std::optional<Matrix> scaled;
    if (m.scaler) scaled = apply_scaler(*m.scaler, x);
    const Matrix& input = scaled ? *scaled : x;
    return std::visit(
        [&](const auto& s) -> std::vector<int> {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, KnnState>) return predict_knn(s, input);
            else if constexpr (std::is_same_v<T, SvmState>) return predict_svm(s, input);
            else return predict_forest(s, input);
        },
        m.state);
}

double accuracy(const TrainedModel& m, const Matrix& x, std::span<const int> y) {
    if (x.rows() == 0) throw std::invalid_argument("accuracy: empty evaluation set");
    if (x.rows() != y.size()) throw std::invalid_argument("accuracy: label count does not match rows");
    const auto pred = predict(m, x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == y[i];
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

std::vector<double> rf_importance(const TrainedModel& m) {
    const auto* forest = std::get_if<ForestState>(&m.state);
    if (forest == nullptr) throw std::invalid_argument("rf_importance: model is not a random forest");
    return forest->importance;
}

}  // namespace micmac
