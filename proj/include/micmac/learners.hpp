#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "micmac/dataset.hpp"
#include "micmac/matrix.hpp"

namespace micmac {

enum class LearnerKind { knn, svm, rf };

std::string to_string(LearnerKind kind);
LearnerKind parse_learner_kind(const std::string& name);

struct LearnerConfig {
    LearnerKind kind = LearnerKind::knn;
    int knn_k = 3;
    double svm_c = 1.0;
    std::optional<double> svm_gamma;  // unset: 1 / (n_features * variance of all entries)
    double svm_tol = 1e-3;
    std::size_t svm_max_sweeps = 10000;
    std::size_t rf_trees = 100;
    int rf_max_depth = 10;
    std::optional<std::size_t> rf_features_per_split;  // unset: ceil(sqrt(n_features))
    std::uint64_t seed = 0;

    void validate() const;
};

struct KnnState {
    Matrix train_x;
    std::vector<int> train_y;
    int k = 3;
};

struct SvmState {
    Matrix support;                 // support vectors, one per row
    std::vector<double> coef;       // alpha_i * y_i for each support vector
    double bias = 0.0;
    double gamma = 1.0;

    // Training diagnostics, indexed like the training rows.
    std::vector<double> alpha;
    double dual_objective = 0.0;
    double kkt_gap = 0.0;           // max violating pair gap m(alpha) - M(alpha) at exit
    std::size_t iterations = 0;
    std::vector<double> objective_per_sweep;
};

struct TreeNode {
    int feature = -1;               // -1 for leaves
    double threshold = 0.0;         // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    int depth = 0;
    double p_positive = 0.0;        // fraction of class 1 among node samples
};

struct Tree {
    std::vector<TreeNode> nodes;    // nodes[0] is the root
    int depth() const;
};

struct ForestState {
    std::vector<Tree> trees;
    std::vector<double> importance;  // normalized mean impurity decrease
};

struct TrainedModel {
    LearnerKind kind = LearnerKind::knn;
    std::size_t n_features = 0;
    std::variant<KnnState, SvmState, ForestState> state;
    std::optional<Scaler> scaler;   // applied to inputs before predict when present
};

/// Fits a learner on rows of x with binary labels y in {0, 1}.
TrainedModel train(const LearnerConfig& cfg, const Matrix& x, std::span<const int> y);

/// Same as train() but first z-scores x; the scaler travels with the model.
TrainedModel train_standardized(const LearnerConfig& cfg, const Matrix& x, std::span<const int> y);

std::vector<int> predict(const TrainedModel& m, const Matrix& x);

/// Fraction of correct sample-level predictions.
double accuracy(const TrainedModel& m, const Matrix& x, std::span<const int> y);

std::vector<double> rf_importance(const TrainedModel& m);

// Building blocks shared with tests and the wrapper kernels.

double default_svm_gamma(const Matrix& x);
Matrix rbf_kernel_matrix(const Matrix& x, double gamma);
/// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij with y in {-1, +1}.
double svm_dual_objective(std::span<const double> alpha, std::span<const int> y_pm, const Matrix& kernel);

/// Majority label among the k training rows nearest to each query, given the
/// squared distances (queries x train). Neighbors are ordered by (distance, row);
/// an even vote goes to the single nearest neighbor's label.
int knn_vote(std::span<const double> sq_dist, std::span<const int> train_y, int k);

}  // namespace micmac
