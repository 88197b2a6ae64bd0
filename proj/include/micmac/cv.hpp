#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "micmac/dataset.hpp"
#include "micmac/learners.hpp"
#include "micmac/selectors.hpp"

namespace micmac {

struct InnerFold {
    std::vector<std::string> train;
    std::vector<std::string> validation;
};

struct OuterFold {
    std::vector<std::string> train_val;
    std::vector<std::string> test;
    std::vector<InnerFold> inner;
};

/// Subject-level nested partition. Outer test sets partition all subjects;
/// within an outer fold the inner validation sets partition its train_val set.
struct FoldPlan {
    std::vector<OuterFold> outer;
    std::uint64_t seed = 0;
};

/// Shuffles subjects by seed and slices them into nearly-equal folds (the
/// first `n mod folds` folds get one extra subject).
FoldPlan make_fold_plan(const std::vector<std::string>& subject_ids, const std::vector<int>& labels,
                        std::size_t n_outer, std::size_t n_inner, std::uint64_t seed);

/// Throws LeakageError / std::logic_error when the plan violates its invariants.
void verify_fold_plan(const FoldPlan& plan, const std::vector<std::string>& all_subjects);

struct FoldSelection {
    std::vector<FeatureId> f0;             // preselected pool of this outer fold
    std::vector<SelectionTrace> traces;    // one per inner fold
};

/// Per outer fold: random-forest preselection on its train_val subjects, then one
/// MICMAC run per inner fold.
std::vector<FoldSelection> run_selection_over_folds(const Dataset& d, const FoldPlan& plan, const SelectorConfig& cfg,
                                                    std::uint64_t forest_seed = 0);

struct RankedFeature {
    FeatureId id = 0;
    std::string name;
    std::size_t count = 0;
    double mean_merit = 0.0;  // seeded entries count as +inf
};

/// Selection count descending, then mean merit descending, then name.
std::vector<RankedFeature> rank_by_frequency(const std::vector<SelectionTrace>& traces);

/// Most frequent label per subject; an even split goes to label 1.
std::vector<int> majority_vote(const std::vector<std::vector<int>>& predictions_by_subject);

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    Confusion& operator+=(const Confusion& o) {
        tp += o.tp; fp += o.fp; tn += o.tn; fn += o.fn;
        return *this;
    }
};

/// Subject-level results of one outer fold, indexed by k - 1.
struct FoldCurve {
    std::vector<std::size_t> correct;
    std::vector<Confusion> confusion;
    std::size_t n_test_subjects = 0;
    double accuracy(std::size_t k) const {
        return static_cast<double>(correct[k - 1]) / static_cast<double>(n_test_subjects);
    }
};

/// Trains `classifier` on the outer fold's train_val samples restricted to the top-k
/// ranked features (standardized on train_val), majority-votes the test subjects'
/// samples and records subject-level accuracy, for k = 1..k_max.
FoldCurve evaluate_fold_topk(const Dataset& d, const OuterFold& fold, const std::vector<FeatureId>& ranking,
                             const LearnerConfig& classifier, std::size_t k_max);

struct TopkCurve {
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<FoldCurve> folds;
};

TopkCurve evaluate_topk_curve(const Dataset& d, const FoldPlan& plan,
                              const std::vector<std::vector<FeatureId>>& rankings, const LearnerConfig& classifier,
                              std::size_t k_max);

enum class SelectorKind { micmac, mrmr, mdrmr };

struct Scheme {
    SelectorKind selector = SelectorKind::micmac;
    LearnerKind wrapper = LearnerKind::knn;  // only meaningful for micmac
    LearnerKind classifier = LearnerKind::knn;

    /// e.g. MICMAC-knnW-knnC, mRMR-svmC, MDRMR-knnC
    std::string name() const;
    bool approximate() const { return selector == SelectorKind::mdrmr; }
    bool operator==(const Scheme&) const = default;
};

/// `micmac:<wrapper>:<classifier>`, `mrmr:<classifier>` or `mdrmr:<classifier>`.
Scheme parse_scheme(const std::string& spec);
std::vector<Scheme> all_schemes();
std::vector<std::string> valid_scheme_specs();

struct ExperimentConfig {
    std::vector<Scheme> schemes = all_schemes();
    SelectorConfig selector{};
    LearnerConfig knn{.kind = LearnerKind::knn};
    LearnerConfig svm{.kind = LearnerKind::svm};
    std::size_t n_outer = 10;
    std::size_t n_inner = 9;
    std::size_t n_repeats = 10;
    std::uint64_t base_seed = 0;
    std::size_t k_max = 100;
    int jobs = 1;
};

/// Accuracy summary of one scheme across repeats. Index k - 1.
struct CurveSummary {
    std::vector<double> mean;
    std::vector<double> std;  // sample std over repeats; 0 for a single repeat
    std::size_t best_k = 0;
    double best_acc = 0.0;
    double best_std = 0.0;
    std::size_t top12_k = 0;
    double top12_acc = 0.0;
    double top12_std = 0.0;
};

CurveSummary summarize(const std::vector<std::vector<double>>& per_repeat_accuracy);

struct SchemeResult {
    Scheme scheme;
    std::vector<std::vector<std::vector<RankedFeature>>> rankings;  // [repeat][outer fold]
    std::vector<std::vector<FoldCurve>> fold_curves;                // [repeat][outer fold]
    std::vector<std::vector<double>> per_repeat_accuracy;           // [repeat][k - 1], mean over folds
    CurveSummary summary;
    Confusion best_k_confusion;
};

struct ExperimentReport {
    std::vector<SchemeResult> schemes;
    std::size_t n_repeats = 0;
    std::size_t n_outer = 0;
    std::size_t n_inner = 0;
    std::size_t k_max = 0;
    std::size_t leakage_checks = 0;  // disjointness assertions that ran (and passed)
    double runtime_seconds = 0.0;
};

/// The full pipeline repeated n_repeats times with fold-plan seeds base_seed + r.
ExperimentReport run_experiments(const Dataset& d, const ExperimentConfig& cfg);

}  // namespace micmac
