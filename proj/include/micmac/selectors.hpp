#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "micmac/dataset.hpp"
#include "micmac/learners.hpp"

namespace micmac {

struct SelectorConfig {
    LearnerConfig wrapper{};                        // classifier inside the merit score
    LearnerConfig forest{.kind = LearnerKind::rf};  // preselection importance model
    double threshold = 0.0;                         // accept a candidate only when merit > threshold
    std::size_t max_selected = 100;
    double epsilon = 1e-6;                          // floor for the redundancy denominator
    std::size_t preselect_n = 100;
    double mi_bin_width = 1.0;                      // MI discretization cuts at mean +- width * std

    void validate() const;
};

enum class Termination { threshold, cap, exhausted };
std::string to_string(Termination t);

/// One greedy MICMAC run. Entry 0 is the seeded feature, whose merit is NaN.
struct SelectionTrace {
    std::vector<FeatureId> features;
    std::vector<std::string> names;
    std::vector<double> merit;
    std::vector<double> gain;       // accuracy gain of each accepted step (NaN for the seed)
    std::vector<double> phi_after;  // validation accuracy once the feature is in
    Termination reason = Termination::exhausted;
    std::optional<double> rejected_merit;  // best merit that failed the threshold
    double threshold = 0.0;

    std::size_t size() const noexcept { return features.size(); }
};

/// `step,feature_name,merit,phi_after,reason`; one row per selected feature
/// (reason `seed` or `accepted`) plus a final row carrying the termination reason.
void save_trace(const SelectionTrace& t, const std::filesystem::path& path);

/// F0: features ranked by random-forest importance (descending, ties by name),
/// truncated to preselect_n.
std::vector<FeatureId> preselect_rf(const Dataset& train, const SelectorConfig& cfg);

/// Merit of adding `candidate` to the trace's selection:
///   (phi(selected + candidate) - phi(selected)) / max(sum |cos(candidate, s)|, epsilon)
/// where phi trains the wrapper on train rows and scores val rows, and cosines use
/// training columns standardized on the training rows.
double merit(FeatureId candidate, const SelectionTrace& selected, const Dataset& train, const Dataset& val,
             const SelectorConfig& cfg);

/// Greedy MICMAC selection over F0, seeded with F0's first feature. Candidate
/// merits within a step are evaluated in parallel.
SelectionTrace micmac_select(const Dataset& train, const Dataset& val, std::span<const FeatureId> f0,
                             const SelectorConfig& cfg);

/// Single-threaded reference for micmac_select: retrains the wrapper from scratch
/// for every candidate. Kept for testing and benchmarking; results are identical.
SelectionTrace micmac_select_serial(const Dataset& train, const Dataset& val, std::span<const FeatureId> f0,
                                    const SelectorConfig& cfg);

/// Three-level coding of a column: 0 below mean - w*std, 2 above mean + w*std, else 1.
std::vector<int> discretize_mean_std(std::span<const double> column, double width = 1.0);

/// Plug-in mutual information in nats over observed cells.
double mutual_information(std::span<const int> a, std::span<const int> b);

/// mRMR (difference form). Candidates default to every feature of train.
std::vector<FeatureId> mrmr_select(const Dataset& train, std::size_t k,
                                   std::optional<std::span<const FeatureId>> candidates = std::nullopt,
                                   double bin_width = 1.0);

/// Dynamic-relevance variant: relevance scaled by (1 + |S|) / (1 + sum redundancy).
/// An approximation; reports built from it are flagged as such.
std::vector<FeatureId> mdrmr_select(const Dataset& train, std::size_t k,
                                    std::optional<std::span<const FeatureId>> candidates = std::nullopt,
                                    double bin_width = 1.0);

}  // namespace micmac
