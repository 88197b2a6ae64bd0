#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "micmac/matrix.hpp"

namespace micmac {

using FeatureId = std::size_t;  // column index into a Dataset
using RowId = std::size_t;

/// Raised for malformed input files; the message carries row/column context.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A subject appears on both sides of a train/evaluation split.
class LeakageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Sample-by-feature matrix with per-sample subject, time point and label.
///
/// Invariants (enforced by validate()):
///   - every subject contributes the same number of samples,
///   - all samples of a subject share one label in {0, 1},
///   - values are finite,
///   - feature names are unique.
struct Dataset {
    Matrix values;
    std::vector<std::string> subject_ids;
    std::vector<int> time_points;
    std::vector<int> labels;
    std::vector<std::string> feature_names;

    std::size_t n_samples() const noexcept { return values.rows(); }
    std::size_t n_features() const noexcept { return values.cols(); }

    /// Distinct subject ids in order of first appearance.
    std::vector<std::string> subjects() const;

    /// Label of each subject in subjects() order.
    std::vector<int> subject_labels() const;

    /// Row indices belonging to any of the given subjects, ascending.
    std::vector<RowId> rows_of(std::span<const std::string> subjects) const;

    /// Rows-only subset; feature columns keep their indices.
    Dataset subset_rows(std::span<const RowId> rows) const;

    /// Throws DataError on any invariant violation.
    void validate() const;
};

/// Throws LeakageError when the two datasets share any subject id.
void assert_subject_disjoint(const Dataset& train, const Dataset& eval, const std::string& context);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& d, const std::filesystem::path& path);

/// Per-feature z-score parameters, fitted on a subset of rows.
struct Scaler {
    std::vector<std::string> feature_names;
    std::vector<double> mean;
    std::vector<double> stddev;
};

Scaler fit_scaler(const Dataset& d, std::span<const RowId> sample_ids);
Dataset apply_scaler(const Scaler& s, const Dataset& d);

// Matrix-level versions used inside the learners and selectors.
Scaler fit_scaler(const Matrix& x, std::span<const RowId> sample_ids);
Matrix apply_scaler(const Scaler& s, const Matrix& x);

/// |cos(a, b)|, or 0 when either vector has zero norm.
double cosine_redundancy(std::span<const double> a, std::span<const double> b);

}  // namespace micmac
