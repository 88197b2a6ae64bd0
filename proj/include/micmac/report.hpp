#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "micmac/cv.hpp"
#include "micmac/stats.hpp"

namespace micmac {

/// Per-experiment accuracy curves of one scheme: [repeat][k - 1].
struct SchemeAccuracies {
    std::string scheme;
    std::vector<std::vector<double>> per_repeat_accuracy;
};

/// Writes experiments.csv, confusion.csv, ranking_<scheme>_fold<i>.csv and the
/// summary files of emit_summary(). Rewriting the same report yields identical bytes.
void emit_report(const ExperimentReport& r, const std::filesystem::path& out_dir);

/// report.csv, curve_<scheme>.csv and accuracy_vs_k.svg from raw accuracy curves.
void emit_summary(const std::vector<SchemeAccuracies>& schemes, const std::filesystem::path& out_dir);

/// Reads experiments.csv (`scheme,repeat,k,accuracy`) from a file or a report directory.
std::vector<SchemeAccuracies> load_experiments(const std::filesystem::path& path);

/// Line chart of mean accuracy against k, one polyline per scheme.
std::string render_svg(const std::vector<std::string>& names, const std::vector<std::vector<double>>& curves);

/// `group_a,group_b,q,p`
void write_tukey_csv(const std::vector<PairwiseComparison>& rows, const std::filesystem::path& path);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

}  // namespace micmac
