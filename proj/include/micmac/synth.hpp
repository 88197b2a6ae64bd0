#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "micmac/dataset.hpp"

namespace micmac {

/// Shape and signal parameters of a planted-feature benchmark dataset.
struct SynthConfig {
    std::size_t n_subjects = 60;          // even; half per class
    std::size_t samples_per_subject = 9;
    std::size_t n_features = 300;
    std::size_t n_informative = 12;
    double effect_size = 1.5;             // class mean separation, in noise std units
    double subject_effect_std = 1.0;
    std::size_t n_redundant_copies = 1;   // near-duplicates per informative feature
    double rho = 0.8;
    std::uint64_t seed = 7;

    void validate() const;
};

enum class FeatureRole { informative, redundant, noise };

struct GroundTruthEntry {
    std::string feature_name;
    FeatureRole role = FeatureRole::noise;
    std::string source;  // informative feature a redundant copy derives from
};

struct SynthResult {
    Dataset data;
    std::vector<FeatureId> informative;            // column indices of planted features
    std::vector<GroundTruthEntry> ground_truth;    // one entry per column, column order
};

SynthResult generate(const SynthConfig& cfg);

/// `feature_name,role` with role in {informative, redundant_of:<name>, noise}.
void save_ground_truth(const std::vector<GroundTruthEntry>& gt, const std::filesystem::path& path);
std::vector<GroundTruthEntry> load_ground_truth(const std::filesystem::path& path);

}  // namespace micmac
