#include "micmac/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "micmac/random.hpp"

namespace micmac {

namespace {

std::string padded(const std::string& prefix, std::size_t i, std::size_t total) {
    const std::size_t width = std::max<std::size_t>(3, std::to_string(total - 1).size());
    std::string digits = std::to_string(i);
    return prefix + std::string(width - std::min(width, digits.size()), '0') + digits;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_subjects < 2 || n_subjects % 2 != 0) throw std::invalid_argument("synth: n_subjects must be even and >= 2");
    if (samples_per_subject < 1) throw std::invalid_argument("synth: samples_per_subject must be >= 1");
    if (n_features < 1) throw std::invalid_argument("synth: n_features must be >= 1");
    if (n_informative + n_informative * n_redundant_copies > n_features) {
        throw std::invalid_argument("synth: informative features plus their copies exceed n_features");
    }
    if (!(effect_size >= 0.0)) throw std::invalid_argument("synth: effect_size must be >= 0");
    if (!(subject_effect_std >= 0.0)) throw std::invalid_argument("synth: subject_effect_std must be >= 0");
    if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("synth: rho must be in [0, 1)");
}

SynthResult generate(const SynthConfig& cfg) {
    cfg.validate();
    const std::size_t n_rows = cfg.n_subjects * cfg.samples_per_subject;
    const std::size_t n_dup = cfg.n_informative * cfg.n_redundant_copies;

    // Logical feature order: informative, their copies, noise. Columns are then
    // shuffled so planted features do not sit at predictable positions.
    std::vector<std::size_t> column_of(cfg.n_features);
    std::iota(column_of.begin(), column_of.end(), 0);
    Rng layout_rng(derive_seed(cfg.seed, {0}));
    std::shuffle(column_of.begin(), column_of.end(), layout_rng);

    SynthResult out;
    Dataset& d = out.data;
    d.values = Matrix(n_rows, cfg.n_features);
    d.feature_names.resize(cfg.n_features);
    for (std::size_t c = 0; c < cfg.n_features; ++c) d.feature_names[c] = padded("f", c, cfg.n_features);

    std::normal_distribution<double> unit(0.0, 1.0);
    Rng offset_rng(derive_seed(cfg.seed, {1}));
    Rng noise_rng(derive_seed(cfg.seed, {2}));
    Rng dup_rng(derive_seed(cfg.seed, {3}));

    for (std::size_t s = 0; s < cfg.n_subjects; ++s) {
        const int label = s < cfg.n_subjects / 2 ? 0 : 1;
        const std::string sid = padded("s", s, cfg.n_subjects);
        std::vector<double> offsets(cfg.n_informative);
        for (auto& o : offsets) o = cfg.subject_effect_std * unit(offset_rng);
        for (std::size_t t = 0; t < cfg.samples_per_subject; ++t) {
            const std::size_t r = s * cfg.samples_per_subject + t;
            d.subject_ids.push_back(sid);
            d.time_points.push_back(static_cast<int>(t + 1));
            d.labels.push_back(label);
            for (std::size_t f = 0; f < cfg.n_features; ++f) {
                if (f >= cfg.n_informative && f < cfg.n_informative + n_dup) continue;
                if (f < cfg.n_informative) {
                    const double class_mean = (label == 1 ? 0.5 : -0.5) * cfg.effect_size;
                    d.values(r, column_of[f]) = class_mean + offsets[f] + unit(noise_rng);
                } else {
                    d.values(r, column_of[f]) = unit(noise_rng);
                }
            }
            // Copies are built from the source scaled to unit marginal variance so the
            // population correlation with the source is exactly rho.
            const double source_sd = std::sqrt(0.25 * cfg.effect_size * cfg.effect_size +
                                               cfg.subject_effect_std * cfg.subject_effect_std + 1.0);
            const double keep = std::sqrt(1.0 - cfg.rho * cfg.rho);
            for (std::size_t k = 0; k < n_dup; ++k) {
                const std::size_t src = k / cfg.n_redundant_copies;
                d.values(r, column_of[cfg.n_informative + k]) = cfg.rho * d.values(r, column_of[src]) / source_sd + keep * unit(dup_rng);
            }
        }
    }

    out.ground_truth.resize(cfg.n_features);
    for (std::size_t f = 0; f < cfg.n_features; ++f) {
        auto& e = out.ground_truth[column_of[f]];
        e.feature_name = d.feature_names[column_of[f]];
        if (f < cfg.n_informative) {
            e.role = FeatureRole::informative;
            out.informative.push_back(column_of[f]);
        } else if (f < cfg.n_informative + n_dup) {
            e.role = FeatureRole::redundant;
            e.source = d.feature_names[column_of[(f - cfg.n_informative) / cfg.n_redundant_copies]];
        }
    }
    std::sort(out.informative.begin(), out.informative.end());
    d.validate();
    return out;
}

void save_ground_truth(const std::vector<GroundTruthEntry>& gt, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "feature_name,role\n";
    for (const auto& e : gt) {
        out << e.feature_name << ',';
        switch (e.role) {
            case FeatureRole::informative: out << "informative"; break;
            case FeatureRole::redundant: out << "redundant_of:" << e.source; break;
            case FeatureRole::noise: out << "noise"; break;
        }
        out << '\n';
    }
}

std::vector<GroundTruthEntry> load_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("feature_name,role", 0) != 0) {
        throw DataError("malformed ground truth header in " + path.string());
    }
    std::vector<GroundTruthEntry> gt;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError("ground truth row " + std::to_string(row) + " has no role");
        GroundTruthEntry e;
        e.feature_name = line.substr(0, comma);
        const std::string role = line.substr(comma + 1);
        if (role == "informative") {
            e.role = FeatureRole::informative;
        } else if (role == "noise") {
            e.role = FeatureRole::noise;
        } else if (role.rfind("redundant_of:", 0) == 0) {
            e.role = FeatureRole::redundant;
            e.source = role.substr(13);
        } else {
            throw DataError("unknown role '" + role + "' at ground truth row " + std::to_string(row));
        }
        gt.push_back(std::move(e));
    }
    return gt;
}

}  // namespace micmac
