#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "micmac/dataset.hpp"

namespace testutil {

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("micmac_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// One sample per subject, labels alternating 1, 0, 1, ...
inline micmac::Dataset one_sample_dataset(const micmac::Matrix& x, std::vector<std::string> names = {}) {
    micmac::Dataset d;
    d.values = x;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        d.subject_ids.push_back("s" + std::to_string(r));
        d.time_points.push_back(1);
        d.labels.push_back(r % 2 == 0 ? 1 : 0);
    }
    if (names.empty()) {
        for (std::size_t c = 0; c < x.cols(); ++c) names.push_back("f" + std::to_string(c));
    }
    d.feature_names = std::move(names);
    return d;
}

}  // namespace testutil
