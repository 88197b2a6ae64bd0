#include "micmac/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace micmac {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    return s.substr(i);
}

std::string where(std::size_t row, std::size_t col) {
    return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

double parse_double(const std::string& cell, std::size_t row, std::size_t col) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || cell.empty()) {
        throw DataError("non-numeric cell '" + cell + "' at " + where(row, col));
    }
    if (!std::isfinite(v)) throw DataError("NaN/Inf cell at " + where(row, col));
    return v;
}

int parse_int(const std::string& cell, std::size_t row, std::size_t col) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw DataError("non-integer cell '" + cell + "' at " + where(row, col));
    }
    return v;
}

void write_double(std::ostream& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
}

}  // namespace

std::vector<std::string> Dataset::subjects() const {
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& s : subject_ids) {
        if (seen.insert(s).second) out.push_back(s);
    }
    return out;
}

std::vector<int> Dataset::subject_labels() const {
    std::unordered_map<std::string, int> label_of;
    for (std::size_t i = 0; i < subject_ids.size(); ++i) label_of.emplace(subject_ids[i], labels[i]);
    std::vector<int> out;
    for (const auto& s : subjects()) out.push_back(label_of.at(s));
    return out;
}

std::vector<RowId> Dataset::rows_of(std::span<const std::string> subjects) const {
    std::unordered_set<std::string> wanted(subjects.begin(), subjects.end());
    std::vector<RowId> rows;
    for (std::size_t i = 0; i < subject_ids.size(); ++i) {
        if (wanted.contains(subject_ids[i])) rows.push_back(i);
    }
    return rows;
}

Dataset Dataset::subset_rows(std::span<const RowId> rows) const {
    Dataset out;
    out.values = values.select_rows(rows);
    out.feature_names = feature_names;
    for (auto r : rows) {
        out.subject_ids.push_back(subject_ids[r]);
        out.time_points.push_back(time_points[r]);
        out.labels.push_back(labels[r]);
    }
    return out;
}

void Dataset::validate() const {
    const std::size_t n = values.rows();
    if (subject_ids.size() != n || time_points.size() != n || labels.size() != n) {
        throw DataError("per-sample metadata length does not match row count");
    }
    if (feature_names.size() != values.cols()) throw DataError("feature name count does not match column count");
    if (values.cols() == 0) throw DataError("no feature columns");

    std::unordered_set<std::string> names;
    for (const auto& f : feature_names) {
        if (!names.insert(f).second) throw DataError("duplicate feature name '" + f + "'");
    }

    std::map<std::string, std::pair<int, std::size_t>> per_subject;  // label, count
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw DataError("label must be 0 or 1 at " + where(i + 1, 3));
        }
        auto [it, inserted] = per_subject.try_emplace(subject_ids[i], labels[i], 0);
        if (it->second.first != labels[i]) {
            throw DataError("inconsistent label for subject '" + subject_ids[i] + "' at " + where(i + 1, 3));
        }
        ++it->second.second;
        for (std::size_t j = 0; j < values.cols(); ++j) {
            if (!std::isfinite(values(i, j))) throw DataError("NaN/Inf value at " + where(i + 1, j + 4));
        }
    }
    if (!per_subject.empty()) {
        const std::size_t expected = per_subject.begin()->second.second;
        for (const auto& [subject, info] : per_subject) {
            if (info.second != expected) {
                throw DataError("subject '" + subject + "' has " + std::to_string(info.second) +
                                " samples, expected " + std::to_string(expected));
            }
        }
    }
}

void assert_subject_disjoint(const Dataset& train, const Dataset& eval, const std::string& context) {
    std::unordered_set<std::string> seen(train.subject_ids.begin(), train.subject_ids.end());
    for (const auto& s : eval.subject_ids) {
        if (seen.contains(s)) throw LeakageError(context + ": subject '" + s + "' is on both sides of the split");
    }
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file " + path.string());
    auto header = split_csv_line(trim(line));
    for (auto& h : header) h = trim(h);
    static const char* const kFixed[] = {"subject_id", "time_point", "label"};
    if (header.size() < 3) throw DataError("malformed header: expected subject_id,time_point,label,...");
    for (std::size_t j = 0; j < 3; ++j) {
        if (header[j] != kFixed[j]) {
            throw DataError("malformed header: column " + std::to_string(j + 1) + " must be '" + kFixed[j] +
                            "', got '" + header[j] + "'");
        }
    }
    if (header.size() == 3) throw DataError("no feature columns");

    Dataset d;
    d.feature_names.assign(header.begin() + 3, header.end());
    const std::size_t n_features = d.feature_names.size();
    std::vector<double> flat;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = trim(line);
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != n_features + 3) {
            throw DataError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(n_features + 3));
        }
        d.subject_ids.push_back(trim(cells[0]));
        d.time_points.push_back(parse_int(trim(cells[1]), row, 2));
        d.labels.push_back(parse_int(trim(cells[2]), row, 3));
        for (std::size_t j = 0; j < n_features; ++j) flat.push_back(parse_double(trim(cells[j + 3]), row, j + 4));
    }
    d.values = Matrix(d.subject_ids.size(), n_features);
    for (std::size_t i = 0; i < d.values.rows(); ++i) {
        for (std::size_t j = 0; j < n_features; ++j) d.values(i, j) = flat[i * n_features + j];
    }
    d.validate();
    return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "subject_id,time_point,label";
    for (const auto& f : d.feature_names) out << ',' << f;
    out << '\n';
    for (std::size_t i = 0; i < d.n_samples(); ++i) {
        out << d.subject_ids[i] << ',' << d.time_points[i] << ',' << d.labels[i];
        for (double v : d.values.row(i)) {
            out << ',';
            write_double(out, v);
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed for " + path.string());
}

Scaler fit_scaler(const Matrix& x, std::span<const RowId> sample_ids) {
    if (sample_ids.empty()) throw std::invalid_argument("fit_scaler: empty sample set");
    Scaler s;
    s.mean.assign(x.cols(), 0.0);
    s.stddev.assign(x.cols(), 0.0);
    const double n = static_cast<double>(sample_ids.size());
    for (auto r : sample_ids) {
        const auto row = x.row(r);
        for (std::size_t j = 0; j < x.cols(); ++j) s.mean[j] += row[j];
    }
    for (auto& m : s.mean) m /= n;
    for (auto r : sample_ids) {
        const auto row = x.row(r);
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double dev = row[j] - s.mean[j];
            s.stddev[j] += dev * dev;
        }
    }
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const double sd = std::sqrt(s.stddev[j] / n);
        // rounding residue of a constant column is not a scale
        s.stddev[j] = sd <= 1e-12 * std::max(1.0, std::abs(s.mean[j])) ? 0.0 : sd;
    }
    return s;
}

Matrix apply_scaler(const Scaler& s, const Matrix& x) {
    if (s.mean.size() != x.cols()) throw std::invalid_argument("apply_scaler: feature-set mismatch");
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            // Columns that were constant on the fitted rows carry no scale; map to zero.
            out(i, j) = s.stddev[j] > 0.0 ? (x(i, j) - s.mean[j]) / s.stddev[j] : 0.0;
        }
    }
    return out;
}

Scaler fit_scaler(const Dataset& d, std::span<const RowId> sample_ids) {
    Scaler s = fit_scaler(d.values, sample_ids);
    s.feature_names = d.feature_names;
    return s;
}

Dataset apply_scaler(const Scaler& s, const Dataset& d) {
    if (s.feature_names != d.feature_names) throw std::invalid_argument("apply_scaler: feature-set mismatch");
    Dataset out = d;
    out.values = apply_scaler(s, d.values);
    return out;
}

double cosine_redundancy(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine_redundancy: length mismatch");
    if (a.empty()) throw std::invalid_argument("cosine_redundancy: empty vectors");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::min(1.0, std::abs(dot) / (std::sqrt(na) * std::sqrt(nb)));
}

}  // namespace micmac
