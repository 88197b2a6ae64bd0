#include "micmac/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace micmac {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

bool is_approximate(const std::string& scheme) { return scheme.rfind("MDRMR-", 0) == 0; }

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string render_svg(const std::vector<std::string>& names, const std::vector<std::vector<double>>& curves) {
    constexpr double left = 70, right = 230, top = 30, bottom = 60;
    constexpr double width = 800 - left - right, height = 500 - top - bottom;
    std::size_t k_max = 1;
    for (const auto& c : curves) k_max = std::max(k_max, c.size());
    double lo = 1.0, hi = 0.0;
    for (const auto& c : curves) {
        for (double v : c) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    lo = std::max(0.0, std::floor(lo * 10.0) / 10.0);
    hi = std::min(1.0, std::ceil(hi * 10.0) / 10.0);
    if (hi <= lo) hi = std::min(1.0, lo + 0.1), lo = hi - 0.1;
    auto px = [&](std::size_t k) {
        return left + (k_max > 1 ? width * static_cast<double>(k - 1) / static_cast<double>(k_max - 1) : 0.0);
    };
    auto py = [&](double acc) { return top + height * (1.0 - (acc - lo) / (hi - lo)); };

    std::ostringstream s;
    s.precision(6);
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" width=\"800\" height=\"500\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
    s << "<g stroke=\"black\" stroke-width=\"1\">\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top + height << "\" x2=\"" << left + width << "\" y2=\"" << top + height
      << "\"/>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + height << "\"/>\n";
    s << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double acc = lo + (hi - lo) * i / 5.0;
        s << "<text x=\"" << left - 8 << "\" y=\"" << py(acc) + 4 << "\" text-anchor=\"end\">" << acc << "</text>\n";
    }
    const std::size_t step = std::max<std::size_t>(1, k_max / 10);
    for (std::size_t k = 1; k <= k_max; k += step) {
        s << "<text x=\"" << px(k) << "\" y=\"" << top + height + 18 << "\" text-anchor=\"middle\">" << k << "</text>\n";
    }
    s << "<text x=\"" << left + width / 2 << "\" y=\"" << 500 - 18
      << "\" text-anchor=\"middle\">number of features selected</text>\n";
    s << "<text x=\"18\" y=\"" << top + height / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + height / 2 << ")\">averaged accuracy</text>\n</g>\n";

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const char* color = kPalette[i % std::size(kPalette)];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 1; k <= curves[i].size(); ++k) {
            s << (k > 1 ? " " : "") << px(k) << ',' << py(curves[i][k - 1]);
        }
        s << "\"/>\n";
        const double ly = top + 10 + 20.0 * static_cast<double>(i);
        s << "<line x1=\"" << left + width + 20 << "\" y1=\"" << ly << "\" x2=\"" << left + width + 45 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << left + width + 52 << "\" y=\"" << ly + 4
          << "\" font-family=\"sans-serif\" font-size=\"12\">" << names[i] << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

void emit_summary(const std::vector<SchemeAccuracies>& schemes, const std::filesystem::path& out_dir) {
    if (schemes.empty()) throw std::invalid_argument("no results");
    std::filesystem::create_directories(out_dir);

    std::vector<std::string> names;
    std::vector<std::vector<double>> means;
    auto summary_out = open_out(out_dir / "report.csv");
    summary_out << "scheme,best_acc,best_acc_std,best_k,top12_acc,top12_std,approximate\n";
    for (const auto& sc : schemes) {
        const CurveSummary s = summarize(sc.per_repeat_accuracy);
        summary_out << sc.scheme << ',' << format_double(s.best_acc) << ',' << format_double(s.best_std) << ','
                    << s.best_k << ',' << format_double(s.top12_acc) << ',' << format_double(s.top12_std) << ','
                    << (is_approximate(sc.scheme) ? "true" : "false") << '\n';

        auto curve_out = open_out(out_dir / ("curve_" + sc.scheme + ".csv"));
        curve_out << "k,mean_acc,std_acc\n";
        for (std::size_t k = 1; k <= s.mean.size(); ++k) {
            curve_out << k << ',' << format_double(s.mean[k - 1]) << ',' << format_double(s.std[k - 1]) << '\n';
        }
        names.push_back(sc.scheme);
        means.push_back(s.mean);
    }
    auto svg_out = open_out(out_dir / "accuracy_vs_k.svg");
    svg_out << render_svg(names, means);
}

void emit_report(const ExperimentReport& r, const std::filesystem::path& out_dir) {
    if (r.schemes.empty()) throw std::invalid_argument("no results");
    std::filesystem::create_directories(out_dir);

    std::vector<SchemeAccuracies> raw;
    auto exp_out = open_out(out_dir / "experiments.csv");
    exp_out << "scheme,repeat,k,accuracy\n";
    auto conf_out = open_out(out_dir / "confusion.csv");
    conf_out << "scheme,best_k,tp,fp,tn,fn\n";
    for (const auto& sr : r.schemes) {
        const std::string name = sr.scheme.name();
        if (sr.per_repeat_accuracy.empty() || sr.per_repeat_accuracy.front().empty()) {
            throw std::invalid_argument("no results");
        }
        for (std::size_t rep = 0; rep < sr.per_repeat_accuracy.size(); ++rep) {
            for (std::size_t k = 1; k <= sr.per_repeat_accuracy[rep].size(); ++k) {
                exp_out << name << ',' << rep << ',' << k << ',' << format_double(sr.per_repeat_accuracy[rep][k - 1])
                        << '\n';
            }
        }
        const auto& c = sr.best_k_confusion;
        conf_out << name << ',' << sr.summary.best_k << ',' << c.tp << ',' << c.fp << ',' << c.tn << ',' << c.fn << '\n';

        const std::size_t n_folds = sr.rankings.empty() ? 0 : sr.rankings.front().size();
        for (std::size_t fold = 0; fold < n_folds; ++fold) {
            auto rank_out = open_out(out_dir / ("ranking_" + name + "_fold" + std::to_string(fold) + ".csv"));
            rank_out << "repeat,rank,feature_name,count,mean_merit\n";
            for (std::size_t rep = 0; rep < sr.rankings.size(); ++rep) {
                const auto& ranking = sr.rankings[rep][fold];
                for (std::size_t i = 0; i < ranking.size(); ++i) {
                    rank_out << rep << ',' << i + 1 << ',' << ranking[i].name << ',' << ranking[i].count << ','
                             << format_double(ranking[i].mean_merit) << '\n';
                }
            }
        }
        raw.push_back({name, sr.per_repeat_accuracy});
    }
    emit_summary(raw, out_dir);
}

std::vector<SchemeAccuracies> load_experiments(const std::filesystem::path& path) {
    const auto file = std::filesystem::is_directory(path) ? path / "experiments.csv" : path;
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("scheme,repeat,k,accuracy", 0) != 0) {
        throw std::runtime_error("malformed experiments header in " + file.string());
    }
    std::vector<SchemeAccuracies> out;
    std::map<std::string, std::size_t> index;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream cells(line);
        std::string scheme, rep_s, k_s, acc_s;
        if (!std::getline(cells, scheme, ',') || !std::getline(cells, rep_s, ',') || !std::getline(cells, k_s, ',') ||
            !std::getline(cells, acc_s)) {
            throw std::runtime_error("malformed row " + std::to_string(row) + " in " + file.string());
        }
        std::size_t rep = 0, k = 0;
        double acc = 0.0;
        try {
            rep = std::stoul(rep_s);
            k = std::stoul(k_s);
            acc = std::stod(acc_s);
        } catch (const std::exception&) {
            throw std::runtime_error("non-numeric value at row " + std::to_string(row) + " in " + file.string());
        }
        if (k == 0) throw std::runtime_error("k must be >= 1 at row " + std::to_string(row));
        auto [it, inserted] = index.try_emplace(scheme, out.size());
        if (inserted) out.push_back({scheme, {}});
        auto& curves = out[it->second].per_repeat_accuracy;
        if (curves.size() <= rep) curves.resize(rep + 1);
        if (curves[rep].size() < k) curves[rep].resize(k, std::numeric_limits<double>::quiet_NaN());
        curves[rep][k - 1] = acc;
    }
    for (const auto& s : out) {
        for (const auto& c : s.per_repeat_accuracy) {
            if (c.size() != s.per_repeat_accuracy.front().size() ||
                std::any_of(c.begin(), c.end(), [](double v) { return std::isnan(v); })) {
                throw std::runtime_error("incomplete accuracy curves for scheme " + s.scheme);
            }
        }
    }
    if (out.empty()) throw std::runtime_error("no results in " + file.string());
    return out;
}

void write_tukey_csv(const std::vector<PairwiseComparison>& rows, const std::filesystem::path& path) {
    auto out = open_out(path);
    out << "group_a,group_b,q,p\n";
    for (const auto& r : rows) {
        out << r.group_a << ',' << r.group_b << ',' << format_double(r.q) << ',' << format_double(r.p) << '\n';
    }
}

}  // namespace micmac
