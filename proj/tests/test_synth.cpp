#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "doctest.h"
#include "helpers.hpp"
#include "micmac/synth.hpp"

using namespace micmac;

namespace {

// Welch t statistic and two-sided p on per-subject means of one column.
std::pair<double, double> subject_mean_t(const Dataset& d, FeatureId f) {
    std::vector<double> g0, g1;
    const auto subjects = d.subjects();
    const auto labels = d.subject_labels();
    for (std::size_t s = 0; s < subjects.size(); ++s) {
        const std::string one[] = {subjects[s]};
        double m = 0.0;
        const auto rows = d.rows_of(one);
        for (auto r : rows) m += d.values(r, f);
        (labels[s] == 1 ? g1 : g0).push_back(m / static_cast<double>(rows.size()));
    }
    auto stats = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double e : v) m += e;
        m /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double e : v) ss += (e - m) * (e - m);
        return std::pair{m, ss / static_cast<double>(v.size() - 1)};
    };
    const auto [m0, v0] = stats(g0);
    const auto [m1, v1] = stats(g1);
    const double n0 = static_cast<double>(g0.size()), n1 = static_cast<double>(g1.size());
    const double se2 = v0 / n0 + v1 / n1;
    const double t = (m1 - m0) / std::sqrt(se2);
    const double df = se2 * se2 / ((v0 / n0) * (v0 / n0) / (n0 - 1) + (v1 / n1) * (v1 / n1) / (n1 - 1));
    const boost::math::students_t dist(df);
    return {t, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)))};
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("default configuration shape") {
    SynthConfig sc;
    sc.seed = 7;
    const SynthResult r = generate(sc);
    CHECK(r.data.n_samples() == 540);
    CHECK(r.data.n_features() == 300);
    CHECK(r.informative.size() == 12);
    CHECK(r.ground_truth.size() == 300);
    CHECK(r.data.subjects().size() == 60);
    std::size_t redundant = 0, zero_label = 0;
    for (const auto& g : r.ground_truth) redundant += g.role == FeatureRole::redundant;
    for (int l : r.data.subject_labels()) zero_label += l == 0;
    CHECK(redundant == 12);
    CHECK(zero_label == 30);
    CHECK_NOTHROW(r.data.validate());
}

TEST_CASE("same seed gives byte-identical files, other seeds differ") {
    SynthConfig sc;
    sc.n_features = 50;
    testutil::TempDir dir("det");
    save_dataset(generate(sc).data, dir / "a.csv");
    save_dataset(generate(sc).data, dir / "b.csv");
    CHECK(testutil::read_file(dir / "a.csv") == testutil::read_file(dir / "b.csv"));
    sc.seed = 8;
    CHECK(!(generate(sc).data.values == generate(SynthConfig{.n_features = 50}).data.values));
}

TEST_CASE("each subject's samples share its offset") {
    SynthConfig sc;
    sc.n_features = 40;
    sc.effect_size = 0.0;
    sc.subject_effect_std = 5.0;
    const SynthResult r = generate(sc);
    // Within-subject variance of an informative column is the unit noise only.
    const FeatureId f = r.informative.front();
    double within = 0.0;
    for (const auto& s : r.data.subjects()) {
        const std::string one[] = {s};
        const auto rows = r.data.rows_of(one);
        double m = 0.0;
        for (auto row : rows) m += r.data.values(row, f);
        m /= static_cast<double>(rows.size());
        for (auto row : rows) within += (r.data.values(row, f) - m) * (r.data.values(row, f) - m);
    }
    within /= static_cast<double>(r.data.n_samples() - r.data.subjects().size());
    CHECK(within == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("zero effect leaves planted features indistinguishable from noise") {
    std::vector<double> informative_t, noise_t;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SynthConfig sc;
        sc.effect_size = 0.0;
        sc.n_features = 100;
        sc.seed = seed;
        const SynthResult r = generate(sc);
        for (std::size_t f = 0; f < r.data.n_features(); ++f) {
            const double t = std::abs(subject_mean_t(r.data, f).first);
            if (r.ground_truth[f].role == FeatureRole::informative) informative_t.push_back(t);
            if (r.ground_truth[f].role == FeatureRole::noise) noise_t.push_back(t);
        }
    }
    CHECK(std::abs(median(informative_t) - median(noise_t)) < 0.5);
}

TEST_CASE("copies correlate with their source near rho") {
    for (double rho : {0.5, 0.8, 0.95}) {
        SynthConfig sc;
        sc.rho = rho;
        const SynthResult r = generate(sc);
        for (std::size_t c = 0; c < r.ground_truth.size(); ++c) {
            const auto& g = r.ground_truth[c];
            if (g.role != FeatureRole::redundant) continue;
            const auto src = std::find(r.data.feature_names.begin(), r.data.feature_names.end(), g.source) -
                             r.data.feature_names.begin();
            const auto a = r.data.values.column(c);
            const auto b = r.data.values.column(static_cast<std::size_t>(src));
            double ma = 0, mb = 0;
            for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
            ma /= a.size(), mb /= b.size();
            double sab = 0, saa = 0, sbb = 0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                sab += (a[i] - ma) * (b[i] - mb);
                saa += (a[i] - ma) * (a[i] - ma);
                sbb += (b[i] - mb) * (b[i] - mb);
            }
            CHECK(std::abs(sab / std::sqrt(saa * sbb) - rho) <= 0.1);
        }
    }
}

TEST_CASE("planted features are significant on subject means") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        SynthConfig sc;
        sc.seed = seed;
        const SynthResult r = generate(sc);
        std::size_t significant = 0;
        for (auto f : r.informative) significant += subject_mean_t(r.data, f).second < 0.01;
        CHECK_MESSAGE(significant >= 10, "seed " << seed);
    }
}

TEST_CASE("ground truth sidecar round-trips") {
    SynthConfig sc;
    sc.n_features = 30;
    sc.n_informative = 4;
    sc.n_redundant_copies = 2;
    const SynthResult r = generate(sc);
    testutil::TempDir dir("gt");
    save_ground_truth(r.ground_truth, dir / "gt.csv");
    const auto back = load_ground_truth(dir / "gt.csv");
    REQUIRE(back.size() == r.ground_truth.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].feature_name == r.ground_truth[i].feature_name);
        CHECK(back[i].role == r.ground_truth[i].role);
        CHECK(back[i].source == r.ground_truth[i].source);
    }
    CHECK(testutil::read_file(dir / "gt.csv").find("redundant_of:") != std::string::npos);
}

TEST_CASE("invalid configurations are rejected") {
    CHECK_THROWS(generate(SynthConfig{.n_subjects = 7}));
    CHECK_THROWS(generate(SynthConfig{.n_features = 20, .n_informative = 12}));
    CHECK_THROWS(generate(SynthConfig{.effect_size = -1.0}));
    CHECK_THROWS(generate(SynthConfig{.rho = 1.0}));
}

}
