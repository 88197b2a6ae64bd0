#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "micmac/cv.hpp"
#include "micmac/random.hpp"

namespace micmac {

std::string Scheme::name() const {
    switch (selector) {
        case SelectorKind::micmac: return "MICMAC-" + to_string(wrapper) + "W-" + to_string(classifier) + "C";
        case SelectorKind::mrmr: return "mRMR-" + to_string(classifier) + "C";
        case SelectorKind::mdrmr: return "MDRMR-" + to_string(classifier) + "C";
    }
    return "?";
}

std::vector<std::string> valid_scheme_specs() {
    return {"micmac:knn:knn", "micmac:knn:svm", "micmac:svm:knn", "micmac:svm:svm",
            "mrmr:knn",       "mrmr:svm",       "mdrmr:knn",      "mdrmr:svm"};
}

Scheme parse_scheme(const std::string& spec) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const auto colon = spec.find(':', start);
        parts.push_back(spec.substr(start, colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    auto classifier_of = [&](const std::string& s) {
        if (s != "knn" && s != "svm") throw std::invalid_argument("unknown scheme '" + spec + "'");
        return parse_learner_kind(s);
    };
    Scheme sc;
    if (parts.size() == 3 && parts[0] == "micmac") {
        sc.selector = SelectorKind::micmac;
        sc.wrapper = classifier_of(parts[1]);
        sc.classifier = classifier_of(parts[2]);
    } else if (parts.size() == 2 && (parts[0] == "mrmr" || parts[0] == "mdrmr")) {
        sc.selector = parts[0] == "mrmr" ? SelectorKind::mrmr : SelectorKind::mdrmr;
        sc.classifier = classifier_of(parts[1]);
    } else {
        throw std::invalid_argument("unknown scheme '" + spec + "'");
    }
    return sc;
}

std::vector<Scheme> all_schemes() {
    std::vector<Scheme> out;
    for (const auto& s : valid_scheme_specs()) out.push_back(parse_scheme(s));
    return out;
}

namespace {

struct FoldJobResult {
    std::vector<std::vector<RankedFeature>> rankings;  // per scheme
    std::vector<FoldCurve> curves;                     // per scheme
    std::size_t leakage_checks = 0;
};

std::uint64_t forest_seed_for(std::uint64_t base, std::size_t repeat, std::size_t outer) {
    return derive_seed(base, {repeat, outer, 0xF0});
}

FoldSelection select_in_fold(const Dataset& d, const OuterFold& fold, const SelectorConfig& cfg,
                             std::uint64_t forest_seed, std::size_t& checks) {
    const Dataset train_val = d.subset_rows(d.rows_of(fold.train_val));
    const Dataset test = d.subset_rows(d.rows_of(fold.test));
    assert_subject_disjoint(train_val, test, "preselection");
    ++checks;

    SelectorConfig sc = cfg;
    sc.forest.seed = forest_seed;
    FoldSelection out;
    out.f0 = preselect_rf(train_val, sc);
    for (const auto& inner : fold.inner) {
        const Dataset tr = d.subset_rows(d.rows_of(inner.train));
        const Dataset va = d.subset_rows(d.rows_of(inner.validation));
        assert_subject_disjoint(tr, va, "inner fold");
        assert_subject_disjoint(tr, test, "inner fold vs test");
        assert_subject_disjoint(va, test, "inner validation vs test");
        checks += 3;
        out.traces.push_back(micmac_select(tr, va, out.f0, sc));
    }
    return out;
}

/// Frequency ranking followed by the never-selected F0 features in F0 order.
std::vector<RankedFeature> full_ranking(const FoldSelection& sel, const Dataset& d) {
    std::vector<RankedFeature> ranked = rank_by_frequency(sel.traces);
    std::set<FeatureId> present;
    for (const auto& r : ranked) present.insert(r.id);
    for (auto f : sel.f0) {
        if (!present.contains(f)) ranked.push_back({f, d.feature_names[f], 0, 0.0});
    }
    return ranked;
}

std::vector<FeatureId> ids_of(const std::vector<RankedFeature>& r) {
    std::vector<FeatureId> out;
    for (const auto& e : r) out.push_back(e.id);
    return out;
}

FoldJobResult run_fold_job(const Dataset& d, const ExperimentConfig& cfg, const OuterFold& fold, std::size_t repeat,
                           std::size_t outer, std::size_t k_max) {
    FoldJobResult res;
    const std::uint64_t forest_seed = forest_seed_for(cfg.base_seed, repeat, outer);

    // MICMAC traces depend only on the wrapper; compute each wrapper once.
    std::unordered_map<int, std::vector<RankedFeature>> micmac_rank;
    std::optional<std::vector<FeatureId>> f0;
    for (const auto& s : cfg.schemes) {
        if (s.selector != SelectorKind::micmac || micmac_rank.contains(static_cast<int>(s.wrapper))) continue;
        SelectorConfig sc = cfg.selector;
        sc.wrapper = s.wrapper == LearnerKind::knn ? cfg.knn : cfg.svm;
        const FoldSelection sel = select_in_fold(d, fold, sc, forest_seed, res.leakage_checks);
        f0 = sel.f0;
        micmac_rank[static_cast<int>(s.wrapper)] = full_ranking(sel, d);
    }

    std::optional<Dataset> train_val;
    auto need_train_val = [&]() -> const Dataset& {
        if (!train_val) train_val = d.subset_rows(d.rows_of(fold.train_val));
        return *train_val;
    };
    if (!f0) {
        SelectorConfig sc = cfg.selector;
        sc.forest.seed = forest_seed;
        f0 = preselect_rf(need_train_val(), sc);
    }

    std::unordered_map<int, std::vector<RankedFeature>> mi_rank;
    for (const auto& s : cfg.schemes) {
        if (s.selector == SelectorKind::micmac || mi_rank.contains(static_cast<int>(s.selector))) continue;
        const auto ids = s.selector == SelectorKind::mrmr
                             ? mrmr_select(need_train_val(), f0->size(), *f0, cfg.selector.mi_bin_width)
                             : mdrmr_select(need_train_val(), f0->size(), *f0, cfg.selector.mi_bin_width);
        std::vector<RankedFeature> r;
        for (auto id : ids) r.push_back({id, d.feature_names[id], 0, 0.0});
        mi_rank[static_cast<int>(s.selector)] = std::move(r);
    }

    for (const auto& s : cfg.schemes) {
        const auto& ranking = s.selector == SelectorKind::micmac ? micmac_rank.at(static_cast<int>(s.wrapper))
                                                                 : mi_rank.at(static_cast<int>(s.selector));
        const LearnerConfig& clf = s.classifier == LearnerKind::knn ? cfg.knn : cfg.svm;
        res.curves.push_back(evaluate_fold_topk(d, fold, ids_of(ranking), clf, k_max));
        ++res.leakage_checks;
        res.rankings.push_back(ranking);
    }
    return res;
}

}  // namespace

std::vector<FoldSelection> run_selection_over_folds(const Dataset& d, const FoldPlan& plan, const SelectorConfig& cfg,
                                                    std::uint64_t forest_seed) {
    std::vector<FoldSelection> out(plan.outer.size());
    std::size_t checks = 0;
    for (std::size_t o = 0; o < plan.outer.size(); ++o) {
        out[o] = select_in_fold(d, plan.outer[o], cfg, derive_seed(forest_seed, {o}), checks);
    }
    return out;
}

FoldCurve evaluate_fold_topk(const Dataset& d, const OuterFold& fold, const std::vector<FeatureId>& ranking,
                             const LearnerConfig& classifier, std::size_t k_max) {
    const std::vector<RowId> train_rows = d.rows_of(fold.train_val);
    const std::vector<RowId> test_rows = d.rows_of(fold.test);
    {
        const std::set<std::string> train_subjects(fold.train_val.begin(), fold.train_val.end());
        for (auto r : test_rows) {
            if (train_subjects.contains(d.subject_ids[r])) {
                throw LeakageError("evaluate_fold_topk: subject '" + d.subject_ids[r] + "' in train and test");
            }
        }
    }
    if (k_max > ranking.size()) k_max = ranking.size();
    if (k_max == 0) throw std::invalid_argument("evaluate_fold_topk: empty ranking");

    const std::vector<FeatureId> cols(ranking.begin(), ranking.begin() + static_cast<std::ptrdiff_t>(k_max));
    const Matrix raw_train = d.values.select(train_rows, cols);
    std::vector<RowId> all(raw_train.rows());
    std::iota(all.begin(), all.end(), 0);
    const Scaler scaler = fit_scaler(raw_train, all);
    const Matrix x_train = apply_scaler(scaler, raw_train);
    const Matrix x_test = apply_scaler(scaler, d.values.select(test_rows, cols));
    std::vector<int> y_train;
    for (auto r : train_rows) y_train.push_back(d.labels[r]);

    // Test samples grouped by subject in fold.test order.
    std::unordered_map<std::string, std::size_t> subject_pos;
    for (std::size_t i = 0; i < fold.test.size(); ++i) subject_pos[fold.test[i]] = i;
    std::vector<int> subject_label(fold.test.size(), 0);
    for (auto r : test_rows) subject_label[subject_pos.at(d.subject_ids[r])] = d.labels[r];

    FoldCurve curve;
    curve.n_test_subjects = fold.test.size();
    curve.correct.resize(k_max);
    curve.confusion.resize(k_max);

    auto score = [&](std::size_t k, const std::vector<int>& sample_pred) {
        std::vector<std::vector<int>> grouped(fold.test.size());
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            grouped[subject_pos.at(d.subject_ids[test_rows[i]])].push_back(sample_pred[i]);
        }
        const std::vector<int> voted = majority_vote(grouped);
        Confusion c;
        std::size_t correct = 0;
        for (std::size_t s = 0; s < voted.size(); ++s) {
            correct += voted[s] == subject_label[s];
            if (voted[s] == 1) (subject_label[s] == 1 ? c.tp : c.fp)++;
            else (subject_label[s] == 0 ? c.tn : c.fn)++;
        }
        curve.correct[k - 1] = correct;
        curve.confusion[k - 1] = c;
    };

    if (classifier.kind == LearnerKind::knn) {
        classifier.validate();
        // Prefix distances grow one column at a time, in the same order a
        // from-scratch fit would sum them.
        const std::size_t nt = x_train.rows();
        std::vector<double> d2(x_test.rows() * nt, 0.0);
        std::vector<int> pred(x_test.rows());
        for (std::size_t k = 1; k <= k_max; ++k) {
            const std::size_t col = k - 1;
            for (std::size_t q = 0; q < x_test.rows(); ++q) {
                double* row = d2.data() + q * nt;
                for (std::size_t i = 0; i < nt; ++i) {
                    const double diff = x_test(q, col) - x_train(i, col);
                    row[i] += diff * diff;
                }
                pred[q] = knn_vote(std::span<const double>(row, nt), y_train, classifier.knn_k);
            }
            score(k, pred);
        }
    } else {
        std::vector<std::size_t> prefix;
        for (std::size_t k = 1; k <= k_max; ++k) {
            prefix.push_back(k - 1);
            const TrainedModel m = train(classifier, x_train.select_cols(prefix), y_train);
            score(k, predict(m, x_test.select_cols(prefix)));
        }
    }
    return curve;
}

TopkCurve evaluate_topk_curve(const Dataset& d, const FoldPlan& plan,
                              const std::vector<std::vector<FeatureId>>& rankings, const LearnerConfig& classifier,
                              std::size_t k_max) {
    if (rankings.size() != plan.outer.size()) throw std::invalid_argument("evaluate_topk_curve: one ranking per fold");
    TopkCurve out;
    for (const auto& r : rankings) k_max = std::min(k_max, r.size());
    for (std::size_t o = 0; o < plan.outer.size(); ++o) {
        out.folds.push_back(evaluate_fold_topk(d, plan.outer[o], rankings[o], classifier, k_max));
    }
    const double n = static_cast<double>(out.folds.size());
    out.mean.assign(k_max, 0.0);
    out.std.assign(k_max, 0.0);
    for (std::size_t k = 1; k <= k_max; ++k) {
        double sum = 0.0;
        for (const auto& f : out.folds) sum += f.accuracy(k);
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& f : out.folds) ss += (f.accuracy(k) - mean) * (f.accuracy(k) - mean);
        out.mean[k - 1] = mean;
        out.std[k - 1] = out.folds.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
    return out;
}

CurveSummary summarize(const std::vector<std::vector<double>>& per_repeat_accuracy) {
    if (per_repeat_accuracy.empty() || per_repeat_accuracy.front().empty()) {
        throw std::invalid_argument("no results");
    }
    const std::size_t k_max = per_repeat_accuracy.front().size();
    const double n = static_cast<double>(per_repeat_accuracy.size());
    CurveSummary s;
    s.mean.assign(k_max, 0.0);
    s.std.assign(k_max, 0.0);
    for (std::size_t k = 0; k < k_max; ++k) {
        double sum = 0.0;
        for (const auto& r : per_repeat_accuracy) sum += r.at(k);
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& r : per_repeat_accuracy) ss += (r[k] - mean) * (r[k] - mean);
        s.mean[k] = mean;
        s.std[k] = per_repeat_accuracy.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
    s.best_k = static_cast<std::size_t>(std::max_element(s.mean.begin(), s.mean.end()) - s.mean.begin()) + 1;
    s.best_acc = s.mean[s.best_k - 1];
    s.best_std = s.std[s.best_k - 1];
    s.top12_k = std::min<std::size_t>(12, k_max);
    s.top12_acc = s.mean[s.top12_k - 1];
    s.top12_std = s.std[s.top12_k - 1];
    return s;
}

ExperimentReport run_experiments(const Dataset& d, const ExperimentConfig& cfg) {
    if (cfg.schemes.empty()) throw std::invalid_argument("run_experiments: no schemes");
    if (cfg.n_repeats < 1) throw std::invalid_argument("run_experiments: n_repeats must be >= 1");
    if (cfg.jobs < 1) throw std::invalid_argument("run_experiments: jobs must be >= 1");
    cfg.selector.validate();
    const auto started = std::chrono::steady_clock::now();

    const std::vector<std::string> subjects = d.subjects();
    std::vector<FoldPlan> plans;
    for (std::size_t r = 0; r < cfg.n_repeats; ++r) {
        plans.push_back(make_fold_plan(subjects, d.subject_labels(), cfg.n_outer, cfg.n_inner, cfg.base_seed + r));
        verify_fold_plan(plans.back(), subjects);
    }
    const std::size_t n_outer = plans.front().outer.size();
    const std::size_t k_max = std::min({cfg.k_max, cfg.selector.preselect_n, d.n_features()});

    const std::size_t n_jobs = cfg.n_repeats * n_outer;
    std::vector<FoldJobResult> results(n_jobs);
    std::vector<std::exception_ptr> errors(n_jobs);
    const auto n = static_cast<std::ptrdiff_t>(n_jobs);
#pragma omp parallel for schedule(dynamic) num_threads(cfg.jobs)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        const std::size_t r = static_cast<std::size_t>(j) / n_outer;
        const std::size_t o = static_cast<std::size_t>(j) % n_outer;
        try {
            results[j] = run_fold_job(d, cfg, plans[r].outer[o], r, o, k_max);
        } catch (...) {
            errors[j] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    // Reduction in (repeat, fold) order regardless of which worker ran each job.
    ExperimentReport report;
    report.n_repeats = cfg.n_repeats;
    report.n_outer = n_outer;
    report.n_inner = cfg.n_inner;
    report.k_max = k_max;
    report.leakage_checks = cfg.n_repeats;  // one plan verification per repeat
    for (const auto& res : results) report.leakage_checks += res.leakage_checks;

    for (std::size_t s = 0; s < cfg.schemes.size(); ++s) {
        SchemeResult sr;
        sr.scheme = cfg.schemes[s];
        sr.rankings.resize(cfg.n_repeats);
        sr.fold_curves.resize(cfg.n_repeats);
        sr.per_repeat_accuracy.assign(cfg.n_repeats, std::vector<double>(k_max, 0.0));
        for (std::size_t r = 0; r < cfg.n_repeats; ++r) {
            for (std::size_t o = 0; o < n_outer; ++o) {
                const auto& res = results[r * n_outer + o];
                sr.rankings[r].push_back(res.rankings[s]);
                sr.fold_curves[r].push_back(res.curves[s]);
            }
            for (std::size_t k = 1; k <= k_max; ++k) {
                double sum = 0.0;
                for (const auto& fc : sr.fold_curves[r]) sum += fc.accuracy(k);
                sr.per_repeat_accuracy[r][k - 1] = sum / static_cast<double>(n_outer);
            }
        }
        sr.summary = summarize(sr.per_repeat_accuracy);
        for (const auto& rep : sr.fold_curves) {
            for (const auto& fc : rep) sr.best_k_confusion += fc.confusion[sr.summary.best_k - 1];
        }
        report.schemes.push_back(std::move(sr));
    }
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace micmac
