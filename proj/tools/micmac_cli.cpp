// micmac: synthetic data generation, nested cross-validated feature selection
// runs, and scheme comparison.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <omp.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "micmac/cv.hpp"
#include "micmac/dataset.hpp"
#include "micmac/report.hpp"
#include "micmac/selectors.hpp"
#include "micmac/stats.hpp"
#include "micmac/synth.hpp"

namespace fs = std::filesystem;
using namespace micmac;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthParams {
    std::size_t subjects = 60;
    std::size_t samples = 9;
    std::size_t features = 0;
    std::size_t informative = 12;
    double effect = 1.5;
    double subject_std = 1.0;
    std::size_t copies = 1;
    double rho = 0.8;
    std::uint64_t seed = 7;

    SynthConfig config() const {
        SynthConfig c;
        c.n_subjects = subjects;
        c.samples_per_subject = samples;
        c.n_features = features;
        c.n_informative = informative;
        c.effect_size = effect;
        c.subject_effect_std = subject_std;
        c.n_redundant_copies = copies;
        c.rho = rho;
        c.seed = seed;
        return c;
    }
};

void add_synth_options(CLI::App* app, SynthParams& p, const std::string& prefix, bool features_required) {
    app->add_option("--" + prefix + "subjects", p.subjects, "Number of subjects (even)")->capture_default_str();
    app->add_option("--" + prefix + "samples", p.samples, "Samples per subject")->capture_default_str();
    auto* f = app->add_option("--" + prefix + "features", p.features, "Number of features");
    if (features_required) f->required();
    app->add_option("--" + prefix + "informative", p.informative, "Planted informative features")->capture_default_str();
    app->add_option("--" + prefix + "effect", p.effect, "Class separation in noise std units")->capture_default_str();
    app->add_option("--" + prefix + "subject-std", p.subject_std, "Subject random-effect std")->capture_default_str();
    app->add_option("--" + prefix + "copies", p.copies, "Correlated copies per informative feature")
        ->capture_default_str();
    app->add_option("--" + prefix + "rho", p.rho, "Correlation of copies with their source")->capture_default_str();
    app->add_option("--" + prefix + "seed", p.seed, "Generator seed")->capture_default_str();
}

struct ModelParams {
    double threshold = 0.0;
    std::size_t max_selected = 100;
    double epsilon = 1e-6;
    std::size_t preselect = 100;
    double mi_bin_width = 1.0;
    int knn_k = 3;
    double svm_c = 1.0;
    std::optional<double> svm_gamma;
    double svm_tol = 1e-3;
    std::size_t rf_trees = 100;
    int rf_depth = 10;

    SelectorConfig selector() const {
        SelectorConfig s;
        s.threshold = threshold;
        s.max_selected = max_selected;
        s.epsilon = epsilon;
        s.preselect_n = preselect;
        s.mi_bin_width = mi_bin_width;
        s.forest.rf_trees = rf_trees;
        s.forest.rf_max_depth = rf_depth;
        s.wrapper = knn();
        return s;
    }
    LearnerConfig knn() const {
        LearnerConfig c;
        c.kind = LearnerKind::knn;
        c.knn_k = knn_k;
        return c;
    }
    LearnerConfig svm() const {
        LearnerConfig c;
        c.kind = LearnerKind::svm;
        c.svm_c = svm_c;
        c.svm_gamma = svm_gamma;
        c.svm_tol = svm_tol;
        return c;
    }
};

void add_model_options(CLI::App* app, ModelParams& p) {
    app->add_option("--threshold", p.threshold, "Merit threshold T")->capture_default_str();
    app->add_option("--max-selected", p.max_selected, "Cap on features per selection run")->capture_default_str();
    app->add_option("--epsilon", p.epsilon, "Floor for the redundancy denominator")->capture_default_str();
    app->add_option("--preselect", p.preselect, "Features kept by random-forest preselection")->capture_default_str();
    app->add_option("--mi-bin-width", p.mi_bin_width, "mRMR discretization cut, in std units")->capture_default_str();
    app->add_option("--knn-k", p.knn_k, "Neighbors for KNN")->capture_default_str();
    app->add_option("--svm-c", p.svm_c, "SVM regularization")->capture_default_str();
    app->add_option("--svm-gamma", p.svm_gamma, "RBF width (default: 1 / (n_features * variance))");
    app->add_option("--svm-tol", p.svm_tol, "SVM KKT tolerance")->capture_default_str();
    app->add_option("--rf-trees", p.rf_trees, "Trees in the preselection forest")->capture_default_str();
    app->add_option("--rf-depth", p.rf_depth, "Max depth of preselection trees")->capture_default_str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string scheme_list() {
    std::string s;
    for (const auto& v : valid_scheme_specs()) s += (s.empty() ? "" : ", ") + v;
    return s;
}

int cmd_synth(const SynthParams& p, const fs::path& out_dir) {
    const SynthResult r = generate(p.config());
    fs::create_directories(out_dir);
    save_dataset(r.data, out_dir / "data.csv");
    save_ground_truth(r.ground_truth, out_dir / "ground_truth.csv");
    std::cout << "wrote " << (out_dir / "data.csv").string() << ": " << r.data.n_samples() << " samples x "
              << r.data.n_features() << " features, " << r.data.subjects().size() << " subjects, "
              << r.informative.size() << " informative\n";
    return 0;
}

Dataset resolve_dataset(const std::string& data_path, const SynthParams& synth, bool synth_given) {
    if (data_path.empty() == !synth_given) {
        throw UsageError("give exactly one data source: --data <csv> or --synth-features <n> (with --synth-* options)");
    }
    if (!data_path.empty()) return load_dataset(data_path);
    return generate(synth.config()).data;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MICMAC wrapper feature selection with subject-based nested cross-validation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "INI-style run configuration ([section] per subcommand); flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);

    int jobs = 1;
    app.add_option("--jobs", jobs, "Worker threads (results do not depend on it)")
        ->envname("MICMAC_JOBS")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a planted-feature dataset (data.csv + ground_truth.csv)");
    SynthParams synth_params;
    add_synth_options(synth, synth_params, "", true);
    std::string synth_out = ".";
    synth->add_option("--out", synth_out, "Output directory")->capture_default_str();

    // crossval
    auto* crossval = app.add_subcommand("crossval", "Run repeated nested cross-validation for selection schemes");
    std::string cv_data;
    SynthParams cv_synth;
    ModelParams cv_model;
    std::vector<std::string> cv_schemes;
    std::size_t cv_repeats = 10, cv_outer = 10, cv_inner = 9, cv_kmax = 100;
    std::uint64_t cv_seed = 0;
    std::string cv_out = "results";
    crossval->add_option("--data", cv_data, "Dataset CSV");
    add_synth_options(crossval, cv_synth, "synth-", false);
    crossval->add_option("--scheme", cv_schemes, "Scheme(s): " + scheme_list() + " (default: all)");
    crossval->add_option("--repeats", cv_repeats, "Shuffled repetitions of the experiment")->capture_default_str();
    crossval->add_option("--outer", cv_outer, "Outer folds")->capture_default_str();
    crossval->add_option("--inner", cv_inner, "Inner folds")->capture_default_str();
    crossval->add_option("--k-max", cv_kmax, "Largest feature count on the accuracy curve")->capture_default_str();
    crossval->add_option("--seed", cv_seed, "Base seed (repeat r uses seed + r)")->capture_default_str();
    crossval->add_option("--out", cv_out, "Output directory")->capture_default_str();
    add_model_options(crossval, cv_model);

    // select
    auto* select = app.add_subcommand("select", "Single inner-fold MICMAC trace, for debugging");
    std::string sel_data, sel_wrapper = "knn", sel_out = "trace.csv";
    SynthParams sel_synth;
    ModelParams sel_model;
    std::size_t sel_outer_fold = 0, sel_inner_fold = 0, sel_outer = 10, sel_inner = 9;
    std::uint64_t sel_seed = 0;
    select->add_option("--data", sel_data, "Dataset CSV");
    add_synth_options(select, sel_synth, "synth-", false);
    select->add_option("--wrapper", sel_wrapper, "Wrapper learner: knn or svm")->capture_default_str();
    select->add_option("--outer-fold", sel_outer_fold, "Outer fold index")->capture_default_str();
    select->add_option("--inner-fold", sel_inner_fold, "Inner fold index")->capture_default_str();
    select->add_option("--outer", sel_outer, "Outer folds")->capture_default_str();
    select->add_option("--inner", sel_inner, "Inner folds")->capture_default_str();
    select->add_option("--seed", sel_seed, "Fold-plan seed")->capture_default_str();
    select->add_option("--out", sel_out, "Trace CSV path")->capture_default_str();
    add_model_options(select, sel_model);

    // compare
    auto* compare = app.add_subcommand("compare", "Tukey HSD across schemes of two or more crossval reports");
    std::vector<std::string> cmp_reports;
    std::string cmp_at = "best", cmp_out = "tukey.csv";
    compare->add_option("reports", cmp_reports, "Report directories or experiments.csv files")->required();
    compare->add_option("--at", cmp_at, "Feature count compared: best, top12, or an integer k")->capture_default_str();
    compare->add_option("--out", cmp_out, "Output CSV")->capture_default_str();

    // report
    auto* report = app.add_subcommand("report", "Re-emit report.csv, curves and the SVG chart from experiments.csv");
    std::string rep_in, rep_out;
    report->add_option("--in", rep_in, "Crossval output directory or experiments.csv")->required();
    report->add_option("--out", rep_out, "Output directory (default: alongside the input)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    omp_set_num_threads(jobs);
    try {
        if (*synth) return cmd_synth(synth_params, synth_out);

        if (*crossval) {
            ExperimentConfig cfg;
            if (!cv_schemes.empty()) {
                cfg.schemes.clear();
                for (const auto& s : cv_schemes) {
                    try {
                        cfg.schemes.push_back(parse_scheme(s));
                    } catch (const std::invalid_argument&) {
                        throw UsageError("unknown scheme '" + s + "'; valid schemes: " + scheme_list());
                    }
                }
            }
            const Dataset d = resolve_dataset(cv_data, cv_synth, crossval->count("--synth-features") > 0);
            cfg.selector = cv_model.selector();
            cfg.knn = cv_model.knn();
            cfg.svm = cv_model.svm();
            cfg.n_outer = cv_outer;
            cfg.n_inner = cv_inner;
            cfg.n_repeats = cv_repeats;
            cfg.base_seed = cv_seed;
            cfg.k_max = cv_kmax;
            cfg.jobs = jobs;
            const ExperimentReport r = run_experiments(d, cfg);
            emit_report(r, cv_out);
            write_text(fs::path(cv_out) / "run_config.ini", app.config_to_str(true, false));
            write_text(fs::path(cv_out) / "run_info.txt",
                       "runtime_seconds=" + format_double(r.runtime_seconds) + "\nleakage_checks=" +
                           std::to_string(r.leakage_checks) + "\njobs=" + std::to_string(jobs) + "\n");
            std::cout << "scheme,best_acc,best_acc_std,best_k,top12_acc,top12_std\n";
            for (const auto& s : r.schemes) {
                std::cout << s.scheme.name() << ',' << s.summary.best_acc << ',' << s.summary.best_std << ','
                          << s.summary.best_k << ',' << s.summary.top12_acc << ',' << s.summary.top12_std
                          << (s.scheme.approximate() ? "  (approximate)" : "") << '\n';
            }
            std::cout << "wrote " << cv_out << " in " << r.runtime_seconds << " s\n";
            return 0;
        }

        if (*select) {
            const Dataset d = resolve_dataset(sel_data, sel_synth, select->count("--synth-features") > 0);
            LearnerKind wrapper;
            try {
                wrapper = parse_learner_kind(sel_wrapper);
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
            if (wrapper == LearnerKind::rf) throw UsageError("wrapper must be knn or svm");
            const FoldPlan plan = make_fold_plan(d.subject_ids, d.labels, sel_outer, sel_inner, sel_seed);
            if (sel_outer_fold >= plan.outer.size() || sel_inner_fold >= plan.outer[sel_outer_fold].inner.size()) {
                throw UsageError("fold index out of range");
            }
            const OuterFold& fold = plan.outer[sel_outer_fold];
            const InnerFold& inner = fold.inner[sel_inner_fold];
            SelectorConfig sc = sel_model.selector();
            sc.wrapper = wrapper == LearnerKind::knn ? sel_model.knn() : sel_model.svm();
            sc.forest.seed = sel_seed;
            const std::vector<FeatureId> f0 = preselect_rf(d.subset_rows(d.rows_of(fold.train_val)), sc);
            const SelectionTrace t =
                micmac_select(d.subset_rows(d.rows_of(inner.train)), d.subset_rows(d.rows_of(inner.validation)), f0, sc);
            save_trace(t, sel_out);
            std::cout << "selected " << t.size() << " features (" << to_string(t.reason) << "):";
            for (const auto& n : t.names) std::cout << ' ' << n;
            std::cout << "\nwrote " << sel_out << '\n';
            return 0;
        }

        if (*compare) {
            if (cmp_reports.size() < 2) throw UsageError("need >= 2 groups (give at least two reports)");
            GroupSamples groups;
            std::size_t repeats = 0;
            bool mismatched = false;
            for (const auto& path : cmp_reports) {
                for (const auto& sc : load_experiments(path)) {
                    const CurveSummary s = summarize(sc.per_repeat_accuracy);
                    std::size_t k = s.best_k;
                    if (cmp_at == "top12") k = s.top12_k;
                    else if (cmp_at != "best") {
                        try {
                            k = std::stoul(cmp_at);
                        } catch (const std::exception&) {
                            throw UsageError("--at must be best, top12 or an integer");
                        }
                        if (k < 1 || k > s.mean.size()) throw UsageError("--at k outside the accuracy curve");
                    }
                    Group g{path + ":" + sc.scheme, {}};
                    for (const auto& rep : sc.per_repeat_accuracy) g.values.push_back(rep[k - 1]);
                    if (repeats != 0 && g.values.size() != repeats) mismatched = true;
                    repeats = g.values.size();
                    groups.push_back(std::move(g));
                }
            }
            if (mismatched) std::cerr << "warning: unequal repeat counts; using the Tukey-Kramer adjustment\n";
            const auto rows = tukey_hsd(groups);
            write_tukey_csv(rows, cmp_out);
            for (const auto& r : rows) std::cout << r.group_a << " vs " << r.group_b << ": q=" << r.q << " p=" << r.p << '\n';
            return 0;
        }

        if (*report) {
            const auto schemes = load_experiments(rep_in);
            fs::path out = rep_out;
            if (out.empty()) out = fs::is_directory(rep_in) ? fs::path(rep_in) : fs::path(rep_in).parent_path();
            emit_summary(schemes, out);
            std::cout << "wrote " << (out / "report.csv").string() << '\n';
            return 0;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const LeakageError& e) {
        std::cerr << "leakage assertion failed: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
