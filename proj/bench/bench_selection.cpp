// Parallel/incremental MICMAC selection against the serial retraining reference.

#include <benchmark/benchmark.h>

#include "micmac/cv.hpp"
#include "micmac/synth.hpp"

using namespace micmac;

namespace {

struct Fixture {
    Dataset train, val;
    std::vector<FeatureId> f0;
};

const Fixture& fixture() {
    static const Fixture fx = [] {
        SynthConfig sc;  // 60 subjects, 300 features
        const Dataset d = generate(sc).data;
        const FoldPlan plan = make_fold_plan(d.subject_ids, d.labels, 10, 9, 0);
        Fixture f;
        f.train = d.subset_rows(d.rows_of(plan.outer[0].inner[0].train));
        f.val = d.subset_rows(d.rows_of(plan.outer[0].inner[0].validation));
        SelectorConfig cfg;
        f.f0 = preselect_rf(d.subset_rows(d.rows_of(plan.outer[0].train_val)), cfg);
        return f;
    }();
    return fx;
}

template <SelectionTrace (*Select)(const Dataset&, const Dataset&, std::span<const FeatureId>, const SelectorConfig&)>
void run(benchmark::State& state, LearnerKind wrapper, std::size_t pool) {
    const Fixture& fx = fixture();
    const std::vector<FeatureId> f0(fx.f0.begin(), fx.f0.begin() + static_cast<std::ptrdiff_t>(pool));
    SelectorConfig cfg;
    cfg.wrapper.kind = wrapper;
    std::size_t selected = 0;
    for (auto _ : state) {
        const SelectionTrace t = Select(fx.train, fx.val, f0, cfg);
        selected = t.size();
        benchmark::DoNotOptimize(selected);
    }
    state.counters["selected"] = static_cast<double>(selected);
}

void BM_KnnParallel(benchmark::State& s) { run<micmac_select>(s, LearnerKind::knn, 100); }
void BM_KnnSerial(benchmark::State& s) { run<micmac_select_serial>(s, LearnerKind::knn, 100); }
void BM_SvmParallel(benchmark::State& s) { run<micmac_select>(s, LearnerKind::svm, 30); }
void BM_SvmSerial(benchmark::State& s) { run<micmac_select_serial>(s, LearnerKind::svm, 30); }

}  // namespace

BENCHMARK(BM_KnnParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SvmParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SvmSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
