#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "micmac/selectors.hpp"

namespace micmac {

std::vector<FeatureId> preselect_rf(const Dataset& train, const SelectorConfig& cfg) {
    cfg.validate();
    LearnerConfig forest = cfg.forest;
    forest.kind = LearnerKind::rf;
    const TrainedModel m = micmac::train(forest, train.values, train.labels);
    const std::vector<double> importance = rf_importance(m);

    std::vector<FeatureId> order(train.n_features());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](FeatureId a, FeatureId b) {
        if (importance[a] != importance[b]) return importance[a] > importance[b];
        return train.feature_names[a] < train.feature_names[b];
    });
    if (order.size() > cfg.preselect_n) order.resize(cfg.preselect_n);
    return order;
}

void save_trace(const SelectionTrace& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out.precision(17);
    out << "step,feature_name,merit,phi_after,reason\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << i << ',' << t.names[i] << ',';
        if (!std::isnan(t.merit[i])) out << t.merit[i];
        out << ',' << t.phi_after[i] << ',' << (i == 0 ? "seed" : "accepted") << '\n';
    }
    out << t.size() << ",,";
    if (t.rejected_merit) out << *t.rejected_merit;
    out << ",," << to_string(t.reason) << '\n';
}

}  // namespace micmac
