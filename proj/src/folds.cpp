#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "micmac/cv.hpp"
#include "micmac/random.hpp"

namespace micmac {

namespace {

std::vector<std::vector<std::string>> slice(const std::vector<std::string>& items, std::size_t parts) {
    std::vector<std::vector<std::string>> out(parts);
    const std::size_t base = items.size() / parts;
    const std::size_t extra = items.size() % parts;
    std::size_t pos = 0;
    for (std::size_t p = 0; p < parts; ++p) {
        const std::size_t len = base + (p < extra ? 1 : 0);
        out[p].assign(items.begin() + static_cast<std::ptrdiff_t>(pos),
                      items.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return out;
}

std::vector<std::string> without(const std::vector<std::string>& items, const std::vector<std::string>& removed) {
    const std::set<std::string> drop(removed.begin(), removed.end());
    std::vector<std::string> out;
    for (const auto& s : items) {
        if (!drop.contains(s)) out.push_back(s);
    }
    return out;
}

void require_both_classes(const std::vector<std::string>& subjects, const std::map<std::string, int>& label_of,
                          const char* what) {
    bool has0 = false, has1 = false;
    for (const auto& s : subjects) (label_of.at(s) == 1 ? has1 : has0) = true;
    if (!has0 || !has1) {
        throw std::invalid_argument(std::string("make_fold_plan: a ") + what + " set lacks one of the classes");
    }
}

}  // namespace

FoldPlan make_fold_plan(const std::vector<std::string>& subject_ids, const std::vector<int>& labels,
                        std::size_t n_outer, std::size_t n_inner, std::uint64_t seed) {
    if (subject_ids.size() != labels.size()) throw std::invalid_argument("make_fold_plan: labels/subjects mismatch");
    if (n_outer < 2 || n_inner < 2) throw std::invalid_argument("make_fold_plan: need at least 2 folds per level");
    std::map<std::string, int> label_of;
    std::vector<std::string> subjects;
    for (std::size_t i = 0; i < subject_ids.size(); ++i) {
        if (label_of.emplace(subject_ids[i], labels[i]).second) subjects.push_back(subject_ids[i]);
    }
    if (subjects.size() < n_outer) {
        throw std::invalid_argument("make_fold_plan: " + std::to_string(subjects.size()) + " subjects cannot fill " +
                                    std::to_string(n_outer) + " outer folds");
    }

    Rng rng(derive_seed(seed, {}));
    std::shuffle(subjects.begin(), subjects.end(), rng);

    FoldPlan plan;
    plan.seed = seed;
    for (auto& test : slice(subjects, n_outer)) {
        OuterFold fold;
        fold.train_val = without(subjects, test);
        fold.test = std::move(test);
        if (fold.train_val.size() < n_inner) {
            throw std::invalid_argument("make_fold_plan: outer training set too small for " + std::to_string(n_inner) +
                                        " inner folds");
        }
        require_both_classes(fold.train_val, label_of, "training");
        for (auto& val : slice(fold.train_val, n_inner)) {
            InnerFold inner;
            inner.train = without(fold.train_val, val);
            inner.validation = std::move(val);
            require_both_classes(inner.train, label_of, "inner training");
            fold.inner.push_back(std::move(inner));
        }
        plan.outer.push_back(std::move(fold));
    }
    return plan;
}

void verify_fold_plan(const FoldPlan& plan, const std::vector<std::string>& all_subjects) {
    std::multiset<std::string> tested;
    for (const auto& outer : plan.outer) {
        const std::set<std::string> test(outer.test.begin(), outer.test.end());
        for (const auto& s : outer.train_val) {
            if (test.contains(s)) throw LeakageError("fold plan: subject '" + s + "' in outer train and test");
        }
        if (outer.train_val.size() + outer.test.size() != all_subjects.size()) {
            throw std::logic_error("fold plan: outer fold does not cover every subject");
        }
        tested.insert(outer.test.begin(), outer.test.end());

        std::multiset<std::string> validated;
        for (const auto& inner : outer.inner) {
            const std::set<std::string> val(inner.validation.begin(), inner.validation.end());
            for (const auto& s : inner.train) {
                if (val.contains(s)) throw LeakageError("fold plan: subject '" + s + "' in inner train and validation");
                if (test.contains(s)) throw LeakageError("fold plan: test subject '" + s + "' in inner train");
            }
            for (const auto& s : inner.validation) {
                if (test.contains(s)) throw LeakageError("fold plan: test subject '" + s + "' in inner validation");
            }
            validated.insert(inner.validation.begin(), inner.validation.end());
        }
        if (validated != std::multiset<std::string>(outer.train_val.begin(), outer.train_val.end())) {
            throw std::logic_error("fold plan: inner validation sets do not partition train_val");
        }
    }
    if (tested != std::multiset<std::string>(all_subjects.begin(), all_subjects.end())) {
        throw std::logic_error("fold plan: outer test sets do not partition the subjects");
    }
}

std::vector<RankedFeature> rank_by_frequency(const std::vector<SelectionTrace>& traces) {
    struct Tally {
        std::string name;
        std::size_t count = 0;
        double merit_sum = 0.0;
    };
    std::map<FeatureId, Tally> tally;
    for (const auto& t : traces) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            auto& e = tally[t.features[i]];
            e.name = t.names[i];
            ++e.count;
            e.merit_sum += std::isnan(t.merit[i]) ? std::numeric_limits<double>::infinity() : t.merit[i];
        }
    }
    std::vector<RankedFeature> out;
    for (const auto& [id, e] : tally) {
        out.push_back({id, e.name, e.count, e.merit_sum / static_cast<double>(e.count)});
    }
    std::sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) {
        if (a.count != b.count) return a.count > b.count;
        if (a.mean_merit != b.mean_merit) return a.mean_merit > b.mean_merit;
        return a.name < b.name;
    });
    return out;
}

std::vector<int> majority_vote(const std::vector<std::vector<int>>& predictions_by_subject) {
    std::vector<int> out;
    out.reserve(predictions_by_subject.size());
    for (const auto& preds : predictions_by_subject) {
        if (preds.empty()) throw std::invalid_argument("majority_vote: subject with zero samples");
        const auto ones = static_cast<std::size_t>(std::count(preds.begin(), preds.end(), 1));
        out.push_back(2 * ones >= preds.size() ? 1 : 0);
    }
    return out;
}

}  // namespace micmac
