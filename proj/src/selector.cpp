#include "covsel/selector.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace covsel {

CandidateSet CandidateSet::explicit_list(std::vector<ModelSubset> models,
                                         std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != models.size()) {
        throw std::invalid_argument("candidate labels must match the model list");
    }
    CandidateSet set;
    set.mode = Mode::explicit_models;
    set.models = std::move(models);
    set.labels = std::move(labels);
    return set;
}

CandidateSet CandidateSet::subsets(std::vector<int> forced_in, std::vector<int> free_columns) {
    CandidateSet set;
    set.mode = Mode::subsets;
    set.forced_in = std::move(forced_in);
    set.free_columns = std::move(free_columns);
    return set;
}

std::string CandidateSet::label_for(const ModelSubset& model) const {
    for (std::size_t i = 0; i < models.size() && i < labels.size(); ++i) {
        if (models[i] == model) return labels[i];
    }
    return model.label();
}

std::vector<ModelSubset> enumerate_candidates(const CandidateSet& spec) {
    if (spec.mode == CandidateSet::Mode::explicit_models) {
        if (spec.models.empty()) throw std::invalid_argument("empty candidate list");
        std::set<ModelSubset> seen;
        for (const ModelSubset& m : spec.models) {
            if (!seen.insert(m).second) {
                throw std::invalid_argument("duplicate candidate model " + m.label());
            }
        }
        return spec.models;  // given order
    }

    if (spec.free_columns.size() > static_cast<std::size_t>(kMaxFreeColumns)) {
        throw TooManySubsets(std::to_string(spec.free_columns.size()) +
                             " free columns would enumerate more than 2^" +
                             std::to_string(kMaxFreeColumns) + " models");
    }
    std::vector<int> base = spec.forced_in;
    std::sort(base.begin(), base.end());
    std::vector<int> free = spec.free_columns;
    std::sort(free.begin(), free.end());
    for (int c : free) {
        if (std::binary_search(base.begin(), base.end(), c)) {
            throw std::invalid_argument("column " + std::to_string(c) +
                                        " is both forced-in and free");
        }
    }

    std::vector<ModelSubset> out;
    const std::size_t combos = std::size_t{1} << free.size();
    for (std::size_t bits = 0; bits < combos; ++bits) {
        std::vector<int> indices = base;
        for (std::size_t j = 0; j < free.size(); ++j) {
            if (bits & (std::size_t{1} << j)) indices.push_back(free[j]);
        }
        if (indices.empty()) continue;  // no forced-in columns and the empty combination
        out.emplace_back(std::move(indices));
    }
    std::sort(out.begin(), out.end());  // ascending cardinality, then lexicographic
    return out;
}

namespace {

std::vector<std::size_t> intersect_sorted(const std::vector<std::size_t>& a,
                                          const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

struct EvaluatedCandidates {
    std::vector<ModelSubset> models;
    std::vector<ModelEvaluation> evaluations;  // parallel
    bool mask_mismatch = false;
};

EvaluatedCandidates evaluate_candidates(const MultiSampleCollection& collection,
                                        const CandidateSet& candidates, bool corrected,
                                        const GuardPolicy& policy, bool strict_mask,
                                        JackknifePath path) {
    EvaluatedCandidates out;
    out.models = enumerate_candidates(candidates);

    std::vector<std::vector<std::size_t>> masks;
    masks.reserve(out.models.size());
    for (const ModelSubset& m : out.models) masks.push_back(collection.usable_mask(m, policy));

    if (strict_mask) {
        std::vector<std::size_t> common = masks.front();
        for (std::size_t i = 1; i < masks.size(); ++i) common = intersect_sorted(common, masks[i]);
        for (auto& m : masks) m = common;
    }

    for (std::size_t i = 0; i < out.models.size(); ++i) {
        out.evaluations.push_back(
            evaluate_model_on_mask(collection, out.models[i], masks[i], corrected, policy, path));
        if (out.evaluations[i].used.empty()) {
            throw NoUsableDatasets("candidate " + out.models[i].label() +
                                   ": no usable dataset in the collection");
        }
        if (out.evaluations[i].used != out.evaluations.front().used) out.mask_mismatch = true;
    }
    return out;
}

SelectionResult select_at(const EvaluatedCandidates& ev, int n) {
    SelectionResult result;
    result.n = n;
    result.mask_mismatch = ev.mask_mismatch;

    std::size_t best = 0;
    bool tie_with_best = false;
    for (std::size_t i = 0; i < ev.models.size(); ++i) {
        result.values.emplace_back(ev.models[i], aggregate_from_evaluation(ev.evaluations[i], n));
        if (i == 0) continue;
        const double v = result.values[i].second.value;
        const double b = result.values[best].second.value;
        if (v < b) {
            best = i;
            tie_with_best = false;
        } else if (v == b) {
            tie_with_best = true;
            if (ev.models[i] < ev.models[best]) best = i;  // parsimony, then lexicographic
        }
    }
    result.chosen = ev.models[best];
    result.ties_broken = tie_with_best;
    return result;
}

}  // namespace

SelectionResult select(const MultiSampleCollection& collection, const CandidateSet& candidates,
                       int n, bool corrected, const GuardPolicy& policy, bool strict_mask,
                       JackknifePath path) {
    if (n < 1) throw std::invalid_argument("select: n must be positive");
    EvaluatedCandidates ev =
        evaluate_candidates(collection, candidates, corrected, policy, strict_mask, path);
    return select_at(ev, n);
}

std::vector<SelectionResult> selection_curve(const MultiSampleCollection& collection,
                                             const CandidateSet& candidates,
                                             const std::vector<int>& n_grid, bool corrected,
                                             const GuardPolicy& policy, bool strict_mask,
                                             JackknifePath path) {
    if (n_grid.empty()) throw std::invalid_argument("selection_curve: empty n grid");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 1 || (i > 0 && n_grid[i] <= n_grid[i - 1])) {
            throw std::invalid_argument("selection_curve: n grid must be strictly increasing");
        }
    }
    EvaluatedCandidates ev =
        evaluate_candidates(collection, candidates, corrected, policy, strict_mask, path);
    std::vector<SelectionResult> out;
    out.reserve(n_grid.size());
    for (int n : n_grid) out.push_back(select_at(ev, n));
    return out;
}

AnalyticSelection analytic_argmin(const std::vector<std::pair<ModelSubset, ArCurve>>& curves,
                                  double n) {
    if (curves.empty()) throw std::invalid_argument("analytic_argmin: no curves");
    AnalyticSelection result;
    result.n = n;
    std::size_t best = 0;
    bool tie_with_best = false;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        result.values.emplace_back(curves[i].first, curves[i].second.value_at(n));
        if (i == 0) continue;
        const double v = result.values[i].second;
        const double b = result.values[best].second;
        if (v < b) {
            best = i;
            tie_with_best = false;
        } else if (v == b) {
            tie_with_best = true;
            if (curves[i].first < curves[best].first) best = i;
        }
    }
    result.chosen = curves[best].first;
    result.ties_broken = tie_with_best;
    return result;
}

std::optional<double> analytic_crossing(const ArCurve& a, const ArCurve& b) {
    const double level_gap = a.limit_term - b.limit_term;
    const double trace_gap = b.trace_term - a.trace_term;
    if (level_gap == 0.0) return std::nullopt;  // parallel or identical
    const double n = trace_gap / level_gap;
    if (!(n > 0.0) || !std::isfinite(n)) return std::nullopt;
    return n;
}

}  // namespace covsel
