#pragma once

#include "covsel/criterion.hpp"
#include "covsel/geno.hpp"
#include "covsel/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace covsel {

/// Candidate-model universe: either an explicit list or all subsets of a
/// set of free columns on top of forced-in columns.
struct CandidateSet {
    enum class Mode { explicit_models, subsets };

    Mode mode = Mode::explicit_models;
    std::vector<ModelSubset> models;   // explicit mode
    std::vector<std::string> labels;   // parallel to models; empty -> index labels

    std::vector<int> forced_in;        // subsets mode; intercept column included here
    std::vector<int> free_columns;     // subsets mode

    static CandidateSet explicit_list(std::vector<ModelSubset> models,
                                      std::vector<std::string> labels = {});
    static CandidateSet subsets(std::vector<int> forced_in, std::vector<int> free_columns);

    /// Label for a model: the explicit label when one was given, otherwise
    /// the index-set label.
    std::string label_for(const ModelSubset& model) const;
};

inline constexpr int kMaxFreeColumns = 20;

/// Deterministic enumeration: ascending cardinality, then lexicographic.
/// Throws TooManySubsets when subsets mode has more than kMaxFreeColumns
/// free columns.
std::vector<ModelSubset> enumerate_candidates(const CandidateSet& spec);

struct SelectionResult {
    int n = 0;
    ModelSubset chosen{std::vector<int>{0}};
    bool ties_broken = false;
    bool mask_mismatch = false;  // candidates were compared on different usable masks
    std::vector<std::pair<ModelSubset, AggregateCriterion>> values;  // enumeration order
};

/// argmin over candidates of the aggregate criterion at n. Exact value ties
/// go to the smallest model, then lexicographic. With strict_mask all
/// candidates are restricted to the intersection of their usable masks.
SelectionResult select(const MultiSampleCollection& collection, const CandidateSet& candidates,
                       int n, bool corrected, const GuardPolicy& policy = {},
                       bool strict_mask = false, JackknifePath path = JackknifePath::refit);

/// One SelectionResult per grid point; per-dataset work is shared across
/// the grid. n_grid must be nonempty and strictly increasing.
std::vector<SelectionResult> selection_curve(const MultiSampleCollection& collection,
                                             const CandidateSet& candidates,
                                             const std::vector<int>& n_grid, bool corrected,
                                             const GuardPolicy& policy = {},
                                             bool strict_mask = false,
                                             JackknifePath path = JackknifePath::refit);

struct AnalyticSelection {
    double n = 0.0;
    ModelSubset chosen{std::vector<int>{0}};
    bool ties_broken = false;
    std::vector<std::pair<ModelSubset, double>> values;  // curve values at n, input order
};

/// argmin over known curves, same tie-break as select().
AnalyticSelection analytic_argmin(const std::vector<std::pair<ModelSubset, ArCurve>>& curves,
                                  double n);

/// Positive n at which the two curves have equal value, if any.
std::optional<double> analytic_crossing(const ArCurve& a, const ArCurve& b);

}  // namespace covsel
