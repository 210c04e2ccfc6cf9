#pragma once

#include "covsel/regression.hpp"
#include "covsel/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace covsel {

/// One evaluated criterion: value = rss_term + trace_term at prediction
/// sample size n, computed from a dataset of sample_size rows, with
/// rss_term = (1/N)||y - X beta||^2 and trace_term = trace * (1/n + 1/N).
/// In the corrected form the trace factor is the jackknife combination
/// N t - (N-1) mean_i t_(i) of the leave-one-out trace estimates, which
/// removes the trace estimator's leading bias.
struct CriterionValue {
    ModelSubset model{std::vector<int>{0}};
    int n = 0;
    int sample_size = 0;  // N
    double rss_term = 0.0;
    double trace_term = 0.0;
    double value = 0.0;
    bool corrected = false;
};

/// n-free decomposition of the criterion: value(n) = level + slope / n with
/// level = rss_over_n + trace_v/N and slope = trace_v. Computing these once
/// lets a whole n-grid be evaluated for free, and the slope is exactly the
/// trace estimate the GENO formulas need.
struct CriterionComponents {
    int sample_size = 0;      // N
    double rss_over_n = 0.0;  // (1/N) * RSS of the full-sample fit
    double trace_v = 0.0;     // trace estimate (jackknifed when corrected)
    double level = 0.0;       // n-free additive part
    double slope = 0.0;       // coefficient of 1/n; equals trace_v
    bool corrected = false;

    double value_at(double n) const { return level + slope / n; }
};

/// Leave-one-out strategy. refit re-solves each reduced design from
/// scratch by QR; downdate removes the row from the Gram matrix and
/// cross-products and re-solves by Cholesky. Residuals, RSS and the moment
/// matrices are recomputed from the reduced sample on both paths.
enum class JackknifePath { refit, downdate };

/// N*full - (N-1)*mean(leave_one_out): the standard jackknife combination.
double jackknife_combine(double full, std::span<const double> leave_one_out);

CriterionComponents criterion_components(const RegressionDataset& dataset,
                                         const ModelSubset& model,
                                         const GuardPolicy& policy = {});

/// Jackknife-corrected components. Requires rows >= |p| + 2 and the guard
/// to pass on the full design and on every leave-one-out design; throws
/// SingularDesign otherwise.
CriterionComponents jackknife_components(const RegressionDataset& dataset,
                                         const ModelSubset& model,
                                         const GuardPolicy& policy = {},
                                         JackknifePath path = JackknifePath::refit);

CriterionValue criterion_c(const RegressionDataset& dataset, const ModelSubset& model, int n,
                           const GuardPolicy& policy = {});

CriterionValue jackknife_criterion(const RegressionDataset& dataset, const ModelSubset& model,
                                   int n, const GuardPolicy& policy = {},
                                   JackknifePath path = JackknifePath::refit);

CriterionValue criterion_from_components(const CriterionComponents& parts,
                                         const ModelSubset& model, int n);

/// An ordered collection of regression datasets with unique ids. Datasets
/// are kept sorted by id so every reduction has a fixed order.
class MultiSampleCollection {
public:
    MultiSampleCollection() = default;
    explicit MultiSampleCollection(std::vector<RegressionDataset> datasets);

    const std::vector<RegressionDataset>& datasets() const { return datasets_; }
    std::size_t size() const { return datasets_.size(); }
    bool empty() const { return datasets_.empty(); }
    const RegressionDataset& at(std::size_t i) const { return datasets_.at(i); }

    /// Indices (into datasets()) of the datasets whose design passes the
    /// guard for this model.
    std::vector<std::size_t> usable_mask(const ModelSubset& model,
                                         const GuardPolicy& policy = {}) const;

private:
    std::vector<RegressionDataset> datasets_;
};

struct AggregateCriterion {
    ModelSubset model{std::vector<int>{0}};
    int n = 0;
    double value = 0.0;
    std::vector<CriterionValue> per_dataset;  // ascending dataset id over the usable mask
    bool corrected = false;
    int j_used = 0;
    int jackknife_drops = 0;  // usable datasets dropped because a leave-one-out design failed
};

/// Unweighted mean of the per-dataset criterion over the model's usable
/// mask (pairwise summation in ascending-id order). Throws NoUsableDatasets
/// when the mask is empty.
AggregateCriterion aggregate_criterion(const MultiSampleCollection& collection,
                                       const ModelSubset& model, int n, bool corrected,
                                       const GuardPolicy& policy = {},
                                       JackknifePath path = JackknifePath::refit);

/// One model's per-dataset criterion components over (a subset of) a
/// collection. Computing this once makes whole n-grids, aggregates and the
/// estimated-curve forms cheap to assemble.
struct ModelEvaluation {
    ModelSubset model{std::vector<int>{0}};
    bool corrected = false;
    std::vector<std::size_t> used;                // dataset indices, ascending
    std::vector<CriterionComponents> components;  // parallel to used
    int jackknife_drops = 0;

    double mean_value_at(double n) const;  // pairwise mean of per-dataset values
    double mean_trace() const;             // pairwise mean of the trace estimates
};

/// Evaluates the model on every dataset of the given mask, dropping (and
/// counting) datasets whose leave-one-out designs fail when corrected.
ModelEvaluation evaluate_model_on_mask(const MultiSampleCollection& collection,
                                       const ModelSubset& model,
                                       const std::vector<std::size_t>& mask, bool corrected,
                                       const GuardPolicy& policy = {},
                                       JackknifePath path = JackknifePath::refit);

/// evaluate_model_on_mask over the model's own usable mask.
ModelEvaluation evaluate_model(const MultiSampleCollection& collection, const ModelSubset& model,
                               bool corrected, const GuardPolicy& policy = {},
                               JackknifePath path = JackknifePath::refit);

AggregateCriterion aggregate_from_evaluation(const ModelEvaluation& evaluation, int n);

/// Deterministic pairwise summation of an ordered range.
double pairwise_sum(std::span<const double> values);

}  // namespace covsel
