#pragma once

#include "covsel/criterion.hpp"
#include "covsel/geno.hpp"
#include "covsel/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace covsel {

/// Statistic bootstrapped over a collection.
struct BootstrapStatistic {
    enum class Kind { aggregate, difference, geno };

    Kind kind = Kind::aggregate;
    ModelSubset p{std::vector<int>{0}};
    std::optional<ModelSubset> q;

    static BootstrapStatistic aggregate(ModelSubset p);
    static BootstrapStatistic difference(ModelSubset p, ModelSubset q);
    static BootstrapStatistic geno(ModelSubset p, ModelSubset q);

    std::string name() const;
};

struct BootstrapResult {
    std::string statistic_name;
    double point = 0.0;  // statistic on the original collection
    double sd = 0.0;
    int B = 0;
    std::uint64_t seed = 0;
    int failed_replicates = 0;  // guard failures and non-finite replicate values
};

struct BootstrapOptions {
    bool dataset_level = false;      // resample whole datasets instead of rows within each
    bool cheap_uncorrected = false;  // replicate the uncorrected statistic even when corrected
    JackknifePath path = JackknifePath::refit;
    int threads = 0;
};

/// Row bootstrap: each replicate resamples rows with replacement
/// independently within every dataset (keeping each N_j), recomputes the
/// statistic on the recomputed usable masks, and reports the sample
/// standard deviation over successful replicates.
///
/// Replicate r draws, for each dataset in ascending id order, N_j indices
/// from the substream derive(derive(seed, hash_label(id)), r), so results
/// do not depend on thread scheduling.
BootstrapResult bootstrap_sd(const MultiSampleCollection& collection,
                             const BootstrapStatistic& statistic, int n, int B, bool corrected,
                             std::uint64_t seed, const GuardPolicy& policy = {},
                             const BootstrapOptions& options = {});

struct CvResult {
    ModelSubset model{std::vector<int>{0}};
    int n = 0;
    double estimate = 0.0;
    int reps = 0;
    int datasets_used = 0;
    int dropped_cells = 0;  // (dataset, rep) cells lost to persistent guard failures
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> per_dataset;  // id -> mean CV error
};

/// Train/test cross-validation estimate of the dataset-averaged prediction
/// error at training size n: for every dataset with more than n rows, each
/// repetition fits on a random n-row split and scores the held-out rows;
/// averaging is over test rows, then repetitions, then (unweighted) over
/// datasets. The split for (dataset id, rep) comes from
/// derive(derive(seed, hash_label(id)), rep); guard-failed splits are
/// redrawn up to retry_cap times, then the cell is dropped and counted.
CvResult cv_prediction_error(const MultiSampleCollection& collection, const ModelSubset& model,
                             int n, int reps, std::uint64_t seed, const GuardPolicy& policy = {},
                             int retry_cap = 10, int threads = 0);

}  // namespace covsel
