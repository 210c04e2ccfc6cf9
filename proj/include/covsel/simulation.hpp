#pragma once

#include "covsel/criterion.hpp"
#include "covsel/geno.hpp"
#include "covsel/selector.hpp"
#include "covsel/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace covsel::sim {

inline constexpr int kNumCovariates = 10;  // X1..X10, plus the intercept column

/// Parameters of the polynomial data model
///   Y = b0 + b1 X1 + ... + b10 X10 + a (X1^2 - 1) + sigma eps,
/// with X1..X10 and eps iid standard normal.
struct PolyModelParams {
    std::array<double, kNumCovariates + 1> b{};  // b[0] is the intercept coefficient
    double quad_coeff = 0.0;                     // a
    double noise_sd = 1.0;                       // sigma

    /// Benchmark parameter set used across the simulation studies:
    /// b0 = b1 = 0, b2..b5 = 1.5, b6..b10 = 1, a = 3, sigma = 10.
    static PolyModelParams benchmark();
};

/// Hierarchical variant: per-dataset coefficient vectors are drawn once
/// (componentwise normal around mean_b) and then held fixed while data are
/// generated.
struct PopulationHyperParams {
    std::array<double, kNumCovariates + 1> mean_b{};
    std::array<double, kNumCovariates + 1> sd_b{};
    double quad_coeff = 0.0;
    double noise_sd = 1.0;
    std::vector<std::pair<int, int>> blocks;  // (dataset count, rows per dataset)

    int total_datasets() const;

    /// 200 datasets in blocks of 50 with 40/100/150/250 rows; b2..b5 ~
    /// N(1.5, 0.1^2), b6..b10 ~ N(1, 0.1^2), a = 3, sigma = 10.
    static PopulationHyperParams benchmark();
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int replications = 0;
    std::uint64_t seed = 0;
    int guard_failures = 0;
};

/// The three nested candidate models studied on this data model:
/// intercept+X1, intercept+X1..X5, and the full set.
enum class NestedModel { x1, x1_to_x5, full };

ModelSubset nested_subset(NestedModel which);
std::string nested_label(NestedModel which);  // "p1", "p2", "p3"
std::vector<std::pair<std::string, ModelSubset>> nested_candidates();

/// Dataset with column 0 = 1 and columns 1..10 iid standard normal;
/// a pure function of (params, rows, seed).
RegressionDataset gen_poly_dataset(const PolyModelParams& params, int rows, std::uint64_t seed,
                                   std::string id = "sim");

struct GeneratedPopulation {
    MultiSampleCollection collection;
    std::vector<PolyModelParams> dataset_params;  // recorded draws, ascending dataset id
};

/// Coefficients for dataset j come from substream derive(seed, 0); its data
/// from derive(derive(seed, 1), j). Dataset ids are zero-padded ("d00000",
/// "d00001", ...) so the generated order survives the collection's id sort.
GeneratedPopulation gen_population(const PopulationHyperParams& hyper, std::uint64_t seed);

/// Monte Carlo estimate of the expected squared prediction error of the
/// model fit on n fresh rows, scored on test_pairs_per_rep fresh pairs per
/// replication (1 matches the plain definition; larger values reduce the
/// scoring noise). Guard-failed replications are excluded and counted.
McEstimate mc_prediction_error(const PolyModelParams& params, const ModelSubset& model, int n,
                               int reps, std::uint64_t seed, int test_pairs_per_rep = 1);

/// Exact prediction-error curve of the prefix model {0..k} under the
/// polynomial data model (k = 0 is intercept-only).
ArCurve ar_curve_prefix(const PolyModelParams& params, int k);
ArCurve ar_curve(const PolyModelParams& params, NestedModel which);
double ar_closed_form(const PolyModelParams& params, NestedModel which, double n);

/// Generic curve evaluation from externally supplied moments.
ArCurve ar_from_moments(double limit_term, double trace_term);

/// Mean (over simulated datasets) of the criterion's n-free decomposition,
/// with Monte Carlo standard errors of both parts.
struct CriterionCurveEstimate {
    ArCurve curve;      // mean level / mean slope
    double level_se = 0.0;
    double slope_se = 0.0;
    int reps = 0;
};

/// For each model, the mean uncorrected and corrected criterion curves over
/// `reps` independently regenerated datasets of `rows` rows. All models are
/// evaluated on the same simulated datasets.
struct MeanCriterionCurves {
    std::vector<CriterionCurveEstimate> uncorrected;  // parallel to `models`
    std::vector<CriterionCurveEstimate> corrected;
    int dropped = 0;  // replications lost to guard failures
};
MeanCriterionCurves mean_criterion_curves(const PolyModelParams& params,
                                          const std::vector<ModelSubset>& models, int rows,
                                          int reps, std::uint64_t seed,
                                          JackknifePath path = JackknifePath::refit,
                                          int threads = 0);

/// Configuration for the selection-probability experiment. Single-sample
/// mode regenerates one dataset of single_sample_rows per replication;
/// multi-sample mode regenerates the whole hierarchical collection, with
/// the per-dataset coefficients drawn once from the seed and held fixed
/// across replications unless fresh_coefficients is set.
struct SelectionExperimentConfig {
    bool multi_sample = false;
    PolyModelParams params = PolyModelParams::benchmark();   // single-sample mode
    int single_sample_rows = 40;
    PopulationHyperParams hyper = PopulationHyperParams::benchmark();  // multi-sample mode
    bool fresh_coefficients = false;
    std::vector<int> n_grid{40};
    bool corrected = true;
    std::vector<std::pair<std::string, ModelSubset>> candidates = nested_candidates();
    JackknifePath path = JackknifePath::refit;
    int threads = 0;  // 0 = hardware concurrency
};

struct SelectionFrequencyRow {
    int n = 0;
    std::string model;
    double frequency = 0.0;
    double mc_se = 0.0;  // binomial standard error
    int reps = 0;
};

std::vector<SelectionFrequencyRow> selection_probability_experiment(
    const SelectionExperimentConfig& config, int reps, std::uint64_t seed);

}  // namespace covsel::sim
