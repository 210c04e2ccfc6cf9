#include "covsel/simulation.hpp"

#include "covsel/parallel.hpp"
#include "covsel/rng.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>

namespace covsel::sim {

namespace {

std::vector<std::string> poly_names() {
    std::vector<std::string> names{"intercept"};
    for (int j = 1; j <= kNumCovariates; ++j) names.push_back("x" + std::to_string(j));
    return names;
}

void fill_poly(std::mt19937_64& eng, const PolyModelParams& params, int rows, Matrix& X,
               Vector& y) {
    X.resize(rows, kNumCovariates + 1);
    y.resize(rows);
    for (int i = 0; i < rows; ++i) {
        X(i, 0) = 1.0;
        for (int j = 1; j <= kNumCovariates; ++j) X(i, j) = rng::standard_normal(eng);
        const double eps = rng::standard_normal(eng);
        double mean = params.b[0];
        for (int j = 1; j <= kNumCovariates; ++j) mean += params.b[static_cast<std::size_t>(j)] * X(i, j);
        const double x1 = X(i, 1);
        y(i) = mean + params.quad_coeff * (x1 * x1 - 1.0) + params.noise_sd * eps;
    }
}

PolyModelParams draw_params(const PopulationHyperParams& hyper, std::mt19937_64& eng) {
    PolyModelParams params;
    for (std::size_t j = 0; j < params.b.size(); ++j) {
        params.b[j] = hyper.mean_b[j] + hyper.sd_b[j] * rng::standard_normal(eng);
    }
    params.quad_coeff = hyper.quad_coeff;
    params.noise_sd = hyper.noise_sd;
    return params;
}

std::string padded_id(int j) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "d%05d", j);
    return buf;
}

double mean_of(std::span<const double> v) {
    return pairwise_sum(v) / static_cast<double>(v.size());
}

double se_of_mean(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (static_cast<double>(v.size()) - 1.0) /
                     static_cast<double>(v.size()));
}

}  // namespace

PolyModelParams PolyModelParams::benchmark() {
    PolyModelParams params;
    for (int j = 2; j <= 5; ++j) params.b[static_cast<std::size_t>(j)] = 1.5;
    for (int j = 6; j <= 10; ++j) params.b[static_cast<std::size_t>(j)] = 1.0;
    params.quad_coeff = 3.0;
    params.noise_sd = 10.0;
    return params;
}

int PopulationHyperParams::total_datasets() const {
    int total = 0;
    for (const auto& [count, rows] : blocks) total += count;
    return total;
}

PopulationHyperParams PopulationHyperParams::benchmark() {
    PopulationHyperParams hyper;
    for (int j = 2; j <= 5; ++j) {
        hyper.mean_b[static_cast<std::size_t>(j)] = 1.5;
        hyper.sd_b[static_cast<std::size_t>(j)] = 0.1;
    }
    for (int j = 6; j <= 10; ++j) {
        hyper.mean_b[static_cast<std::size_t>(j)] = 1.0;
        hyper.sd_b[static_cast<std::size_t>(j)] = 0.1;
    }
    hyper.quad_coeff = 3.0;
    hyper.noise_sd = 10.0;
    hyper.blocks = {{50, 40}, {50, 100}, {50, 150}, {50, 250}};
    return hyper;
}

ModelSubset nested_subset(NestedModel which) {
    int top = 0;
    switch (which) {
        case NestedModel::x1: top = 1; break;
        case NestedModel::x1_to_x5: top = 5; break;
        case NestedModel::full: top = kNumCovariates; break;
    }
    std::vector<int> indices(static_cast<std::size_t>(top) + 1);
    std::iota(indices.begin(), indices.end(), 0);
    return ModelSubset(std::move(indices));
}

std::string nested_label(NestedModel which) {
    switch (which) {
        case NestedModel::x1: return "p1";
        case NestedModel::x1_to_x5: return "p2";
        case NestedModel::full: return "p3";
    }
    return "?";
}

std::vector<std::pair<std::string, ModelSubset>> nested_candidates() {
    std::vector<std::pair<std::string, ModelSubset>> out;
    for (NestedModel which : {NestedModel::x1, NestedModel::x1_to_x5, NestedModel::full}) {
        out.emplace_back(nested_label(which), nested_subset(which));
    }
    return out;
}

RegressionDataset gen_poly_dataset(const PolyModelParams& params, int rows, std::uint64_t seed,
                                   std::string id) {
    if (rows < 1) throw std::invalid_argument("gen_poly_dataset: rows must be positive");
    RegressionDataset ds;
    ds.id = std::move(id);
    std::mt19937_64 eng = rng::engine(seed);
    fill_poly(eng, params, rows, ds.X, ds.y);
    ds.covariate_names = poly_names();
    return ds;
}

GeneratedPopulation gen_population(const PopulationHyperParams& hyper, std::uint64_t seed) {
    std::mt19937_64 coef_eng = rng::engine(rng::derive(seed, 0));
    const std::uint64_t data_seed = rng::derive(seed, 1);

    std::vector<RegressionDataset> datasets;
    std::vector<PolyModelParams> dataset_params;
    int j = 0;
    for (const auto& [count, rows] : hyper.blocks) {
        for (int c = 0; c < count; ++c, ++j) {
            PolyModelParams params = draw_params(hyper, coef_eng);
            datasets.push_back(gen_poly_dataset(params, rows, rng::derive(data_seed, j),
                                                padded_id(j)));
            dataset_params.push_back(params);
        }
    }
    return GeneratedPopulation{MultiSampleCollection(std::move(datasets)),
                               std::move(dataset_params)};
}

McEstimate mc_prediction_error(const PolyModelParams& params, const ModelSubset& model, int n,
                               int reps, std::uint64_t seed, int test_pairs_per_rep) {
    if (reps < 1) throw std::invalid_argument("mc_prediction_error: reps must be positive");
    if (test_pairs_per_rep < 1) {
        throw std::invalid_argument("mc_prediction_error: test_pairs_per_rep must be positive");
    }
    if (n < model.size() + 2) {
        throw std::invalid_argument("mc_prediction_error: n must exceed the model size");
    }
    if (model.indices().back() > kNumCovariates) {
        throw std::invalid_argument("mc_prediction_error: model column out of range");
    }

    std::vector<double> results(static_cast<std::size_t>(reps),
                                std::numeric_limits<double>::quiet_NaN());
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
        std::mt19937_64 eng = rng::engine(rng::derive(seed, r));
        Matrix X;
        Vector y;
        fill_poly(eng, params, n, X, y);

        Matrix xp(n, model.size());
        for (int j = 0; j < model.size(); ++j) {
            xp.col(j) = X.col(model.indices()[static_cast<std::size_t>(j)]);
        }
        if (!guard_check_matrix(xp).invertible) return;  // NaN marks the excluded replication
        Vector beta;
        try {
            beta = detail::solve_ols(xp, y);
        } catch (const SingularDesign&) {
            return;
        }

        double acc = 0.0;
        for (int t = 0; t < test_pairs_per_rep; ++t) {
            std::array<double, kNumCovariates + 1> x{};
            x[0] = 1.0;
            double mean = params.b[0];
            for (int j = 1; j <= kNumCovariates; ++j) {
                x[static_cast<std::size_t>(j)] = rng::standard_normal(eng);
                mean += params.b[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
            }
            const double eps = rng::standard_normal(eng);
            const double y_test =
                mean + params.quad_coeff * (x[1] * x[1] - 1.0) + params.noise_sd * eps;
            double pred = 0.0;
            for (int j = 0; j < model.size(); ++j) {
                pred += beta(j) * x[static_cast<std::size_t>(model.indices()[static_cast<std::size_t>(j)])];
            }
            acc += (y_test - pred) * (y_test - pred);
        }
        results[r] = acc / test_pairs_per_rep;
    });

    std::vector<double> ok;
    ok.reserve(results.size());
    for (double v : results) {
        if (!std::isnan(v)) ok.push_back(v);
    }
    McEstimate est;
    est.replications = static_cast<int>(ok.size());
    est.seed = seed;
    est.guard_failures = reps - est.replications;
    if (!ok.empty()) {
        est.mean = mean_of(ok);
        est.std_error = se_of_mean(ok, est.mean);
    }
    return est;
}

ArCurve ar_curve_prefix(const PolyModelParams& params, int k) {
    if (k < 0 || k > kNumCovariates) {
        throw std::invalid_argument("ar_curve_prefix: k must be in 0..10");
    }
    double tail = 0.0;  // squared linear coefficients left out of the model
    for (int j = k + 1; j <= kNumCovariates; ++j) {
        tail += params.b[static_cast<std::size_t>(j)] * params.b[static_cast<std::size_t>(j)];
    }
    const double a2 = params.quad_coeff * params.quad_coeff;
    const double s2 = params.noise_sd * params.noise_sd;
    ArCurve curve;
    curve.limit_term = tail + 2.0 * a2 + s2;
    // tr(W): one E(x_j^2 e^2) term per model column; the X1 column picks up
    // the quadratic part with E X1^2 (X1^2-1)^2 = 10.
    curve.trace_term = (k + 1) * (tail + s2) + (k >= 1 ? (2.0 * k + 10.0) * a2 : 2.0 * a2);
    return curve;
}

ArCurve ar_curve(const PolyModelParams& params, NestedModel which) {
    switch (which) {
        case NestedModel::x1: return ar_curve_prefix(params, 1);
        case NestedModel::x1_to_x5: return ar_curve_prefix(params, 5);
        case NestedModel::full: return ar_curve_prefix(params, kNumCovariates);
    }
    throw std::invalid_argument("ar_curve: unknown model");
}

double ar_closed_form(const PolyModelParams& params, NestedModel which, double n) {
    return ar_curve(params, which).value_at(n);
}

ArCurve ar_from_moments(double limit_term, double trace_term) {
    if (trace_term < 0.0) throw std::invalid_argument("ar_from_moments: negative trace term");
    return ArCurve{limit_term, trace_term};
}

MeanCriterionCurves mean_criterion_curves(const PolyModelParams& params,
                                          const std::vector<ModelSubset>& models, int rows,
                                          int reps, std::uint64_t seed, JackknifePath path,
                                          int threads) {
    struct RepResult {
        bool ok = false;
        std::vector<double> level_u, slope_u, level_c, slope_c;
    };
    std::vector<RepResult> per_rep(static_cast<std::size_t>(reps));

    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
        RegressionDataset ds = gen_poly_dataset(params, rows, rng::derive(seed, r));
        RepResult& out = per_rep[r];
        try {
            for (const ModelSubset& m : models) {
                CriterionComponents cu = criterion_components(ds, m);
                CriterionComponents cc = jackknife_components(ds, m, {}, path);
                out.level_u.push_back(cu.level);
                out.slope_u.push_back(cu.slope);
                out.level_c.push_back(cc.level);
                out.slope_c.push_back(cc.slope);
            }
            out.ok = true;
        } catch (const SingularDesign&) {
            out.ok = false;
        }
    }, threads);

    MeanCriterionCurves curves;
    for (std::size_t m = 0; m < models.size(); ++m) {
        std::vector<double> lu, su, lc, sc;
        for (const RepResult& rr : per_rep) {
            if (!rr.ok) continue;
            lu.push_back(rr.level_u[m]);
            su.push_back(rr.slope_u[m]);
            lc.push_back(rr.level_c[m]);
            sc.push_back(rr.slope_c[m]);
        }
        auto summarize = [](const std::vector<double>& level, const std::vector<double>& slope) {
            CriterionCurveEstimate est;
            est.reps = static_cast<int>(level.size());
            est.curve.limit_term = mean_of(level);
            est.curve.trace_term = mean_of(slope);
            est.level_se = se_of_mean(level, est.curve.limit_term);
            est.slope_se = se_of_mean(slope, est.curve.trace_term);
            return est;
        };
        curves.uncorrected.push_back(summarize(lu, su));
        curves.corrected.push_back(summarize(lc, sc));
        if (m == 0) curves.dropped = reps - static_cast<int>(lu.size());
    }
    return curves;
}

std::vector<SelectionFrequencyRow> selection_probability_experiment(
    const SelectionExperimentConfig& config, int reps, std::uint64_t seed) {
    if (reps < 1) throw std::invalid_argument("selection experiment: reps must be positive");
    if (config.n_grid.empty()) throw std::invalid_argument("selection experiment: empty n grid");
    if (config.candidates.empty()) {
        throw std::invalid_argument("selection experiment: no candidate models");
    }

    const std::uint64_t theta_seed = rng::derive(seed, 0);
    const std::uint64_t data_seed = rng::derive(seed, 1);

    std::vector<PolyModelParams> fixed_params;
    if (config.multi_sample && !config.fresh_coefficients) {
        std::mt19937_64 eng = rng::engine(rng::derive(theta_seed, 0));
        for (const auto& [count, rows] : config.hyper.blocks) {
            for (int c = 0; c < count; ++c) fixed_params.push_back(draw_params(config.hyper, eng));
        }
    }

    const std::size_t n_models = config.candidates.size();
    const std::size_t n_points = config.n_grid.size();
    // chosen model index per (rep, grid point); -1 marks a failed replication
    std::vector<std::vector<int>> chosen(static_cast<std::size_t>(reps),
                                         std::vector<int>(n_points, -1));

    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
        // assemble this replication's datasets
        std::vector<RegressionDataset> datasets;
        if (config.multi_sample) {
            std::vector<PolyModelParams> params = fixed_params;
            if (config.fresh_coefficients) {
                std::mt19937_64 eng = rng::engine(rng::derive(theta_seed, r));
                params.clear();
                for (const auto& [count, rows] : config.hyper.blocks) {
                    for (int c = 0; c < count; ++c) params.push_back(draw_params(config.hyper, eng));
                }
            }
            const std::uint64_t rep_seed = rng::derive(data_seed, r);
            int j = 0;
            for (const auto& [count, rows] : config.hyper.blocks) {
                for (int c = 0; c < count; ++c, ++j) {
                    datasets.push_back(gen_poly_dataset(params[static_cast<std::size_t>(j)], rows,
                                                        rng::derive(rep_seed, j), padded_id(j)));
                }
            }
        } else {
            datasets.push_back(gen_poly_dataset(config.params, config.single_sample_rows,
                                                rng::derive(data_seed, r)));
        }

        // per-model mean criterion components over the usable datasets
        std::vector<std::vector<CriterionComponents>> comps(n_models);
        for (std::size_t m = 0; m < n_models; ++m) {
            for (const RegressionDataset& ds : datasets) {
                try {
                    comps[m].push_back(config.corrected
                                           ? jackknife_components(ds, config.candidates[m].second,
                                                                  {}, config.path)
                                           : criterion_components(ds, config.candidates[m].second));
                } catch (const SingularDesign&) {
                    // dataset excluded for this model
                }
            }
            if (comps[m].empty()) return;  // replication unusable for this candidate set
        }

        for (std::size_t g = 0; g < n_points; ++g) {
            const int n = config.n_grid[g];
            std::size_t best = 0;
            double best_value = 0.0;
            for (std::size_t m = 0; m < n_models; ++m) {
                std::vector<double> values;
                values.reserve(comps[m].size());
                for (const CriterionComponents& c : comps[m]) values.push_back(c.value_at(n));
                const double v = pairwise_sum(values) / static_cast<double>(values.size());
                if (m == 0 || v < best_value) {
                    best = m;
                    best_value = v;
                } else if (v == best_value &&
                           config.candidates[m].second < config.candidates[best].second) {
                    best = m;
                }
            }
            chosen[r][g] = static_cast<int>(best);
        }
    }, config.threads);

    std::vector<SelectionFrequencyRow> rows;
    for (std::size_t g = 0; g < n_points; ++g) {
        std::vector<int> counts(n_models, 0);
        int effective = 0;
        for (int r = 0; r < reps; ++r) {
            const int c = chosen[static_cast<std::size_t>(r)][g];
            if (c < 0) continue;
            ++counts[static_cast<std::size_t>(c)];
            ++effective;
        }
        for (std::size_t m = 0; m < n_models; ++m) {
            SelectionFrequencyRow row;
            row.n = config.n_grid[g];
            row.model = config.candidates[m].first;
            row.reps = effective;
            if (effective > 0) {
                row.frequency = static_cast<double>(counts[m]) / effective;
                row.mc_se = std::sqrt(row.frequency * (1.0 - row.frequency) / effective);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace covsel::sim
