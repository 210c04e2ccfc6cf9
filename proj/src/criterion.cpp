#include "covsel/criterion.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <numeric>
#include <string>

namespace covsel {

double pairwise_sum(std::span<const double> values) {
    if (values.empty()) return 0.0;
    if (values.size() <= 4) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double jackknife_combine(double full, std::span<const double> leave_one_out) {
    const double n = static_cast<double>(leave_one_out.size());
    const double mean_loo = pairwise_sum(leave_one_out) / n;
    return n * full - (n - 1.0) * mean_loo;
}

CriterionComponents criterion_components(const RegressionDataset& dataset,
                                         const ModelSubset& model, const GuardPolicy& policy) {
    FitResult fit = fit_ols(dataset, model, policy);
    SandwichMoments mom = sandwich_moments(dataset, model, fit);
    const double n_rows = static_cast<double>(dataset.rows());

    CriterionComponents parts;
    parts.sample_size = static_cast<int>(dataset.rows());
    parts.rss_over_n = fit.rss_over_n;
    parts.trace_v = mom.trace_v;
    parts.level = fit.rss_over_n + mom.trace_v / n_rows;
    parts.slope = mom.trace_v;
    parts.corrected = false;
    return parts;
}

CriterionComponents jackknife_components(const RegressionDataset& dataset,
                                         const ModelSubset& model, const GuardPolicy& policy,
                                         JackknifePath path) {
    Matrix xp = model_columns(dataset, model);
    const int n_rows = static_cast<int>(xp.rows());
    const int k = static_cast<int>(xp.cols());
    if (n_rows < k + 2) {
        throw SingularDesign("dataset '" + dataset.id + "', model " + model.label() +
                             ": jackknife needs at least " + std::to_string(k + 2) + " rows, got " +
                             std::to_string(n_rows));
    }
    GuardStatus guard = guard_check_matrix(xp, policy);
    if (!guard.invertible) {
        throw SingularDesign("dataset '" + dataset.id + "', model " + model.label() +
                             ": design fails the invertibility guard");
    }
    const Vector& y = dataset.y;
    Vector beta = detail::solve_ols(xp, y);
    Vector resid = y - xp * beta;
    const double rss_over_n = resid.squaredNorm() / n_rows;

    Matrix gram = xp.transpose() * xp;
    Vector xty = xp.transpose() * y;
    Vector e2 = resid.array().square();
    Matrix w_hat = (xp.transpose() * e2.asDiagonal() * xp) / n_rows;
    const double trace_v = detail::trace_w_qinv(w_hat, gram / n_rows);

    double sum_t = 0.0;
    Matrix x_loo(n_rows - 1, k);
    Vector y_loo(n_rows - 1);
    const double m = static_cast<double>(n_rows - 1);

    for (int i = 0; i < n_rows; ++i) {
        Matrix gram_i;
        Vector beta_i;
        Matrix w_raw;

        if (path == JackknifePath::refit) {
            x_loo.topRows(i) = xp.topRows(i);
            x_loo.bottomRows(n_rows - 1 - i) = xp.bottomRows(n_rows - 1 - i);
            y_loo.head(i) = y.head(i);
            y_loo.tail(n_rows - 1 - i) = y.tail(n_rows - 1 - i);
            gram_i = x_loo.transpose() * x_loo;
        } else {
            gram_i = gram - xp.row(i).transpose() * xp.row(i);
        }

        GuardStatus guard_i = detail::guard_from_gram(gram_i / m, policy);
        if (!guard_i.invertible) {
            throw SingularDesign("dataset '" + dataset.id + "', model " + model.label() +
                                 ": leave-one-out design (row " + std::to_string(i) +
                                 " removed) fails the invertibility guard");
        }

        if (path == JackknifePath::refit) {
            beta_i = detail::solve_ols(x_loo, y_loo);
            Vector e = y_loo - x_loo * beta_i;
            Vector e2_i = e.array().square();
            w_raw = x_loo.transpose() * e2_i.asDiagonal() * x_loo;
        } else {
            Vector b_i = xty - y(i) * xp.row(i).transpose();
            Eigen::LDLT<Matrix> ldlt(gram_i);
            if (ldlt.info() != Eigen::Success) {
                throw SingularDesign("dataset '" + dataset.id + "', model " + model.label() +
                                     ": leave-one-out Gram matrix is not invertible");
            }
            beta_i = ldlt.solve(b_i);
            Vector e = y - xp * beta_i;
            const double e_i = e(i);
            Vector e2_i = e.array().square();
            w_raw = xp.transpose() * e2_i.asDiagonal() * xp -
                    (e_i * e_i) * (xp.row(i).transpose() * xp.row(i));
        }

        sum_t += detail::trace_w_qinv(w_raw / m, gram_i / m);
    }

    const double mean_t = sum_t / n_rows;

    CriterionComponents parts;
    parts.sample_size = n_rows;
    parts.rss_over_n = rss_over_n;
    parts.corrected = true;
    // The trace estimate is the biased part of the statistic; replacing it by
    // its jackknife combination N t - (N-1) mean_i t_(i) removes that bias
    // while keeping the statistic's structure.
    parts.trace_v = n_rows * trace_v - (n_rows - 1) * mean_t;
    parts.slope = parts.trace_v;
    parts.level = rss_over_n + parts.trace_v / n_rows;
    return parts;
}

CriterionValue criterion_from_components(const CriterionComponents& parts,
                                         const ModelSubset& model, int n) {
    if (n < 1) throw std::invalid_argument("criterion: n must be positive");
    CriterionValue out{model};
    out.n = n;
    out.sample_size = parts.sample_size;
    out.corrected = parts.corrected;
    out.rss_term = parts.rss_over_n;
    out.trace_term = parts.trace_v * (1.0 / n + 1.0 / parts.sample_size);
    out.value = out.rss_term + out.trace_term;
    return out;
}

CriterionValue criterion_c(const RegressionDataset& dataset, const ModelSubset& model, int n,
                           const GuardPolicy& policy) {
    return criterion_from_components(criterion_components(dataset, model, policy), model, n);
}

CriterionValue jackknife_criterion(const RegressionDataset& dataset, const ModelSubset& model,
                                   int n, const GuardPolicy& policy, JackknifePath path) {
    return criterion_from_components(jackknife_components(dataset, model, policy, path), model, n);
}

MultiSampleCollection::MultiSampleCollection(std::vector<RegressionDataset> datasets)
    : datasets_(std::move(datasets)) {
    std::sort(datasets_.begin(), datasets_.end(),
              [](const RegressionDataset& a, const RegressionDataset& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < datasets_.size(); ++i) {
        datasets_[i].validate();
        if (i > 0 && datasets_[i].id == datasets_[i - 1].id) {
            throw DataError("duplicate dataset id '" + datasets_[i].id + "'");
        }
    }
}

std::vector<std::size_t> MultiSampleCollection::usable_mask(const ModelSubset& model,
                                                            const GuardPolicy& policy) const {
    std::vector<std::size_t> mask;
    for (std::size_t i = 0; i < datasets_.size(); ++i) {
        if (guard_check(datasets_[i], model, policy).invertible) mask.push_back(i);
    }
    return mask;
}

double ModelEvaluation::mean_value_at(double n) const {
    std::vector<double> values(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) values[i] = components[i].value_at(n);
    return pairwise_sum(values) / static_cast<double>(values.size());
}

double ModelEvaluation::mean_trace() const {
    std::vector<double> traces(components.size());
    for (std::size_t i = 0; i < components.size(); ++i) traces[i] = components[i].slope;
    return pairwise_sum(traces) / static_cast<double>(traces.size());
}

ModelEvaluation evaluate_model_on_mask(const MultiSampleCollection& collection,
                                       const ModelSubset& model,
                                       const std::vector<std::size_t>& mask, bool corrected,
                                       const GuardPolicy& policy, JackknifePath path) {
    ModelEvaluation ev;
    ev.model = model;
    ev.corrected = corrected;
    for (std::size_t idx : mask) {
        const RegressionDataset& ds = collection.at(idx);
        if (corrected) {
            try {
                ev.components.push_back(jackknife_components(ds, model, policy, path));
            } catch (const SingularDesign&) {
                ++ev.jackknife_drops;
                continue;
            }
        } else {
            ev.components.push_back(criterion_components(ds, model, policy));
        }
        ev.used.push_back(idx);
    }
    return ev;
}

ModelEvaluation evaluate_model(const MultiSampleCollection& collection, const ModelSubset& model,
                               bool corrected, const GuardPolicy& policy, JackknifePath path) {
    return evaluate_model_on_mask(collection, model, collection.usable_mask(model, policy),
                                  corrected, policy, path);
}

AggregateCriterion aggregate_from_evaluation(const ModelEvaluation& evaluation, int n) {
    if (evaluation.used.empty()) {
        throw NoUsableDatasets("model " + evaluation.model.label() +
                               ": no usable dataset in the collection");
    }
    AggregateCriterion agg;
    agg.model = evaluation.model;
    agg.n = n;
    agg.corrected = evaluation.corrected;
    agg.j_used = static_cast<int>(evaluation.used.size());
    agg.jackknife_drops = evaluation.jackknife_drops;
    std::vector<double> values;
    values.reserve(evaluation.used.size());
    for (std::size_t i = 0; i < evaluation.used.size(); ++i) {
        CriterionValue cv =
            criterion_from_components(evaluation.components[i], evaluation.model, n);
        values.push_back(cv.value);
        agg.per_dataset.push_back(std::move(cv));
    }
    agg.value = pairwise_sum(values) / static_cast<double>(values.size());
    return agg;
}

AggregateCriterion aggregate_criterion(const MultiSampleCollection& collection,
                                       const ModelSubset& model, int n, bool corrected,
                                       const GuardPolicy& policy, JackknifePath path) {
    ModelEvaluation ev = evaluate_model(collection, model, corrected, policy, path);
    return aggregate_from_evaluation(ev, n);
}

}  // namespace covsel
