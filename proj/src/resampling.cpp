#include "covsel/resampling.hpp"

#include "covsel/parallel.hpp"
#include "covsel/rng.hpp"

#include <cmath>
#include <limits>

namespace covsel {

namespace {

RegressionDataset resample_rows(const RegressionDataset& ds, std::mt19937_64& eng) {
    std::vector<int> idx = rng::sample_with_replacement(eng, static_cast<int>(ds.rows()));
    RegressionDataset out;
    out.id = ds.id;
    out.covariate_names = ds.covariate_names;
    out.X.resize(ds.rows(), ds.cols());
    out.y.resize(ds.rows());
    for (Eigen::Index i = 0; i < ds.rows(); ++i) {
        out.X.row(i) = ds.X.row(idx[static_cast<std::size_t>(i)]);
        out.y(i) = ds.y(idx[static_cast<std::size_t>(i)]);
    }
    return out;
}

double evaluate_statistic(const MultiSampleCollection& collection,
                          const BootstrapStatistic& stat, int n, bool corrected,
                          const GuardPolicy& policy, JackknifePath path) {
    switch (stat.kind) {
        case BootstrapStatistic::Kind::aggregate:
            return aggregate_criterion(collection, stat.p, n, corrected, policy, path).value;
        case BootstrapStatistic::Kind::difference:
            return aggregate_criterion(collection, stat.p, n, corrected, policy, path).value -
                   aggregate_criterion(collection, *stat.q, n, corrected, policy, path).value;
        case BootstrapStatistic::Kind::geno: {
            GenoValue g = geno_hat(collection, stat.p, *stat.q, n, corrected, policy, path);
            if (g.is_infinite) return std::numeric_limits<double>::infinity();
            return g.value;
        }
    }
    throw std::invalid_argument("unknown bootstrap statistic");
}

}  // namespace

BootstrapStatistic BootstrapStatistic::aggregate(ModelSubset p) {
    BootstrapStatistic s;
    s.kind = Kind::aggregate;
    s.p = std::move(p);
    return s;
}

BootstrapStatistic BootstrapStatistic::difference(ModelSubset p, ModelSubset q) {
    BootstrapStatistic s;
    s.kind = Kind::difference;
    s.p = std::move(p);
    s.q = std::move(q);
    return s;
}

BootstrapStatistic BootstrapStatistic::geno(ModelSubset p, ModelSubset q) {
    BootstrapStatistic s;
    s.kind = Kind::geno;
    s.p = std::move(p);
    s.q = std::move(q);
    return s;
}

std::string BootstrapStatistic::name() const {
    switch (kind) {
        case Kind::aggregate: return "criterion" + p.label();
        case Kind::difference: return "criterion" + p.label() + "-" + q->label();
        case Kind::geno: return "geno(" + p.label() + ";" + q->label() + ")";
    }
    return "?";
}

BootstrapResult bootstrap_sd(const MultiSampleCollection& collection,
                             const BootstrapStatistic& statistic, int n, int B, bool corrected,
                             std::uint64_t seed, const GuardPolicy& policy,
                             const BootstrapOptions& options) {
    if (B < 2) throw std::invalid_argument("bootstrap requires B >= 2");
    if ((statistic.kind != BootstrapStatistic::Kind::aggregate) && !statistic.q.has_value()) {
        throw std::invalid_argument("bootstrap statistic needs a second model");
    }

    BootstrapResult result;
    result.statistic_name = statistic.name();
    result.B = B;
    result.seed = seed;
    result.point = evaluate_statistic(collection, statistic, n, corrected, policy, options.path);

    // cheap mode: bootstrap the uncorrected statistic around a corrected point
    const bool replicate_corrected = corrected && !options.cheap_uncorrected;

    std::vector<double> replicate(static_cast<std::size_t>(B),
                                  std::numeric_limits<double>::quiet_NaN());
    parallel_for(static_cast<std::size_t>(B), [&](std::size_t r) {
        std::vector<RegressionDataset> datasets;
        datasets.reserve(collection.size());
        if (options.dataset_level) {
            std::mt19937_64 eng =
                rng::engine(rng::derive(rng::derive(seed, rng::hash_label("__datasets__")), r));
            std::vector<int> pick =
                rng::sample_with_replacement(eng, static_cast<int>(collection.size()));
            for (std::size_t i = 0; i < pick.size(); ++i) {
                RegressionDataset copy = collection.at(static_cast<std::size_t>(pick[i]));
                copy.id += "#" + std::to_string(i);  // ids must stay unique
                datasets.push_back(std::move(copy));
            }
        } else {
            for (const RegressionDataset& ds : collection.datasets()) {
                std::mt19937_64 eng =
                    rng::engine(rng::derive(rng::derive(seed, rng::hash_label(ds.id)), r));
                datasets.push_back(resample_rows(ds, eng));
            }
        }
        try {
            MultiSampleCollection resampled(std::move(datasets));
            const double v = evaluate_statistic(resampled, statistic, n, replicate_corrected,
                                                policy, options.path);
            if (std::isfinite(v)) replicate[r] = v;
        } catch (const SingularDesign&) {
        } catch (const NoUsableDatasets&) {
        }
    }, options.threads);

    std::vector<double> ok;
    ok.reserve(replicate.size());
    for (double v : replicate) {
        if (!std::isnan(v)) ok.push_back(v);
    }
    result.failed_replicates = B - static_cast<int>(ok.size());
    if (ok.size() < 2) {
        throw SingularDesign("bootstrap: fewer than 2 successful replicates (" +
                             std::to_string(ok.size()) + " of " + std::to_string(B) + ")");
    }
    const double mean = pairwise_sum(ok) / static_cast<double>(ok.size());
    double ss = 0.0;
    for (double v : ok) ss += (v - mean) * (v - mean);
    result.sd = std::sqrt(ss / (static_cast<double>(ok.size()) - 1.0));
    return result;
}

CvResult cv_prediction_error(const MultiSampleCollection& collection, const ModelSubset& model,
                             int n, int reps, std::uint64_t seed, const GuardPolicy& policy,
                             int retry_cap, int threads) {
    if (reps < 1) throw std::invalid_argument("cv requires reps >= 1");
    if (n < model.size()) throw std::invalid_argument("cv: n smaller than the model size");

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < collection.size(); ++i) {
        if (collection.at(i).rows() > n) eligible.push_back(i);
    }
    if (eligible.empty()) {
        throw NoUsableDatasets("cv: no dataset has more than n=" + std::to_string(n) + " rows");
    }

    struct PerDataset {
        double mean = std::numeric_limits<double>::quiet_NaN();
        int dropped = 0;
    };
    std::vector<PerDataset> per(eligible.size());

    parallel_for(eligible.size(), [&](std::size_t e) {
        const RegressionDataset& ds = collection.at(eligible[e]);
        const int rows = static_cast<int>(ds.rows());
        Matrix xp = model_columns(ds, model);
        const std::uint64_t ds_seed = rng::derive(seed, rng::hash_label(ds.id));

        Matrix x_train(n, model.size());
        Vector y_train(n);
        std::vector<double> rep_means;
        rep_means.reserve(static_cast<std::size_t>(reps));
        int dropped = 0;

        for (int rep = 0; rep < reps; ++rep) {
            std::mt19937_64 eng = rng::engine(rng::derive(ds_seed, rep));
            bool fitted = false;
            Vector beta;
            std::vector<int> perm;
            for (int attempt = 0; attempt <= retry_cap && !fitted; ++attempt) {
                perm = rng::shuffled_indices(eng, rows);
                for (int i = 0; i < n; ++i) {
                    x_train.row(i) = xp.row(perm[static_cast<std::size_t>(i)]);
                    y_train(i) = ds.y(perm[static_cast<std::size_t>(i)]);
                }
                if (!guard_check_matrix(x_train, policy).invertible) continue;
                try {
                    beta = detail::solve_ols(x_train, y_train);
                    fitted = true;
                } catch (const SingularDesign&) {
                }
            }
            if (!fitted) {
                ++dropped;
                continue;
            }
            double acc = 0.0;
            for (int i = n; i < rows; ++i) {
                const int row = perm[static_cast<std::size_t>(i)];
                const double err = ds.y(row) - xp.row(row).dot(beta);
                acc += err * err;
            }
            rep_means.push_back(acc / static_cast<double>(rows - n));
        }

        per[e].dropped = dropped;
        if (!rep_means.empty()) {
            per[e].mean = pairwise_sum(rep_means) / static_cast<double>(rep_means.size());
        }
    }, threads);

    CvResult result;
    result.model = model;
    result.n = n;
    result.reps = reps;
    result.seed = seed;
    std::vector<double> means;
    for (std::size_t e = 0; e < eligible.size(); ++e) {
        result.dropped_cells += per[e].dropped;
        if (std::isnan(per[e].mean)) continue;
        means.push_back(per[e].mean);
        result.per_dataset.emplace_back(collection.at(eligible[e]).id, per[e].mean);
    }
    if (means.empty()) {
        throw NoUsableDatasets("cv: every eligible (dataset, repetition) cell failed the guard");
    }
    result.datasets_used = static_cast<int>(means.size());
    result.estimate = pairwise_sum(means) / static_cast<double>(means.size());
    return result;
}

}  // namespace covsel
