#include "covsel/regression.hpp"

#include "covsel/rng.hpp"
#include "test_helpers.hpp"

#include "doctest.h"

using namespace covsel;
using covsel::test::make_dataset;
using covsel::test::max_rel_diff;
using covsel::test::random_dataset;
using covsel::test::random_invertible;
using covsel::test::rel_diff;
using covsel::test::reparameterize;

TEST_CASE("intercept-only fit is the sample mean") {
    auto ds = make_dataset("m", Matrix::Ones(4, 1), (Vector(4) << 1, 2, 3, 4).finished());
    FitResult fit = fit_ols(ds, ModelSubset({0}));
    CHECK(fit.beta_hat(0) == doctest::Approx(2.5));
    CHECK(fit.rss_over_n == doctest::Approx(1.25));
}

TEST_CASE("identity design interpolates exactly") {
    auto ds = make_dataset("i", Matrix::Identity(2, 2), (Vector(2) << 3, 5).finished());
    FitResult fit = fit_ols(ds, ModelSubset({0, 1}));
    CHECK(fit.beta_hat(0) == doctest::Approx(3.0));
    CHECK(fit.beta_hat(1) == doctest::Approx(5.0));
    CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fit agrees with the normal-equations oracle on random instances") {
    std::mt19937_64 eng = rng::engine(101);
    for (int t = 0; t < 200; ++t) {
        const int cols = 1 + rng::uniform_int(eng, 4);  // up to |p| = 4
        const int rows = cols + 1 + rng::uniform_int(eng, 20 - cols);
        auto ds = random_dataset(eng, rows, cols);
        std::vector<int> all(static_cast<std::size_t>(cols));
        for (int j = 0; j < cols; ++j) all[static_cast<std::size_t>(j)] = j;
        ModelSubset model(all);

        FitResult fit = fit_ols(ds, model);
        Vector oracle = covsel::test::normal_equations_oracle(model_columns(ds, model), ds.y);
        CHECK(max_rel_diff(fit.beta_hat, oracle) < 1e-8);
    }
}

TEST_CASE("normal-equation orthogonality of residuals") {
    std::mt19937_64 eng = rng::engine(202);
    for (int t = 0; t < 100; ++t) {
        const int cols = 2 + rng::uniform_int(eng, 3);
        const int rows = cols + 2 + rng::uniform_int(eng, 40);
        auto ds = random_dataset(eng, rows, cols);
        std::vector<int> all(static_cast<std::size_t>(cols));
        for (int j = 0; j < cols; ++j) all[static_cast<std::size_t>(j)] = j;
        ModelSubset model(all);

        Matrix xp = model_columns(ds, model);
        FitResult fit = fit_ols(ds, model);
        double max_dot = (xp.transpose() * fit.residuals).cwiseAbs().maxCoeff();
        double col_norm = 0.0;
        for (Eigen::Index j = 0; j < xp.cols(); ++j) col_norm = std::max(col_norm, xp.col(j).norm());
        CHECK(max_dot <= 1e-8 * ds.y.norm() * col_norm);
    }
}

TEST_CASE("sandwich moments on the hand example") {
    auto ds = make_dataset("s", Matrix::Ones(4, 1), (Vector(4) << 0, 0, 2, 2).finished());
    ModelSubset m({0});
    FitResult fit = fit_ols(ds, m);
    CHECK(fit.beta_hat(0) == doctest::Approx(1.0));
    SandwichMoments mom = sandwich_moments(ds, m, fit);
    CHECK(mom.q_hat(0, 0) == doctest::Approx(1.0));
    CHECK(mom.w_hat(0, 0) == doctest::Approx(1.0));
    CHECK(mom.trace_v == doctest::Approx(1.0));
}

TEST_CASE("perfect fit gives a zero sandwich") {
    auto ds = make_dataset("p", Matrix::Identity(3, 3), (Vector(3) << 1, -2, 4).finished());
    ModelSubset m({0, 1, 2});
    FitResult fit = fit_ols(ds, m);
    SandwichMoments mom = sandwich_moments(ds, m, fit);
    CHECK(mom.w_hat.cwiseAbs().maxCoeff() < 1e-20);
    CHECK(mom.trace_v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("homoskedastic linear truth: trace approaches sigma^2 |p|") {
    // y = 1 + 2 x1 - x2 + sigma eps with sigma = 3; tr(V) = sigma^2 * 3 = 27
    std::mt19937_64 eng = rng::engine(17);
    const int n = 100000;
    Matrix x(n, 3);
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = rng::standard_normal(eng);
        x(i, 2) = rng::standard_normal(eng);
        y(i) = 1.0 + 2.0 * x(i, 1) - x(i, 2) + 3.0 * rng::standard_normal(eng);
    }
    auto ds = make_dataset("h", std::move(x), std::move(y));
    ModelSubset m({0, 1, 2});
    SandwichMoments mom = sandwich_moments(ds, m, fit_ols(ds, m));
    CHECK(std::abs(mom.trace_v - 27.0) / 27.0 < 0.05);
}

TEST_CASE("trace and rss are invariant under invertible reparameterization") {
    std::mt19937_64 eng = rng::engine(303);
    auto ds = random_dataset(eng, 60, 4);
    ModelSubset m({0, 1, 2, 3});
    FitResult fit = fit_ols(ds, m);
    SandwichMoments mom = sandwich_moments(ds, m, fit);

    for (int t = 0; t < 100; ++t) {
        Matrix a = random_invertible(eng, 4);
        RegressionDataset mixed = reparameterize(ds, m, a);
        FitResult fit2 = fit_ols(mixed, m);
        SandwichMoments mom2 = sandwich_moments(mixed, m, fit2);
        CHECK(rel_diff(fit.rss_over_n, fit2.rss_over_n) < 1e-8);
        CHECK(rel_diff(mom.trace_v, mom2.trace_v) < 1e-8);
    }
}

TEST_CASE("guard fails on duplicated columns") {
    Matrix x(4, 2);
    x.col(0).setOnes();
    x.col(1).setOnes();
    auto ds = make_dataset("dup", std::move(x), Vector::Zero(4));
    GuardStatus g = guard_check(ds, ModelSubset({0, 1}));
    CHECK_FALSE(g.invertible);
    CHECK(g.min_eigenvalue < 1e-10);
    CHECK_THROWS_AS(fit_ols(ds, ModelSubset({0, 1})), SingularDesign);
}

TEST_CASE("guard passes with overwhelming frequency for large normal designs") {
    // known-Gram mode with identity reference
    GuardPolicy policy;
    policy.q_reference = Matrix::Identity(3, 3);
    std::mt19937_64 eng = rng::engine(404);
    int passed = 0;
    const int trials = 300;
    for (int t = 0; t < trials; ++t) {
        Matrix x(10000, 3);
        for (int i = 0; i < 10000; ++i)
            for (int j = 0; j < 3; ++j) x(i, j) = rng::standard_normal(eng);
        if (guard_check_matrix(x, policy).invertible) ++passed;
    }
    CHECK(static_cast<double>(passed) / trials >= 0.999);
}

TEST_CASE("all-equal discrete draws are collinear with the intercept") {
    Matrix x(3, 2);
    x.col(0).setOnes();
    x.col(1).setOnes();  // Bernoulli column that came up all ones
    auto ds = make_dataset("b", std::move(x), Vector::Zero(3));
    CHECK_FALSE(guard_check(ds, ModelSubset({0, 1})).invertible);
}

TEST_CASE("guard pass frequency is nondecreasing in n for a discrete design") {
    // intercept + Bernoulli(1/2) covariate; Q = [[1, .5], [.5, .5]]
    Matrix q(2, 2);
    q << 1.0, 0.5, 0.5, 0.5;
    GuardPolicy policy;
    policy.q_reference = q;

    std::mt19937_64 eng = rng::engine(505);
    const int trials = 3000;
    double prev = -1.0;
    for (int n : {10, 20, 40, 80, 160}) {
        int passed = 0;
        for (int t = 0; t < trials; ++t) {
            Matrix x(n, 2);
            for (int i = 0; i < n; ++i) {
                x(i, 0) = 1.0;
                x(i, 1) = rng::uniform01(eng) < 0.5 ? 0.0 : 1.0;
            }
            if (guard_check_matrix(x, policy).invertible) ++passed;
        }
        const double freq = static_cast<double>(passed) / trials;
        CHECK(freq >= prev);
        prev = freq;
    }
    CHECK(prev >= 0.999);  // largest n passes essentially always
}

TEST_CASE("fewer rows than columns is always singular") {
    std::mt19937_64 eng = rng::engine(606);
    auto ds = random_dataset(eng, 3, 4);
    CHECK_THROWS_AS(fit_ols(ds, ModelSubset({0, 1, 2, 3})), SingularDesign);
    CHECK_FALSE(guard_check(ds, ModelSubset({0, 1, 2, 3})).invertible);
}

TEST_CASE("dataset validation rejects non-finite entries and size mismatches") {
    auto ds = make_dataset("v", Matrix::Ones(3, 1), Vector::Zero(3));
    CHECK_NOTHROW(ds.validate());
    auto bad = ds;
    bad.y(1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(bad.validate(), DataError);
    auto bad2 = ds;
    bad2.y = Vector::Zero(2);
    CHECK_THROWS_AS(bad2.validate(), DataError);
}

TEST_CASE("model subsets are sorted, unique, nonempty") {
    ModelSubset m({3, 0, 1});
    CHECK(m.indices() == std::vector<int>{0, 1, 3});
    CHECK(m.label() == "[0,1,3]");
    CHECK_THROWS_AS(ModelSubset({}), std::invalid_argument);
    CHECK_THROWS_AS(ModelSubset({1, 1}), std::invalid_argument);
    CHECK(ModelSubset({0, 1}) < ModelSubset({0, 1, 2}));  // parsimony first
    CHECK(ModelSubset({0, 1}) < ModelSubset({0, 2}));     // then lexicographic
}
