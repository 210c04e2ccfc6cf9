#include "covsel/criterion.hpp"

#include "covsel/rng.hpp"
#include "covsel/selector.hpp"
#include "covsel/simulation.hpp"
#include "test_helpers.hpp"

#include "doctest.h"

using namespace covsel;
using covsel::test::make_dataset;
using covsel::test::random_dataset;
using covsel::test::random_invertible;
using covsel::test::rel_diff;
using covsel::test::reparameterize;

TEST_CASE("perfect fit has zero criterion") {
    auto ds = make_dataset("p", Matrix::Identity(2, 2), (Vector(2) << 3, 5).finished());
    CriterionValue cv = criterion_c(ds, ModelSubset({0, 1}), 7);
    CHECK(cv.rss_term == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(cv.trace_term == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(cv.value == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("hand-evaluated criterion on the four-point example") {
    auto ds = make_dataset("h", Matrix::Ones(4, 1), (Vector(4) << 0, 0, 2, 2).finished());
    CriterionValue cv = criterion_c(ds, ModelSubset({0}), 4);
    CHECK(cv.rss_term == doctest::Approx(1.0));
    CHECK(cv.trace_term == doctest::Approx(0.5));
    CHECK(cv.value == doctest::Approx(1.5));
}

TEST_CASE("criterion mean matches the closed-form curve at large N") {
    auto prm = sim::PolyModelParams::benchmark();
    ModelSubset p1 = sim::nested_subset(sim::NestedModel::x1);
    const int reps = 1000;
    std::vector<double> values(reps);
    for (int r = 0; r < reps; ++r) {
        auto ds = sim::gen_poly_dataset(prm, 250, rng::derive(4242, static_cast<std::uint64_t>(r)));
        values[static_cast<std::size_t>(r)] = criterion_c(ds, p1, 250).value;
    }
    const double mean = pairwise_sum(values) / reps;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double se = std::sqrt(ss / (reps - 1.0) / reps);
    const double target = sim::ar_closed_form(prm, sim::NestedModel::x1, 250);  // 133.344
    CHECK(target == doctest::Approx(132.0 + 336.0 / 250.0));
    CHECK(std::abs(mean - target) < 3.0 * se);
}

TEST_CASE("difference of criterion values across n is the trace increment") {
    std::mt19937_64 eng = rng::engine(7);
    auto ds = random_dataset(eng, 30, 3);
    ModelSubset m({0, 1, 2});
    CriterionComponents parts = criterion_components(ds, m);
    CriterionValue a = criterion_c(ds, m, 11);
    CriterionValue b = criterion_c(ds, m, 97);
    CHECK(rel_diff(a.value - b.value, parts.trace_v * (1.0 / 11 - 1.0 / 97)) < 1e-12);
    CHECK(a.value > b.value);  // strictly decreasing in n when trace > 0
}

TEST_CASE("criterion is invariant under invertible reparameterization") {
    std::mt19937_64 eng = rng::engine(8);
    auto ds = random_dataset(eng, 40, 3);
    ModelSubset m({0, 1, 2});
    const double base = criterion_c(ds, m, 25).value;
    for (int t = 0; t < 20; ++t) {
        RegressionDataset mixed = reparameterize(ds, m, random_invertible(eng, 3));
        CHECK(rel_diff(base, criterion_c(mixed, m, 25).value) < 1e-8);
    }
}

TEST_CASE("jackknife is a fixed point on an exactly fitted response") {
    std::mt19937_64 eng = rng::engine(9);
    auto ds = random_dataset(eng, 12, 2);
    ds.y.setZero();
    CriterionValue c = criterion_c(ds, ModelSubset({0, 1}), 10);
    CriterionValue j = jackknife_criterion(ds, ModelSubset({0, 1}), 10);
    CHECK(c.value == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(j.value == doctest::Approx(c.value).epsilon(1e-12));
    CHECK(j.corrected);
}

TEST_CASE("jackknifed trace equals the brute-force leave-one-out enumeration") {
    std::mt19937_64 eng = rng::engine(10);
    auto ds = random_dataset(eng, 6, 2);
    ModelSubset m({0, 1});

    // oracle: recompute the trace on each 5-row dataset through the public
    // criterion path and combine by N T - (N-1) mean T_(i)
    CriterionComponents full = criterion_components(ds, m);
    std::vector<double> loo_traces;
    for (int i = 0; i < 6; ++i) {
        RegressionDataset reduced = ds;
        reduced.X.resize(5, 2);
        reduced.y.resize(5);
        int w = 0;
        for (int r = 0; r < 6; ++r) {
            if (r == i) continue;
            reduced.X.row(w) = ds.X.row(r);
            reduced.y(w) = ds.y(r);
            ++w;
        }
        loo_traces.push_back(criterion_components(reduced, m).trace_v);
    }
    const double oracle_trace = jackknife_combine(full.trace_v, loo_traces);
    const double oracle_value = full.rss_over_n + oracle_trace * (1.0 / 9 + 1.0 / 6);

    CriterionValue j = jackknife_criterion(ds, m, 9);
    CHECK(rel_diff(j.value, oracle_value) < 1e-8);

    CriterionComponents parts = jackknife_components(ds, m);
    CHECK(rel_diff(parts.trace_v, oracle_trace) < 1e-8);
}

TEST_CASE("refit and downdate jackknife paths agree") {
    std::mt19937_64 eng = rng::engine(11);
    for (int t = 0; t < 10; ++t) {
        auto ds = random_dataset(eng, 25 + 5 * t, 4);
        ModelSubset m({0, 1, 2, 3});
        auto a = jackknife_components(ds, m, {}, JackknifePath::refit);
        auto b = jackknife_components(ds, m, {}, JackknifePath::downdate);
        CHECK(rel_diff(a.level, b.level) < 1e-10);
        CHECK(rel_diff(a.slope, b.slope) < 1e-10);
    }
}

TEST_CASE("jackknife combination applied to the sample mean is exact") {
    std::vector<double> y{0, 4, 8, 12, 16};
    const double mean = 8.0;
    std::vector<double> loo;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double s = 0.0;
        for (std::size_t r = 0; r < y.size(); ++r) {
            if (r != i) s += y[r];
        }
        loo.push_back(s / 4.0);
    }
    CHECK(jackknife_combine(mean, loo) == mean);  // bit-for-bit on exact dyadic inputs
}

TEST_CASE("jackknife demands enough rows and guarded subdesigns") {
    std::mt19937_64 eng = rng::engine(12);
    auto tiny = random_dataset(eng, 3, 2);
    CHECK_THROWS_AS(jackknife_components(tiny, ModelSubset({0, 1})), SingularDesign);

    // one influential row: deleting any other row keeps the design fine, but
    // removing the only informative x value breaks it
    Matrix x(5, 2);
    x.col(0).setOnes();
    x.col(1) << 0, 0, 0, 0, 1;
    auto ds = make_dataset("inf", std::move(x), Vector::Zero(5));
    CHECK(guard_check(ds, ModelSubset({0, 1})).invertible);
    CHECK_THROWS_AS(jackknife_components(ds, ModelSubset({0, 1})), SingularDesign);
}

TEST_CASE("aggregate over one dataset reduces to the plain criterion") {
    std::mt19937_64 eng = rng::engine(13);
    auto ds = random_dataset(eng, 20, 3, "only");
    MultiSampleCollection coll({ds});
    ModelSubset m({0, 1, 2});
    AggregateCriterion agg = aggregate_criterion(coll, m, 15, false);
    CriterionValue single = criterion_c(ds, m, 15);
    CHECK(agg.value == single.value);  // bit-for-bit
    CHECK(agg.j_used == 1);
    CHECK(agg.per_dataset.size() == 1);
}

TEST_CASE("aggregate of identical datasets equals the shared value") {
    std::mt19937_64 eng = rng::engine(14);
    auto a = random_dataset(eng, 20, 3, "a");
    auto b = a;
    b.id = "b";
    MultiSampleCollection coll({a, b});
    AggregateCriterion agg = aggregate_criterion(coll, ModelSubset({0, 1}), 10, false);
    CriterionValue single = criterion_c(a, ModelSubset({0, 1}), 10);
    CHECK(agg.value == doctest::Approx(single.value).epsilon(1e-15));
    CHECK(agg.j_used == 2);
}

TEST_CASE("aggregate is the hand average over three datasets") {
    std::mt19937_64 eng = rng::engine(15);
    std::vector<RegressionDataset> sets;
    for (int j = 0; j < 3; ++j) sets.push_back(random_dataset(eng, 18 + j, 3, "d" + std::to_string(j)));
    MultiSampleCollection coll(sets);
    ModelSubset m({0, 2});
    AggregateCriterion agg = aggregate_criterion(coll, m, 12, false);
    double hand = 0.0;
    for (const auto& ds : sets) hand += criterion_c(ds, m, 12).value;
    hand /= 3.0;
    CHECK(agg.value == doctest::Approx(hand).epsilon(1e-14));
}

TEST_CASE("guard-failing datasets are excluded from the mask and aggregate") {
    std::mt19937_64 eng = rng::engine(16);
    auto good = random_dataset(eng, 20, 3, "good");
    Matrix x(6, 3);
    x.col(0).setOnes();
    x.col(1).setOnes();  // collinear for models containing column 1
    x.col(2) = (Vector(6) << 1, 2, 3, 4, 5, 6).finished();
    auto bad = make_dataset("bad", std::move(x), Vector::Ones(6));
    MultiSampleCollection coll({good, bad});

    ModelSubset with1({0, 1});
    auto mask = coll.usable_mask(with1);
    CHECK(mask.size() == 1);
    AggregateCriterion agg = aggregate_criterion(coll, with1, 10, false);
    CHECK(agg.j_used == 1);

    ModelSubset with2({0, 2});
    CHECK(coll.usable_mask(with2).size() == 2);

    // a model usable nowhere
    Matrix xa = Matrix::Ones(4, 2);
    Matrix xb = Matrix::Ones(5, 2);
    MultiSampleCollection all_bad({make_dataset("a", xa, Vector::Zero(4)),
                                   make_dataset("b", xb, Vector::Zero(5))});
    CHECK_THROWS_AS(aggregate_criterion(all_bad, ModelSubset({0, 1}), 10, false),
                    NoUsableDatasets);
}

TEST_CASE("collections reject duplicate ids and are sorted by id") {
    std::mt19937_64 eng = rng::engine(17);
    auto a = random_dataset(eng, 10, 2, "z");
    auto b = random_dataset(eng, 10, 2, "a");
    MultiSampleCollection coll({a, b});
    CHECK(coll.at(0).id == "a");
    CHECK(coll.at(1).id == "z");
    auto dup = a;
    CHECK_THROWS_AS(MultiSampleCollection({a, dup}), DataError);
}

TEST_CASE("mean corrected and uncorrected criterion differences cross in the expected windows") {
    auto prm = sim::PolyModelParams::benchmark();
    std::vector<ModelSubset> models{sim::nested_subset(sim::NestedModel::x1),
                                    sim::nested_subset(sim::NestedModel::x1_to_x5)};
    auto curves = sim::mean_criterion_curves(prm, models, 40, 400, 555, JackknifePath::downdate);
    auto cross_u = analytic_crossing(curves.uncorrected[0].curve, curves.uncorrected[1].curve);
    auto cross_c = analytic_crossing(curves.corrected[0].curve, curves.corrected[1].curve);
    REQUIRE(cross_u.has_value());
    REQUIRE(cross_c.has_value());
    CHECK(*cross_u > 20.0);
    CHECK(*cross_u < 45.0);
    CHECK(*cross_c > 45.0);
    CHECK(*cross_c < 75.0);
    CHECK(*cross_u < *cross_c);
}
