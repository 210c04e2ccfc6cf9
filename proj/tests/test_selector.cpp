#include "covsel/selector.hpp"

#include "covsel/rng.hpp"
#include "covsel/simulation.hpp"
#include "test_helpers.hpp"

#include "doctest.h"

using namespace covsel;
using covsel::test::make_dataset;
using covsel::test::random_dataset;

namespace {

std::vector<std::pair<ModelSubset, ArCurve>> benchmark_curves() {
    auto prm = sim::PolyModelParams::benchmark();
    std::vector<std::pair<ModelSubset, ArCurve>> curves;
    for (auto which : {sim::NestedModel::x1, sim::NestedModel::x1_to_x5, sim::NestedModel::full}) {
        curves.emplace_back(sim::nested_subset(which), sim::ar_curve(prm, which));
    }
    return curves;
}

}  // namespace

TEST_CASE("explicit candidate lists keep their order and reject duplicates") {
    ModelSubset a({0, 1});
    ModelSubset b({0, 2});
    auto models = enumerate_candidates(CandidateSet::explicit_list({b, a}));
    CHECK(models[0] == b);
    CHECK(models[1] == a);
    CHECK_THROWS_AS(enumerate_candidates(CandidateSet::explicit_list({a, a})),
                    std::invalid_argument);
}

TEST_CASE("subset enumeration is ordered by cardinality then lexicographically") {
    auto four = enumerate_candidates(CandidateSet::subsets({0}, {1, 2}));
    REQUIRE(four.size() == 4);
    CHECK(four[0] == ModelSubset({0}));
    CHECK(four[1] == ModelSubset({0, 1}));
    CHECK(four[2] == ModelSubset({0, 2}));
    CHECK(four[3] == ModelSubset({0, 1, 2}));

    // forced-in {0,1}, free {2,3} over five columns (4 excluded entirely)
    auto constrained = enumerate_candidates(CandidateSet::subsets({0, 1}, {2, 3}));
    REQUIRE(constrained.size() == 4);
    CHECK(constrained[0] == ModelSubset({0, 1}));
    CHECK(constrained[1] == ModelSubset({0, 1, 2}));
    CHECK(constrained[2] == ModelSubset({0, 1, 3}));
    CHECK(constrained[3] == ModelSubset({0, 1, 2, 3}));
}

TEST_CASE("subset enumeration caps the free-column count") {
    std::vector<int> free;
    for (int j = 1; j <= 21; ++j) free.push_back(j);
    CHECK_THROWS_AS(enumerate_candidates(CandidateSet::subsets({0}, free)), TooManySubsets);
}

TEST_CASE("single candidate is chosen without ties") {
    std::mt19937_64 eng = rng::engine(71);
    MultiSampleCollection coll({random_dataset(eng, 20, 3, "a")});
    CandidateSet cands = CandidateSet::explicit_list({ModelSubset({0, 1})});
    SelectionResult res = select(coll, cands, 10, false);
    CHECK(res.chosen == ModelSubset({0, 1}));
    CHECK_FALSE(res.ties_broken);
    CHECK(res.values.size() == 1);
}

TEST_CASE("exact value ties break towards the smaller then earlier model") {
    // duplicated covariate columns make the two two-column models identical
    std::mt19937_64 eng = rng::engine(72);
    auto ds = random_dataset(eng, 25, 3, "a");
    ds.X.col(2) = ds.X.col(1);
    MultiSampleCollection coll({ds});
    CandidateSet cands =
        CandidateSet::explicit_list({ModelSubset({0, 2}), ModelSubset({0, 1})});
    SelectionResult res = select(coll, cands, 12, false);
    CHECK(res.chosen == ModelSubset({0, 1}));  // lexicographic among equal-size ties
    CHECK(res.ties_broken);

    // identical curves: parsimony wins
    ArCurve flat{2.0, 1.0};
    AnalyticSelection an = analytic_argmin({{ModelSubset({0, 1, 2}), flat},
                                            {ModelSubset({0, 1}), flat}}, 10.0);
    CHECK(an.chosen == ModelSubset({0, 1}));
    CHECK(an.ties_broken);
}

TEST_CASE("analytic argmin on the benchmark curves") {
    auto curves = benchmark_curves();
    // n = 40: 132 + 8.4 = 140.4 beats 123 + 20.25 = 143.25
    AnalyticSelection at40 = analytic_argmin(curves, 40.0);
    CHECK(at40.chosen == sim::nested_subset(sim::NestedModel::x1));
    CHECK(at40.values[0].second == doctest::Approx(140.4));
    CHECK(at40.values[1].second == doctest::Approx(143.25));
    // n = 200: 118 + 6.85 = 124.85 beats 123 + 4.05 = 127.05
    AnalyticSelection at200 = analytic_argmin(curves, 200.0);
    CHECK(at200.chosen == sim::nested_subset(sim::NestedModel::full));
    CHECK(at200.values[2].second == doctest::Approx(124.85));
    CHECK(at200.values[1].second == doctest::Approx(127.05));
    // grid 40 / 80 / 120 chooses the three models in turn
    CHECK(analytic_argmin(curves, 80.0).chosen == sim::nested_subset(sim::NestedModel::x1_to_x5));
    CHECK(analytic_argmin(curves, 120.0).chosen == sim::nested_subset(sim::NestedModel::full));
}

TEST_CASE("analytic crossings sit at the algebraic roots") {
    auto curves = benchmark_curves();
    auto c12 = analytic_crossing(curves[0].second, curves[1].second);
    auto c23 = analytic_crossing(curves[1].second, curves[2].second);
    REQUIRE(c12.has_value());
    REQUIRE(c23.has_value());
    CHECK(*c12 == doctest::Approx(474.0 / 9.0).epsilon(1e-12));
    CHECK(*c23 == doctest::Approx(112.0).epsilon(1e-12));
    CHECK_FALSE(analytic_crossing(curves[0].second, curves[0].second).has_value());
}

TEST_CASE("chosen complexity is nondecreasing along the benchmark curves") {
    auto curves = benchmark_curves();
    int last_size = 0;
    for (int n = 10; n <= 500; n += 5) {
        AnalyticSelection sel = analytic_argmin(curves, n);
        CHECK(sel.chosen.size() >= last_size);
        last_size = sel.chosen.size();
    }
    CHECK(last_size == 11);
}

TEST_CASE("equal-limit curves never select the larger trace for any n") {
    ModelSubset small({0, 1});
    ModelSubset large({0, 1, 2});
    std::vector<std::pair<ModelSubset, ArCurve>> curves{{large, ArCurve{5.0, 9.0}},
                                                        {small, ArCurve{5.0, 4.0}}};
    for (int n = 1; n <= 300; n += 7) {
        CHECK(analytic_argmin(curves, n).chosen == small);
    }
}

TEST_CASE("selection over data: determinism and curve/select coherence") {
    std::mt19937_64 eng = rng::engine(73);
    std::vector<RegressionDataset> sets;
    for (int j = 0; j < 4; ++j) sets.push_back(random_dataset(eng, 30, 4, "d" + std::to_string(j)));
    MultiSampleCollection coll(sets);
    CandidateSet cands = CandidateSet::explicit_list(
        {ModelSubset({0, 1}), ModelSubset({0, 1, 2}), ModelSubset({0, 1, 2, 3})});

    SelectionResult a = select(coll, cands, 50, true);
    SelectionResult b = select(coll, cands, 50, true);
    CHECK(a.chosen == b.chosen);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        CHECK(a.values[i].second.value == b.values[i].second.value);  // bit-for-bit
    }

    auto curve = selection_curve(coll, cands, {50}, true);
    REQUIRE(curve.size() == 1);
    CHECK(curve[0].chosen == a.chosen);
    CHECK(curve[0].values[0].second.value == a.values[0].second.value);

    CHECK_THROWS_AS(selection_curve(coll, cands, {}, false), std::invalid_argument);
    CHECK_THROWS_AS(selection_curve(coll, cands, {10, 10}, false), std::invalid_argument);
}

TEST_CASE("per-model masks are surfaced and strict mode intersects them") {
    std::mt19937_64 eng = rng::engine(74);
    auto good = random_dataset(eng, 25, 3, "a-good");
    auto degenerate = random_dataset(eng, 25, 3, "b-degenerate");
    degenerate.X.col(2).setOnes();  // column 2 collinear with the intercept here
    MultiSampleCollection coll({good, degenerate});
    CandidateSet cands = CandidateSet::explicit_list({ModelSubset({0, 1}), ModelSubset({0, 2})});

    SelectionResult loose = select(coll, cands, 15, false);
    CHECK(loose.mask_mismatch);
    CHECK(loose.values[0].second.j_used == 2);
    CHECK(loose.values[1].second.j_used == 1);

    SelectionResult strict = select(coll, cands, 15, false, {}, /*strict_mask=*/true);
    CHECK_FALSE(strict.mask_mismatch);
    CHECK(strict.values[0].second.j_used == 1);
    CHECK(strict.values[1].second.j_used == 1);
}
