#pragma once

#include "covsel/criterion.hpp"
#include "covsel/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace covsel {

/// A prediction-error curve of the form value(n) = limit_term + trace_term/n.
struct ArCurve {
    double limit_term = 0.0;  // n-free part
    double trace_term = 0.0;  // coefficient of 1/n

    double value_at(double n) const { return limit_term + trace_term / n; }
};

/// The equivalent number of observations another model needs to match a
/// reference model's prediction error. Infinity is a tagged state, not a
/// sentinel float, and serializes as the literal "inf".
struct GenoValue {
    bool is_infinite = false;
    double value = 0.0;  // meaningful only when !is_infinite
    int n_ref = 0;
    std::optional<ModelSubset> model_p;
    std::optional<ModelSubset> model_q;

    static GenoValue infinity(int n_ref, std::optional<ModelSubset> p = {},
                              std::optional<ModelSubset> q = {});
    static GenoValue finite(double value, int n_ref, std::optional<ModelSubset> p = {},
                            std::optional<ModelSubset> q = {});

    /// this >= other, with infinity >= everything.
    bool at_least(const GenoValue& other) const;

    std::string str() const;  // "inf" or the numeric value
};

/// Number of observations model q needs for curve_q to reach curve_p's
/// value at n:  trace_q / (curve_p(n) - curve_q(n) + trace_q/n), infinite
/// when that denominator is <= 0.
GenoValue geno_from_curves(const ArCurve& curve_p, const ArCurve& curve_q, int n);

/// Estimated form on a collection: the trace numerator is the mask-averaged
/// trace of model q and the denominator difference uses the aggregate
/// criterion values, all restricted to the common usable mask of p and q.
/// With corrected = true both the criterion and the trace numerator are
/// jackknife-corrected.
GenoValue geno_hat(const MultiSampleCollection& collection, const ModelSubset& model_p,
                   const ModelSubset& model_q, int n, bool corrected,
                   const GuardPolicy& policy = {}, JackknifePath path = JackknifePath::refit);

struct GenoMinResult {
    GenoValue value;
    std::vector<ModelSubset> attaining;  // candidates achieving the minimum
};

/// min over candidates r of geno(n; p, r). The candidate list must contain
/// p itself, so the result is at most n.
GenoMinResult geno_min(const MultiSampleCollection& collection, const ModelSubset& model_p,
                       const std::vector<ModelSubset>& candidates, int n, bool corrected,
                       const GuardPolicy& policy = {}, JackknifePath path = JackknifePath::refit);

/// Analytic-mode counterpart of geno_min on known curves.
GenoMinResult geno_min_curves(const std::vector<std::pair<ModelSubset, ArCurve>>& curves,
                              const ModelSubset& model_p, int n);

}  // namespace covsel
