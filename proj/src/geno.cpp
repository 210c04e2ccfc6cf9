#include "covsel/geno.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace covsel {

namespace {

std::vector<std::size_t> intersect_sorted(const std::vector<std::size_t>& a,
                                          const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Root in m of curve_q evaluated at m equalling `target_p` (the reference
/// model's value at n). Infinite when no finite m reaches the target.
GenoValue geno_solve(double target_p, double value_q_at_n, double trace_q, int n,
                     std::optional<ModelSubset> p, std::optional<ModelSubset> q) {
    const double denom = target_p - value_q_at_n + trace_q / n;
    if (!(denom > 0.0)) return GenoValue::infinity(n, std::move(p), std::move(q));
    const double numer = trace_q > 0.0 ? trace_q : 0.0;
    return GenoValue::finite(numer / denom, n, std::move(p), std::move(q));
}

bool geno_less(const GenoValue& a, const GenoValue& b) {
    if (a.is_infinite) return false;
    if (b.is_infinite) return true;
    return a.value < b.value;
}

bool geno_equal(const GenoValue& a, const GenoValue& b) {
    if (a.is_infinite || b.is_infinite) return a.is_infinite == b.is_infinite;
    return a.value == b.value;
}

}  // namespace

GenoValue GenoValue::infinity(int n_ref, std::optional<ModelSubset> p,
                              std::optional<ModelSubset> q) {
    GenoValue v;
    v.is_infinite = true;
    v.n_ref = n_ref;
    v.model_p = std::move(p);
    v.model_q = std::move(q);
    return v;
}

GenoValue GenoValue::finite(double value, int n_ref, std::optional<ModelSubset> p,
                            std::optional<ModelSubset> q) {
    GenoValue v;
    v.value = value;
    v.n_ref = n_ref;
    v.model_p = std::move(p);
    v.model_q = std::move(q);
    return v;
}

bool GenoValue::at_least(const GenoValue& other) const {
    if (is_infinite) return true;
    if (other.is_infinite) return false;
    return value >= other.value;
}

std::string GenoValue::str() const {
    if (is_infinite) return "inf";
    std::ostringstream os;
    os.precision(12);
    os << value;
    return os.str();
}

GenoValue geno_from_curves(const ArCurve& curve_p, const ArCurve& curve_q, int n) {
    if (n < 1) throw std::invalid_argument("geno: n must be positive");
    if (curve_p.limit_term == curve_q.limit_term && curve_p.trace_term == curve_q.trace_term) {
        return GenoValue::finite(static_cast<double>(n), n);  // self comparison
    }
    return geno_solve(curve_p.value_at(n), curve_q.value_at(n), curve_q.trace_term, n, {}, {});
}

GenoValue geno_hat(const MultiSampleCollection& collection, const ModelSubset& model_p,
                   const ModelSubset& model_q, int n, bool corrected, const GuardPolicy& policy,
                   JackknifePath path) {
    if (n < 1) throw std::invalid_argument("geno: n must be positive");
    std::vector<std::size_t> common =
        intersect_sorted(collection.usable_mask(model_p, policy),
                         collection.usable_mask(model_q, policy));
    if (common.empty()) {
        throw NoUsableDatasets("models " + model_p.label() + " and " + model_q.label() +
                               ": no commonly usable dataset");
    }
    if (model_p == model_q) {
        return GenoValue::finite(static_cast<double>(n), n, model_p, model_q);
    }

    ModelEvaluation ev_p = evaluate_model_on_mask(collection, model_p, common, corrected, policy, path);
    ModelEvaluation ev_q = evaluate_model_on_mask(collection, model_q, common, corrected, policy, path);
    std::vector<std::size_t> used = intersect_sorted(ev_p.used, ev_q.used);
    if (used.empty()) {
        throw NoUsableDatasets("models " + model_p.label() + " and " + model_q.label() +
                               ": every common dataset was dropped by the jackknife guard");
    }

    auto restrict = [&used](const ModelEvaluation& ev) {
        ModelEvaluation out = ev;
        out.used.clear();
        out.components.clear();
        for (std::size_t i = 0; i < ev.used.size(); ++i) {
            if (std::binary_search(used.begin(), used.end(), ev.used[i])) {
                out.used.push_back(ev.used[i]);
                out.components.push_back(ev.components[i]);
            }
        }
        return out;
    };
    ModelEvaluation rp = restrict(ev_p);
    ModelEvaluation rq = restrict(ev_q);

    return geno_solve(rp.mean_value_at(n), rq.mean_value_at(n), rq.mean_trace(), n, model_p,
                      model_q);
}

namespace {

GenoMinResult geno_min_impl(const ModelSubset& model_p,
                            const std::vector<ModelSubset>& candidates,
                            const std::function<GenoValue(const ModelSubset&)>& eval) {
    if (std::find(candidates.begin(), candidates.end(), model_p) == candidates.end()) {
        throw std::invalid_argument("geno_min: candidate list must contain the reference model");
    }
    GenoMinResult result;
    bool first = true;
    for (const ModelSubset& r : candidates) {
        GenoValue g = eval(r);
        if (first || geno_less(g, result.value)) {
            result.value = g;
            result.attaining.clear();
            result.attaining.push_back(r);
            first = false;
        } else if (geno_equal(g, result.value)) {
            result.attaining.push_back(r);
        }
    }
    return result;
}

}  // namespace

GenoMinResult geno_min(const MultiSampleCollection& collection, const ModelSubset& model_p,
                       const std::vector<ModelSubset>& candidates, int n, bool corrected,
                       const GuardPolicy& policy, JackknifePath path) {
    return geno_min_impl(model_p, candidates, [&](const ModelSubset& r) {
        return geno_hat(collection, model_p, r, n, corrected, policy, path);
    });
}

GenoMinResult geno_min_curves(const std::vector<std::pair<ModelSubset, ArCurve>>& curves,
                              const ModelSubset& model_p, int n) {
    auto it = std::find_if(curves.begin(), curves.end(),
                           [&](const auto& c) { return c.first == model_p; });
    if (it == curves.end()) {
        throw std::invalid_argument("geno_min: no curve for the reference model");
    }
    const ArCurve& curve_p = it->second;
    std::vector<ModelSubset> candidates;
    for (const auto& [model, curve] : curves) candidates.push_back(model);
    return geno_min_impl(model_p, candidates, [&](const ModelSubset& r) {
        const ArCurve& curve_r =
            std::find_if(curves.begin(), curves.end(), [&](const auto& c) { return c.first == r; })
                ->second;
        GenoValue g = geno_from_curves(curve_p, curve_r, n);
        g.model_p = model_p;
        g.model_q = r;
        return g;
    });
}

}  // namespace covsel
