#pragma once

#include "covsel/types.hpp"

#include <optional>

namespace covsel {

/// Invertibility guard configuration. With a known population Gram matrix
/// (simulation mode) the empirical Gram must keep at least half its smallest
/// eigenvalue; on real data, where that matrix is unobservable, a relative
/// condition test with floor eps_cond is used instead.
struct GuardPolicy {
    std::optional<Matrix> q_reference;  // population E(XX') restricted to the model columns
    double eps_cond = 1e-10;
};

struct GuardStatus {
    bool invertible = false;
    double min_eigenvalue = 0.0;
    bool condition_threshold_passed = false;
};

struct FitResult {
    Vector beta_hat;    // length |p|
    Vector residuals;   // length N
    double rss_over_n = 0.0;  // (1/N) * ||y - X beta_hat||^2
    GuardStatus guard;
};

/// Empirical moment matrices of one fitted (dataset, model) pair:
///   q_hat = (1/N) sum x_i x_i'
///   w_hat = (1/N) sum x_i x_i' e_i^2   (e_i the fitted residuals)
///   v_hat = w_hat q_hat^{-1},  trace_v = tr(v_hat)
struct SandwichMoments {
    Matrix q_hat;
    Matrix w_hat;
    Matrix v_hat;
    double trace_v = 0.0;
};

/// Copy of the model's columns of the design matrix.
Matrix model_columns(const RegressionDataset& dataset, const ModelSubset& model);

/// Guard on an explicit design matrix (used for leave-one-out and
/// train-split designs that are not wrapped in a dataset).
GuardStatus guard_check_matrix(const Matrix& xp, const GuardPolicy& policy = {});

GuardStatus guard_check(const RegressionDataset& dataset, const ModelSubset& model,
                        const GuardPolicy& policy = {});

/// Least squares of y on the model columns, solved by Householder QR.
/// Throws SingularDesign when the guard fails or rows < |p|.
FitResult fit_ols(const RegressionDataset& dataset, const ModelSubset& model,
                  const GuardPolicy& policy = {});

/// Moment matrices for a fit produced by fit_ols on the same pair.
/// q_hat^{-1} is applied by solving |p| linear systems, never by forming an
/// explicit inverse.
SandwichMoments sandwich_moments(const RegressionDataset& dataset, const ModelSubset& model,
                                 const FitResult& fit);

namespace detail {
/// OLS on a raw design (no guard); throws SingularDesign on rank deficiency.
Vector solve_ols(const Matrix& xp, const Vector& y);
/// trace(W Q^{-1}) via an LDLT solve of Q.
double trace_w_qinv(const Matrix& w, const Matrix& q);
/// Guard evaluated on X'X/rows directly (rows must be >= columns).
GuardStatus guard_from_gram(const Matrix& mean_gram, const GuardPolicy& policy);
}  // namespace detail

}  // namespace covsel
