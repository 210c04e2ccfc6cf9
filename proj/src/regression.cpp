#include "covsel/regression.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace covsel {

namespace {

GuardStatus guard_impl(const Matrix& mean_gram, const GuardPolicy& policy,
                       bool structurally_singular) {
    GuardStatus status;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(mean_gram, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    const double max_eig = eig.eigenvalues().maxCoeff();
    status.min_eigenvalue = min_eig;
    if (structurally_singular) return status;

    if (policy.q_reference.has_value()) {
        Eigen::SelfAdjointEigenSolver<Matrix> ref(*policy.q_reference, Eigen::EigenvaluesOnly);
        status.condition_threshold_passed = min_eig >= 0.5 * ref.eigenvalues().minCoeff();
    } else {
        status.condition_threshold_passed = max_eig > 0.0 && min_eig >= policy.eps_cond * max_eig;
    }
    status.invertible = status.condition_threshold_passed && min_eig > 0.0;
    return status;
}

void check_model_indices(const RegressionDataset& dataset, const ModelSubset& model) {
    if (model.indices().back() >= dataset.cols()) {
        throw std::invalid_argument("model column " + std::to_string(model.indices().back()) +
                                    " out of range for dataset '" + dataset.id + "' with " +
                                    std::to_string(dataset.cols()) + " columns");
    }
}

}  // namespace

Matrix model_columns(const RegressionDataset& dataset, const ModelSubset& model) {
    check_model_indices(dataset, model);
    Matrix xp(dataset.rows(), model.size());
    for (int j = 0; j < model.size(); ++j) {
        xp.col(j) = dataset.X.col(model.indices()[static_cast<std::size_t>(j)]);
    }
    return xp;
}

GuardStatus guard_check_matrix(const Matrix& xp, const GuardPolicy& policy) {
    const bool degenerate = xp.rows() < xp.cols() || xp.rows() < 1 || xp.cols() < 1;
    Matrix mean_gram = (xp.transpose() * xp) / static_cast<double>(std::max<Eigen::Index>(1, xp.rows()));
    return guard_impl(mean_gram, policy, degenerate);
}

GuardStatus guard_check(const RegressionDataset& dataset, const ModelSubset& model,
                        const GuardPolicy& policy) {
    return guard_check_matrix(model_columns(dataset, model), policy);
}

FitResult fit_ols(const RegressionDataset& dataset, const ModelSubset& model,
                  const GuardPolicy& policy) {
    Matrix xp = model_columns(dataset, model);
    GuardStatus guard = guard_check_matrix(xp, policy);
    if (xp.rows() < xp.cols()) {
        throw SingularDesign("dataset '" + dataset.id + "': " + std::to_string(xp.rows()) +
                             " rows for a " + std::to_string(xp.cols()) + "-column model");
    }
    if (!guard.invertible) {
        throw SingularDesign("dataset '" + dataset.id + "', model " + model.label() +
                             ": design fails the invertibility guard (min eigenvalue " +
                             std::to_string(guard.min_eigenvalue) + ")");
    }
    FitResult fit;
    fit.beta_hat = detail::solve_ols(xp, dataset.y);
    fit.residuals = dataset.y - xp * fit.beta_hat;
    fit.rss_over_n = fit.residuals.squaredNorm() / static_cast<double>(xp.rows());
    fit.guard = guard;
    return fit;
}

SandwichMoments sandwich_moments(const RegressionDataset& dataset, const ModelSubset& model,
                                 const FitResult& fit) {
    Matrix xp = model_columns(dataset, model);
    const double n = static_cast<double>(xp.rows());
    SandwichMoments mom;
    mom.q_hat = (xp.transpose() * xp) / n;
    Vector e2 = fit.residuals.array().square();
    mom.w_hat = (xp.transpose() * e2.asDiagonal() * xp) / n;

    Eigen::LDLT<Matrix> ldlt(mom.q_hat);
    if (ldlt.info() != Eigen::Success) {
        throw SingularDesign("dataset '" + dataset.id + "', model " + model.label() +
                             ": empirical Gram matrix is not invertible");
    }
    // w q^{-1} = (q^{-1} w)' for symmetric q, w
    mom.v_hat = ldlt.solve(mom.w_hat).transpose();
    mom.trace_v = mom.v_hat.trace();
    return mom;
}

namespace detail {

Vector solve_ols(const Matrix& xp, const Vector& y) {
    Eigen::ColPivHouseholderQR<Matrix> qr(xp);
    if (qr.rank() < xp.cols()) {
        throw SingularDesign("rank-deficient design (" + std::to_string(qr.rank()) + " < " +
                             std::to_string(xp.cols()) + ")");
    }
    return qr.solve(y);
}

double trace_w_qinv(const Matrix& w, const Matrix& q) {
    Eigen::LDLT<Matrix> ldlt(q);
    if (ldlt.info() != Eigen::Success) {
        throw SingularDesign("Gram matrix is not invertible");
    }
    return ldlt.solve(w).trace();  // tr(q^{-1} w) = tr(w q^{-1})
}

GuardStatus guard_from_gram(const Matrix& mean_gram, const GuardPolicy& policy) {
    return guard_impl(mean_gram, policy, /*structurally_singular=*/false);
}

}  // namespace detail

}  // namespace covsel
