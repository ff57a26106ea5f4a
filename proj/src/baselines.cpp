#include "misclass/baselines.hpp"

#include <limits>

#include "misclass/glm.hpp"
#include "misclass/model.hpp"

namespace misclass {

FitResult fit_naive(const ObservedDataset& data) {
    WeightedLogitProblem prob{data.x(), data.ystar1(), Eigen::ArrayXd::Ones(data.n())};
    const LogitSolution sol =
        fit_weighted_logistic(prob, Eigen::VectorXd::Zero(data.px()), 100, 1e-8);

    FitResult fit;
    fit.method = "naive";
    fit.names = beta_coefficient_names(data.px());
    fit.params.beta = sol.coefficients;

    const Eigen::ArrayXd mu = logistic_clamped((data.x() * sol.coefficients).array());
    const Eigen::MatrixXd info =
        data.x().transpose() * (mu * (1.0 - mu)).matrix().asDiagonal() * data.x();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all()) {
        fit.covariance = ldlt.solve(Eigen::MatrixXd::Identity(data.px(), data.px()));
    } else {
        fit.covariance = Eigen::MatrixXd::Constant(data.px(), data.px(),
                                                   std::numeric_limits<double>::quiet_NaN());
        fit.rank_deficient = true;
    }
    fit.covariance = (0.5 * (fit.covariance + fit.covariance.transpose())).eval();
    fit.std_errors = fit.covariance.diagonal().array().max(0.0).sqrt();
    fit.loglik = weighted_logit_loglik(prob, sol.coefficients);
    fit.converged = sol.converged;
    fit.iterations = sol.iterations;
    return fit;
}

FitResult fit_one_directional_em(const ObservedDataset& data, Restriction direction,
                                 const EmConfig& config) {
    if (direction == Restriction::none)
        throw ValidationError("fit_one_directional_em requires a restricted direction");
    if (!data.identifiable())
        throw ValidationError(
            "dataset has fewer than 7 distinct covariate combinations; the mixture is not "
            "identified");

    ParameterSet init;
    if (config.init == EmConfig::Init::custom) {
        if (!config.start) throw ValidationError("custom EM init requires start parameters");
        init = *config.start;
    } else {
        init = detail::naive_start(data);
    }
    if (direction == Restriction::perfect_specificity)
        init.gamma2.resize(0);
    else
        init.gamma1.resize(0);

    const detail::EmRun run = detail::run_em_loop(data, init, config, direction);
    const CovarianceEstimate cov = estimate_covariance(run.params, data, direction);

    FitResult fit;
    fit.method =
        direction == Restriction::perfect_specificity ? "perfect-spec" : "perfect-sens";
    fit.names = coefficient_names(data.px(), data.pz(), direction);
    fit.params = run.params;
    fit.covariance = cov.cov;
    fit.rank_deficient = cov.rank_deficient;
    fit.std_errors = cov.cov.diagonal().array().max(0.0).sqrt();
    fit.rates = average_rates(run.params, data, direction);
    fit.loglik = run.loglik;
    fit.converged = run.converged;
    fit.iterations = run.iterations;
    fit.loglik_trace = run.trace;
    return fit;
}

}  // namespace misclass
