#ifndef MISCLASS_FIT_RESULT_HPP
#define MISCLASS_FIT_RESULT_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "misclass/label_switch.hpp"
#include "misclass/types.hpp"

namespace misclass {

struct McmcDiagnostics {
    Eigen::VectorXd rhat;              // split-Rhat per coefficient
    Eigen::VectorXd ess;               // effective sample size per coefficient
    Eigen::VectorXd posterior_median;  // per coefficient, pooled
    std::vector<std::array<double, 3>> acceptance;  // per chain: beta, gamma1, gamma2
    std::vector<CorrectionReport> chain_corrections;
    std::vector<std::string> warnings;
    int kept_draws = 0;  // total across chains
};

// Common result shape for EM, MCMC, and the comparator estimators. Gamma
// blocks an estimator does not model stay empty and serialize as null.
struct FitResult {
    std::string method;
    std::vector<std::string> names;  // coefficient names, pack order
    ParameterSet params;
    Eigen::MatrixXd covariance;  // over `names`
    Eigen::VectorXd std_errors;
    std::optional<AverageClassificationRates> rates;
    std::optional<CorrectionReport> correction;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    bool rank_deficient = false;
    std::vector<double> loglik_trace;  // EM ascent path; empty elsewhere
    std::optional<McmcDiagnostics> mcmc;

    // Estimates in `names` order; absent gamma blocks contribute nothing.
    Eigen::VectorXd packed() const { return pack_parameters(params, Restriction::none); }
};

}  // namespace misclass

#endif
