#ifndef MISCLASS_GLM_HPP
#define MISCLASS_GLM_HPP

#include <Eigen/Dense>

namespace misclass {

// One weighted Bernoulli maximization: maximize
//   sum_i case_weights_i [response_i log mu_i + (1-response_i) log(1-mu_i)],
//   mu_i = logistic(design_i . coef).
// Responses may be soft (posterior weights) or hard labels.
struct WeightedLogitProblem {
    Eigen::MatrixXd design;
    Eigen::ArrayXd response;      // in [0,1]
    Eigen::ArrayXd case_weights;  // >= 0
};

struct LogitSolution {
    Eigen::VectorXd coefficients;
    bool converged = false;
    int iterations = 0;
    double final_gradient_norm = 0.0;
    bool hessian_jittered = false;      // ridge added to a singular Hessian
    bool separation_suspected = false;  // fitted probabilities pinned at the clamp
    bool step_halving_stalled = false;  // no uphill step found
};

double weighted_logit_loglik(const WeightedLogitProblem& problem, const Eigen::VectorXd& coef);

// Newton-Raphson with step halving on the weighted Bernoulli log-likelihood.
// Never throws on separation or a singular Hessian; the solution carries
// diagnostics instead.
LogitSolution fit_weighted_logistic(const WeightedLogitProblem& problem,
                                    const Eigen::VectorXd& init, int max_iter = 100,
                                    double tol = 1e-8);

}  // namespace misclass

#endif
