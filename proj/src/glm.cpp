#include "misclass/glm.hpp"

#include <cmath>

#include "misclass/errors.hpp"
#include "misclass/model.hpp"

namespace misclass {

namespace {

void validate_problem(const WeightedLogitProblem& p) {
    const Eigen::Index n = p.design.rows();
    const Eigen::Index d = p.design.cols();
    if (p.response.size() != n)
        throw DimensionError("response", "length " + std::to_string(p.response.size()) + " for " +
                                             std::to_string(n) + " design rows");
    if (p.case_weights.size() != n)
        throw DimensionError("case_weights", "length " + std::to_string(p.case_weights.size()) +
                                                 " for " + std::to_string(n) + " design rows");
    if ((p.response < 0.0).any() || (p.response > 1.0).any())
        throw ValidationError("responses must lie in [0,1]");
    if ((p.case_weights < 0.0).any()) throw ValidationError("case weights must be nonnegative");
    if ((p.case_weights > 0.0).count() < d)
        throw ValidationError("need at least as many positively weighted rows as coefficients");
}

}  // namespace

double weighted_logit_loglik(const WeightedLogitProblem& problem, const Eigen::VectorXd& coef) {
    const Eigen::ArrayXd mu = logistic_clamped((problem.design * coef).array());
    return (problem.case_weights *
            (problem.response * mu.log() + (1.0 - problem.response) * (1.0 - mu).log()))
        .sum();
}

LogitSolution fit_weighted_logistic(const WeightedLogitProblem& problem,
                                    const Eigen::VectorXd& init, int max_iter, double tol) {
    validate_problem(problem);
    const Eigen::Index d = problem.design.cols();
    if (init.size() != d)
        throw DimensionError("init", "length " + std::to_string(init.size()) +
                                         " for design width " + std::to_string(d));

    LogitSolution sol;
    sol.coefficients = init;
    double obj = weighted_logit_loglik(problem, sol.coefficients);

    Eigen::ArrayXd mu(problem.design.rows());
    for (int iter = 1; iter <= max_iter; ++iter) {
        sol.iterations = iter;
        const Eigen::ArrayXd eta = (problem.design * sol.coefficients).array();
        mu = 1.0 / (1.0 + (-eta).exp());
        const Eigen::VectorXd grad =
            problem.design.transpose() * (problem.case_weights * (problem.response - mu)).matrix();
        sol.final_gradient_norm = grad.lpNorm<Eigen::Infinity>();
        if (sol.final_gradient_norm < tol) {
            sol.converged = true;
            break;
        }

        Eigen::MatrixXd hess = problem.design.transpose() *
                               (problem.case_weights * mu * (1.0 - mu)).matrix().asDiagonal() *
                               problem.design;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
        Eigen::VectorXd step = ldlt.solve(grad);
        if (ldlt.info() != Eigen::Success || !step.allFinite() ||
            !(ldlt.vectorD().array() > 0.0).all()) {
            hess.diagonal().array() += 1e-8;
            sol.hessian_jittered = true;
            step = hess.ldlt().solve(grad);
            if (!step.allFinite()) {
                sol.step_halving_stalled = true;
                break;
            }
        }

        double t = 1.0;
        bool moved = false;
        for (int half = 0; half <= 10; ++half) {
            const Eigen::VectorXd cand = sol.coefficients + t * step;
            const double cand_obj = weighted_logit_loglik(problem, cand);
            if (cand_obj >= obj) {
                sol.coefficients = cand;
                obj = cand_obj;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) {
            sol.step_halving_stalled = true;
            break;
        }
    }

    // Fitted probabilities pinned at the clamp among weighted rows mean the
    // maximizer sits on (or beyond) the representable boundary.
    const double lp_bound = 0.98 * std::log((1.0 - kProbClamp) / kProbClamp);
    const Eigen::ArrayXd eta = (problem.design * sol.coefficients).array();
    sol.separation_suspected =
        ((problem.case_weights > 1e-12) && (eta.abs() >= lp_bound)).any();
    if (!sol.converged) {
        const Eigen::ArrayXd mu_final = 1.0 / (1.0 + (-eta).exp());
        sol.final_gradient_norm =
            (problem.design.transpose() *
             (problem.case_weights * (problem.response - mu_final)).matrix())
                .lpNorm<Eigen::Infinity>();
        sol.converged = sol.final_gradient_norm < tol;
    }
    return sol;
}

}  // namespace misclass
