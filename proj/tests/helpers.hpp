// Shared fixtures and test-only oracles. The oracles here deliberately avoid
// the library's computation paths: plain loops and std::exp only.
#ifndef MISCLASS_TESTS_HELPERS_HPP
#define MISCLASS_TESTS_HELPERS_HPP

#include <cmath>
#include <initializer_list>
#include <vector>

#include "misclass/glm.hpp"
#include "misclass/model.hpp"
#include "misclass/rng.hpp"
#include "misclass/sim.hpp"
#include "misclass/types.hpp"

namespace testutil {

inline Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) out[i++] = v;
    return out;
}

inline misclass::ParameterSet params(std::initializer_list<double> beta,
                                     std::initializer_list<double> gamma1,
                                     std::initializer_list<double> gamma2) {
    return misclass::ParameterSet{vec(beta), vec(gamma1), vec(gamma2)};
}

// Small dataset with continuous covariates and an arbitrary outcome split.
inline misclass::ObservedDataset random_dataset(int n, std::uint64_t seed) {
    misclass::CounterRng rng(seed, 0, 77);
    Eigen::MatrixXd x(n, 2), z(n, 2);
    Eigen::VectorXi ystar(n);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = rng.normal();
        z(i, 0) = 1.0;
        z(i, 1) = std::abs(1.0 + rng.normal());
        ystar[i] = rng.bernoulli(0.5) ? 1 : 2;
    }
    return misclass::ObservedDataset(std::move(ystar), std::move(x), std::move(z));
}

inline misclass::ParameterSet random_params(std::uint64_t seed, double range = 2.0) {
    misclass::CounterRng rng(seed, 0, 78);
    misclass::ParameterSet p;
    p.beta = Eigen::Vector2d(rng.uniform(-range, range), rng.uniform(-range, range));
    p.gamma1 = Eigen::Vector2d(rng.uniform(-range, range), rng.uniform(-range, range));
    p.gamma2 = Eigen::Vector2d(rng.uniform(-range, range), rng.uniform(-range, range));
    return p;
}

// Expected complete-data log-likelihood (the M-step objective), evaluated
// directly from its definition.
inline double q_oracle(const misclass::ParameterSet& p, const misclass::ObservedDataset& data,
                       const Eigen::MatrixXd& w) {
    auto sigma = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
    double q = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const double pi1 = sigma(data.x().row(i) * p.beta);
        const double ps11 = sigma(data.z().row(i) * p.gamma1);
        const double ps12 = sigma(data.z().row(i) * p.gamma2);
        const double y1 = data.ystar()[i] == 1 ? 1.0 : 0.0;
        q += w(i, 0) * std::log(pi1) + w(i, 1) * std::log(1.0 - pi1);
        q += w(i, 0) * (y1 * std::log(ps11) + (1.0 - y1) * std::log(1.0 - ps11));
        q += w(i, 1) * (y1 * std::log(ps12) + (1.0 - y1) * std::log(1.0 - ps12));
    }
    return q;
}

inline double weighted_logit_objective(const misclass::WeightedLogitProblem& prob,
                                       const Eigen::Vector2d& coef) {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < prob.design.rows(); ++i) {
        const double mu = 1.0 / (1.0 + std::exp(-(prob.design.row(i) * coef.matrix())(0)));
        const double m = std::min(std::max(mu, 1e-300), 1.0 - 1e-16);
        obj += prob.case_weights[i] *
               (prob.response[i] * std::log(m) + (1.0 - prob.response[i]) * std::log(1.0 - m));
    }
    return obj;
}

// Brute-force maximizer for two-coefficient weighted logistic problems:
// dense grid, repeatedly refined around the incumbent.
inline Eigen::Vector2d grid_logit_oracle(const misclass::WeightedLogitProblem& prob) {
    Eigen::Vector2d center(0.0, 0.0);
    double width = 12.0;
    const int points = 81;
    for (int stage = 0; stage < 9; ++stage) {
        Eigen::Vector2d best = center;
        double best_obj = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < points; ++a) {
            for (int b = 0; b < points; ++b) {
                const Eigen::Vector2d cand(
                    center[0] - width / 2 + width * a / (points - 1),
                    center[1] - width / 2 + width * b / (points - 1));
                const double obj = weighted_logit_objective(prob, cand);
                if (obj > best_obj) {
                    best_obj = obj;
                    best = cand;
                }
            }
        }
        center = best;
        width = 6.0 * width / (points - 1);  // keep +/-3 grid spacings
    }
    return center;
}

// Central finite differences of the observed-data log-likelihood.
inline Eigen::VectorXd fd_gradient(const misclass::ParameterSet& p,
                                   const misclass::ObservedDataset& data, double h = 1e-5,
                                   misclass::Restriction r = misclass::Restriction::none) {
    const Eigen::VectorXd theta = misclass::pack_parameters(p, r);
    Eigen::VectorXd grad(theta.size());
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        Eigen::VectorXd tp = theta, tm = theta;
        tp[j] += h;
        tm[j] -= h;
        grad[j] = (misclass::observed_loglik(
                       misclass::unpack_parameters(tp, data.px(), data.pz(), r), data, r) -
                   misclass::observed_loglik(
                       misclass::unpack_parameters(tm, data.px(), data.pz(), r), data, r)) /
                  (2.0 * h);
    }
    return grad;
}

}  // namespace testutil

#endif
