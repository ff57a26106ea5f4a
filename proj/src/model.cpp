#include "misclass/model.hpp"

#include <cmath>

namespace misclass {

Eigen::ArrayXd logistic_clamped(const Eigen::ArrayXd& eta) {
    Eigen::ArrayXd p = 1.0 / (1.0 + (-eta).exp());
    return p.max(kProbClamp).min(1.0 - kProbClamp);
}

namespace {

void check_block(const char* name, const Eigen::VectorXd& coef, Eigen::Index want) {
    if (coef.size() != want)
        throw DimensionError(name, "coefficient length " + std::to_string(coef.size()) +
                                       " does not match design width " + std::to_string(want));
    if (!coef.allFinite()) throw ValidationError(std::string(name) + " coefficients must be finite");
}

Eigen::MatrixXd two_class(const Eigen::ArrayXd& p1) {
    Eigen::MatrixXd m(p1.size(), 2);
    m.col(0) = p1;
    m.col(1) = 1.0 - p1;
    return m;
}

}  // namespace

ProbabilityGrid compute_probability_grid(const ParameterSet& params, const ObservedDataset& data,
                                         Restriction r) {
    const Eigen::Index n = data.n();
    check_block("beta", params.beta, data.px());

    ProbabilityGrid grid;
    grid.pi = two_class(logistic_clamped((data.x() * params.beta).array()));

    if (r == Restriction::perfect_sensitivity) {
        // P(Y*=2 | Y=1) fixed at zero: class 1 is always observed as 1.
        grid.pistar_given1 = Eigen::MatrixXd(n, 2);
        grid.pistar_given1.col(0).setOnes();
        grid.pistar_given1.col(1).setZero();
    } else {
        check_block("gamma1", params.gamma1, data.pz());
        grid.pistar_given1 = two_class(logistic_clamped((data.z() * params.gamma1).array()));
    }

    if (r == Restriction::perfect_specificity) {
        // P(Y*=1 | Y=2) fixed at zero: class 2 is always observed as 2.
        grid.pistar_given2 = Eigen::MatrixXd(n, 2);
        grid.pistar_given2.col(0).setZero();
        grid.pistar_given2.col(1).setOnes();
    } else {
        check_block("gamma2", params.gamma2, data.pz());
        grid.pistar_given2 = two_class(logistic_clamped((data.z() * params.gamma2).array()));
    }
    return grid;
}

Eigen::MatrixXd observed_probability(const ProbabilityGrid& grid) {
    Eigen::MatrixXd p(grid.pi.rows(), 2);
    for (int k = 0; k < 2; ++k)
        p.col(k) = grid.pistar_given1.col(k).cwiseProduct(grid.pi.col(0)) +
                   grid.pistar_given2.col(k).cwiseProduct(grid.pi.col(1));
    return p;
}

Eigen::MatrixXd observed_probability(const ParameterSet& params, const ObservedDataset& data,
                                     Restriction r) {
    return observed_probability(compute_probability_grid(params, data, r));
}

double observed_loglik(const ProbabilityGrid& grid, const ObservedDataset& data) {
    const Eigen::MatrixXd p = observed_probability(grid);
    const Eigen::ArrayXd& y1 = data.ystar1();
    const Eigen::ArrayXd per_subject =
        y1 * p.col(0).array().log() + (1.0 - y1) * p.col(1).array().log();
    const double ll = per_subject.sum();
    if (!std::isfinite(ll)) {
        for (Eigen::Index i = 0; i < data.n(); ++i)
            if (!std::isfinite(per_subject[i]))
                throw NumericError("observed log-likelihood is non-finite at subject " +
                                   std::to_string(i));
        throw NumericError("observed log-likelihood is non-finite");
    }
    return ll;
}

double observed_loglik(const ParameterSet& params, const ObservedDataset& data, Restriction r) {
    return observed_loglik(compute_probability_grid(params, data, r), data);
}

Eigen::MatrixXd latent_class_weights(const ProbabilityGrid& grid, const ObservedDataset& data) {
    const Eigen::ArrayXd& y1 = data.ystar1();
    // pi*_ikj at the observed class k of each subject
    const Eigen::ArrayXd a1 =
        (y1 * grid.pistar_given1.col(0).array() + (1.0 - y1) * grid.pistar_given1.col(1).array()) *
        grid.pi.col(0).array();
    const Eigen::ArrayXd a2 =
        (y1 * grid.pistar_given2.col(0).array() + (1.0 - y1) * grid.pistar_given2.col(1).array()) *
        grid.pi.col(1).array();
    const Eigen::ArrayXd denom = a1 + a2;
    Eigen::MatrixXd w(data.n(), 2);
    w.col(0) = a1 / denom;
    w.col(1) = a2 / denom;
    return w;
}

Eigen::VectorXd observed_loglik_gradient(const ParameterSet& params, const ObservedDataset& data,
                                         Restriction r) {
    const ProbabilityGrid grid = compute_probability_grid(params, data, r);
    const Eigen::MatrixXd w = latent_class_weights(grid, data);
    const Eigen::ArrayXd& y1 = data.ystar1();

    ParameterSet grad;
    grad.beta = data.x().transpose() * (w.col(0).array() - grid.pi.col(0).array()).matrix();
    if (r != Restriction::perfect_sensitivity)
        grad.gamma1 =
            data.z().transpose() *
            (w.col(0).array() * (y1 - grid.pistar_given1.col(0).array())).matrix();
    if (r != Restriction::perfect_specificity)
        grad.gamma2 =
            data.z().transpose() *
            (w.col(1).array() * (y1 - grid.pistar_given2.col(0).array())).matrix();
    return pack_parameters(grad, r);
}

double complete_loglik(const ParameterSet& params, const ObservedDataset& data,
                       const Eigen::VectorXi& y_true) {
    if (y_true.size() != data.n())
        throw DimensionError("y_true", "length " + std::to_string(y_true.size()) + " for " +
                                           std::to_string(data.n()) + " subjects");
    const ProbabilityGrid grid = compute_probability_grid(params, data);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const int j = y_true[i];
        if (j != 1 && j != 2)
            throw ValidationError("y_true[" + std::to_string(i) + "] must be 1 or 2");
        const int k = data.ystar()[i];
        ll += std::log(grid.pi(i, j - 1));
        ll += std::log(j == 1 ? grid.pistar_given1(i, k - 1) : grid.pistar_given2(i, k - 1));
    }
    if (!std::isfinite(ll)) throw NumericError("complete-data log-likelihood is non-finite");
    return ll;
}

ParameterSet transpose_parameter_set(const ParameterSet& params) {
    return ParameterSet{-params.beta, params.gamma2, params.gamma1};
}

AverageClassificationRates average_rates(const ProbabilityGrid& grid) {
    return AverageClassificationRates{grid.pistar_given1.col(0).mean(),
                                      grid.pistar_given2.col(1).mean()};
}

AverageClassificationRates average_rates(const ParameterSet& params, const ObservedDataset& data,
                                         Restriction r) {
    return average_rates(compute_probability_grid(params, data, r));
}

}  // namespace misclass
