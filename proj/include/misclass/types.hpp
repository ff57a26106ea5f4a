#ifndef MISCLASS_TYPES_HPP
#define MISCLASS_TYPES_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "misclass/errors.hpp"

namespace misclass {

// Logistic outputs are clamped into [kProbClamp, 1 - kProbClamp] before any
// log() so that likelihoods stay finite at extreme linear predictors.
inline constexpr double kProbClamp = 1e-12;

// Restrictions on the observation mechanism used by the one-directional
// comparator estimators. The restricted direction is represented by exact
// 0/1 probabilities, bypassing the clamp.
enum class Restriction { none, perfect_specificity, perfect_sensitivity };

// Observed sample: outcome class ystar in {1,2}, design matrices with an
// explicit leading intercept column.
class ObservedDataset {
public:
    ObservedDataset(Eigen::VectorXi ystar, Eigen::MatrixXd x, Eigen::MatrixXd z);

    Eigen::Index n() const { return ystar_.size(); }
    Eigen::Index px() const { return x_.cols(); }
    Eigen::Index pz() const { return z_.cols(); }

    const Eigen::VectorXi& ystar() const { return ystar_; }
    const Eigen::MatrixXd& x() const { return x_; }
    const Eigen::MatrixXd& z() const { return z_; }
    // indicator I(Y*_i = 1) as doubles
    const Eigen::ArrayXd& ystar1() const { return ystar1_; }

    // Two-component logistic mixtures are identified with >= 7 distinct
    // covariate combinations; checked by the fitting entry points.
    bool identifiable() const;

private:
    Eigen::VectorXi ystar_;
    Eigen::MatrixXd x_;
    Eigen::MatrixXd z_;
    Eigen::ArrayXd ystar1_;
};

// Coefficients for the non-reference class (class 2 coefficients are fixed
// at zero and never stored). gamma1 models P(Y*=1 | Y=1, Z), gamma2 models
// P(Y*=1 | Y=2, Z). A gamma block may be empty when an estimator does not
// model that direction.
struct ParameterSet {
    Eigen::VectorXd beta;
    Eigen::VectorXd gamma1;
    Eigen::VectorXd gamma2;
};

// Per-subject response probabilities; columns are classes {1,2}.
struct ProbabilityGrid {
    Eigen::MatrixXd pi;             // P(Y_i = j | X)
    Eigen::MatrixXd pistar_given1;  // P(Y*_i = k | Y_i = 1, Z)
    Eigen::MatrixXd pistar_given2;  // P(Y*_i = k | Y_i = 2, Z)
};

// Subject-averaged correct-classification probabilities.
struct AverageClassificationRates {
    double sens = 0.0;  // mean pi*_i11
    double spec = 0.0;  // mean pi*_i22
};

// Stacking order of the free coefficients: beta, gamma1, gamma2 (restricted
// blocks omitted).
Eigen::VectorXd pack_parameters(const ParameterSet& params, Restriction r = Restriction::none);
ParameterSet unpack_parameters(const Eigen::VectorXd& theta, Eigen::Index px, Eigen::Index pz,
                               Restriction r = Restriction::none);
std::vector<std::string> coefficient_names(Eigen::Index px, Eigen::Index pz,
                                           Restriction r = Restriction::none);
std::vector<std::string> beta_coefficient_names(Eigen::Index px);

}  // namespace misclass

#endif
