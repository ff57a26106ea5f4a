#ifndef MISCLASS_MODEL_HPP
#define MISCLASS_MODEL_HPP

#include <Eigen/Dense>

#include "misclass/types.hpp"

namespace misclass {

// Elementwise logistic with outputs clamped away from {0, 1}.
Eigen::ArrayXd logistic_clamped(const Eigen::ArrayXd& eta);

inline double logistic(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Response probabilities pi_ij and pi*_ikj for every subject.
ProbabilityGrid compute_probability_grid(const ParameterSet& params, const ObservedDataset& data,
                                         Restriction r = Restriction::none);

// P(Y* = k | X, Z): mixture of the observation mechanism over the latent class.
Eigen::MatrixXd observed_probability(const ParameterSet& params, const ObservedDataset& data,
                                     Restriction r = Restriction::none);
Eigen::MatrixXd observed_probability(const ProbabilityGrid& grid);

double observed_loglik(const ParameterSet& params, const ObservedDataset& data,
                       Restriction r = Restriction::none);
double observed_loglik(const ProbabilityGrid& grid, const ObservedDataset& data);

// Analytic score of the observed-data log-likelihood in pack_parameters order.
Eigen::VectorXd observed_loglik_gradient(const ParameterSet& params, const ObservedDataset& data,
                                         Restriction r = Restriction::none);

// Log-likelihood with the latent class treated as known (y_true in {1,2}).
double complete_loglik(const ParameterSet& params, const ObservedDataset& data,
                       const Eigen::VectorXi& y_true);

// The mirrored parameter set: beta negated, gamma blocks swapped. Involutive.
ParameterSet transpose_parameter_set(const ParameterSet& params);

// Posterior class membership P(Y_i = j | Y*_i, X, Z); rows sum to one.
Eigen::MatrixXd latent_class_weights(const ProbabilityGrid& grid, const ObservedDataset& data);

AverageClassificationRates average_rates(const ProbabilityGrid& grid);
AverageClassificationRates average_rates(const ParameterSet& params, const ObservedDataset& data,
                                         Restriction r = Restriction::none);

}  // namespace misclass

#endif
