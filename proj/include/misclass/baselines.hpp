#ifndef MISCLASS_BASELINES_HPP
#define MISCLASS_BASELINES_HPP

#include "misclass/em.hpp"
#include "misclass/fit_result.hpp"

namespace misclass {

enum class BaselineKind { naive, perfect_specificity_em, perfect_sensitivity_em };

// Ordinary logistic regression of Y* on X, ignoring misclassification.
FitResult fit_naive(const ObservedDataset& data);

// EM with one misclassification direction structurally absent:
//   perfect_specificity fixes P(Y*=1 | Y=2) = 0 and estimates gamma1 only;
//   perfect_sensitivity fixes P(Y*=2 | Y=1) = 0 and estimates gamma2 only.
// With a single latent category in the complete-data likelihood there is no
// label switching to correct.
FitResult fit_one_directional_em(const ObservedDataset& data, Restriction direction,
                                 const EmConfig& config = {});

}  // namespace misclass

#endif
