#ifndef MISCLASS_LABEL_SWITCH_HPP
#define MISCLASS_LABEL_SWITCH_HPP

#include <utility>

#include "misclass/types.hpp"

namespace misclass {

struct CorrectionReport {
    bool flipped = false;
    // Neither orientation had both average rates above 0.5; the returned set
    // maximizes sens + spec instead.
    bool ambiguous = false;
    double pre_sens = 0.0;
    double pre_spec = 0.0;
    double post_sens = 0.0;
    double post_spec = 0.0;
};

// Mode selection between the two label-switched parameter sets: keep the
// orientation whose average pi*_11 and pi*_22 both exceed 0.5. Rates of the
// transposed set are recomputed from it, never derived algebraically.
std::pair<ParameterSet, CorrectionReport> correct_label_switching(const ParameterSet& params,
                                                                  const ObservedDataset& data);

}  // namespace misclass

#endif
