#include "misclass/label_switch.hpp"

#include "misclass/model.hpp"

namespace misclass {

std::pair<ParameterSet, CorrectionReport> correct_label_switching(const ParameterSet& params,
                                                                  const ObservedDataset& data) {
    CorrectionReport report;
    const AverageClassificationRates current = average_rates(params, data);
    report.pre_sens = current.sens;
    report.pre_spec = current.spec;

    if (current.sens > 0.5 && current.spec > 0.5) {
        report.post_sens = current.sens;
        report.post_spec = current.spec;
        return {params, report};
    }

    const ParameterSet flipped = transpose_parameter_set(params);
    const AverageClassificationRates alt = average_rates(flipped, data);
    if (alt.sens > 0.5 && alt.spec > 0.5) {
        report.flipped = true;
        report.post_sens = alt.sens;
        report.post_spec = alt.spec;
        return {flipped, report};
    }

    report.ambiguous = true;
    if (alt.sens + alt.spec > current.sens + current.spec) {
        report.flipped = true;
        report.post_sens = alt.sens;
        report.post_spec = alt.spec;
        return {flipped, report};
    }
    report.post_sens = current.sens;
    report.post_spec = current.spec;
    return {params, report};
}

}  // namespace misclass
