#ifndef MISCLASS_SIM_HPP
#define MISCLASS_SIM_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "misclass/em.hpp"
#include "misclass/mcmc.hpp"
#include "misclass/types.hpp"

namespace misclass {

enum class Method { em, mcmc, naive, perfect_spec, perfect_sens };

std::string method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

// One simulation setting. The named presets use the generating mechanisms
// where each intercept/slope pair defines the *logit* of the corresponding
// probability:
//   logit P(Y=1|X)        = 1 - 2 X
//   logit P(Y*=1|Y=1,Z)   = 0.5 + Z
//   logit P(Y*=1|Y=2,Z)   = -0.5 - Z   (settings 1, 2)   /  -5 - 5 Z  (setting 3)
struct ScenarioConfig {
    std::string name = "custom";
    int n_realizations = 500;
    int n = 1000;
    double x_mean = 0.0;
    double z_mean = 1.5;
    double covariance = 0.30;  // Cov(X, Z) before Z is folded to |Z|
    Eigen::VectorXd beta_true;
    Eigen::VectorXd gamma1_true;
    Eigen::VectorXd gamma2_true;
    std::vector<Method> estimators{Method::em};
    PriorSpec prior = PriorSpec::uniform(-10.0, 10.0);
    std::uint64_t seed = 0;
    EmConfig em;
    McmcConfig mcmc;

    static ScenarioConfig setting(int which);  // benchmark presets 1, 2 or 3
    void validate() const;

    Eigen::VectorXd truth_for(Method m) const;
    std::vector<std::string> names_for(Method m) const;
};

struct GeneratedDataset {
    ObservedDataset data;
    Eigen::VectorXi y_true;
    double realized_p1 = 0.0;    // share with Y = 1
    double realized_sens = 0.0;  // P(Y*=1 | Y=1) in the draw
    double realized_spec = 0.0;  // P(Y*=2 | Y=2) in the draw
};

// Deterministic in (scenario.seed, replicate_index) regardless of call order.
GeneratedDataset generate_dataset(const ScenarioConfig& scenario, int replicate_index);

struct EstimateRecord {
    bool ok = false;
    std::string failure;
    bool converged = false;
    bool flipped = false;
    bool ambiguous = false;
    std::vector<std::string> names;
    Eigen::VectorXd estimates;
    Eigen::VectorXd std_errors;
    double est_p1 = std::numeric_limits<double>::quiet_NaN();
    double est_sens = std::numeric_limits<double>::quiet_NaN();
    double est_spec = std::numeric_limits<double>::quiet_NaN();
};

struct ReplicateResult {
    int replicate = 0;
    double data_p1 = 0.0;
    double data_sens = 0.0;
    double data_spec = 0.0;
    std::vector<EstimateRecord> records;  // aligned with scenario.estimators
};

struct CellStat {
    std::string name;
    double truth = 0.0;
    double bias = 0.0;
    double rmse = 0.0;
    int n_used = 0;
};

struct MethodSummary {
    Method method = Method::em;
    std::vector<CellStat> cells;
    double mean_p1, mean_p2, mean_sens, mean_spec;  // NaN where undefined
    int n_failed = 0;
    int n_ambiguous = 0;
    int n_nonconverged = 0;
};

struct StudyReport {
    ScenarioConfig scenario;
    std::vector<ReplicateResult> replicates;
    std::vector<MethodSummary> summaries;
    double data_mean_p1 = 0.0;
    double data_mean_sens = 0.0;
    double data_mean_spec = 0.0;
};

// Generate + fit every requested estimator on every replicate; failures are
// tagged and excluded from the aggregates. jobs <= 0 uses the hardware count.
StudyReport run_study(const ScenarioConfig& scenario, int jobs = 0);

// Fit one estimator the way the study harness does.
FitResult fit_method(Method m, const ObservedDataset& data, const ScenarioConfig& scenario,
                     int replicate_index);

CellStat aggregate_cell(const std::string& name, const std::vector<double>& estimates,
                        double truth);

}  // namespace misclass

#endif
