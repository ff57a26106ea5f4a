#ifndef MISCLASS_EM_HPP
#define MISCLASS_EM_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "misclass/fit_result.hpp"
#include "misclass/types.hpp"

namespace misclass {

struct EmConfig {
    int max_iter = 1500;
    double loglik_tol = 1e-7;  // on |change in observed log-likelihood|
    double param_tol = 1e-6;   // on the max-norm coefficient change

    enum class Init { naive_start, random_starts, custom };
    Init init = Init::naive_start;
    int n_random_starts = 10;            // for Init::random_starts
    std::optional<ParameterSet> start;   // for Init::custom
    std::uint64_t seed = 0;
    std::uint64_t run_id = 0;  // stream id; the study harness passes the replicate index
};

// E-step weights w_ij = P(Y_i = j | Y*_i, X, Z); rows sum to one.
struct PosteriorWeights {
    Eigen::MatrixXd w;  // n x 2
};

PosteriorWeights e_step(const ParameterSet& params, const ObservedDataset& data);

struct MStepResult {
    ParameterSet params;
    bool all_converged = true;
    bool gamma1_frozen = false;  // component weight vanished; block held at prev
    bool gamma2_frozen = false;
};

// Three weighted logistic maximizations (soft-response fit for beta, weighted
// hard-response fits for the gamma blocks), warm-started at prev.
MStepResult m_step(const PosteriorWeights& weights, const ObservedDataset& data,
                   const ParameterSet& prev);

FitResult fit_em(const ObservedDataset& data, const EmConfig& config = {});

struct CovarianceEstimate {
    Eigen::MatrixXd cov;
    bool rank_deficient = false;
};

namespace detail {

// Shared E/M driver; the one-directional comparators pass a restriction.
struct EmRun {
    ParameterSet params;
    double loglik = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> trace;
    bool any_inner_issue = false;
};

EmRun run_em_loop(const ObservedDataset& data, const ParameterSet& init, const EmConfig& config,
                  Restriction r);

// Default initialization: beta from the naive logistic fit, gamma intercepts
// at logit(0.8) and logit(0.2).
ParameterSet naive_start(const ObservedDataset& data);

}  // namespace detail

// Observed-information covariance: central finite differences of the analytic
// score, negated and inverted (pseudo-inverse on rank deficiency).
CovarianceEstimate estimate_covariance(const ParameterSet& params, const ObservedDataset& data,
                                       Restriction r = Restriction::none);

}  // namespace misclass

#endif
