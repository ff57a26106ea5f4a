#ifndef MISCLASS_MCMC_HPP
#define MISCLASS_MCMC_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "misclass/fit_result.hpp"
#include "misclass/rng.hpp"
#include "misclass/types.hpp"

namespace misclass {

enum class PriorFamily { uniform, normal, double_exponential, student_t };

// Per-coefficient prior hyperparameters. Length-1 vectors broadcast across
// all coefficients; resolve() expands and validates against the stack size.
struct PriorSpec {
    PriorFamily family = PriorFamily::uniform;
    Eigen::VectorXd lower;     // uniform
    Eigen::VectorXd upper;     // uniform
    Eigen::VectorXd location;  // normal / double-exponential / t
    Eigen::VectorXd scale;     // normal / double-exponential / t
    Eigen::VectorXd df;        // t

    static PriorSpec uniform(double lo, double hi);
    static PriorSpec normal(double location, double scale);
    static PriorSpec double_exponential(double location, double scale);
    static PriorSpec student_t(double location, double scale, double df);

    PriorSpec resolve(Eigen::Index d) const;  // broadcast + validate
};

// Sum of per-coefficient log prior densities over the full parameter stack;
// -inf outside a uniform support.
double log_prior(const ParameterSet& params, const PriorSpec& prior);
double log_prior_packed(const Eigen::VectorXd& theta, const PriorSpec& resolved,
                        Eigen::Index offset = 0);

struct McmcConfig {
    int chains = 4;
    int iterations = 8000;
    int burn_in = 3000;
    int thin = 1;
    std::uint64_t seed = 0;
    std::uint64_t run_id = 0;  // stream id; the study harness passes the replicate index
    int adapt_window = 50;     // proposal adaptation batch length (burn-in only)
    int jobs = 0;              // 0: one thread per chain
    std::vector<ParameterSet> chain_inits;  // optional explicit starts
};

struct ChainResult {
    Eigen::MatrixXd draws;  // kept x d, label-corrected
    std::array<double, 3> acceptance{};  // beta, gamma1, gamma2 blocks, post burn-in
    CorrectionReport correction;         // decided at the chain-mean parameters
    std::vector<std::string> warnings;
};

struct PosteriorSample {
    std::vector<std::string> names;
    std::vector<ChainResult> chains;
    Eigen::VectorXd rhat;  // split-Rhat per coefficient
    Eigen::VectorXd ess;   // effective sample size per coefficient
    bool not_converged = false;
    std::vector<std::string> warnings;
    Eigen::Index px = 0;
    Eigen::Index pz = 0;

    Eigen::Index kept_per_chain() const {
        return chains.empty() ? 0 : chains.front().draws.rows();
    }
};

// Metropolis-within-Gibbs with data augmentation: draw the latent class from
// the E-step probabilities, then random-walk updates of the beta, gamma1 and
// gamma2 blocks against their complete-data conditionals plus the prior.
// The label-switching correction runs on each chain separately.
PosteriorSample sample_posterior(const ObservedDataset& data, const PriorSpec& prior,
                                 const McmcConfig& config = {});

// Posterior means / SDs as estimates, rates at the posterior mean.
FitResult summarize_posterior(const PosteriorSample& sample, const ObservedDataset& data);

// One symmetric random-walk Metropolis update; returns whether the proposal
// was accepted. Draws exactly coef.size() normals and one uniform.
template <typename LogTarget>
bool mh_step(Eigen::VectorXd& coef, double& logp, LogTarget&& log_target, double scale,
             CounterRng& rng) {
    Eigen::VectorXd proposal(coef.size());
    for (Eigen::Index j = 0; j < coef.size(); ++j) proposal[j] = coef[j] + scale * rng.normal();
    const double cand = log_target(proposal);
    const double u = rng.uniform_oo();
    if (std::log(u) < cand - logp) {
        coef = proposal;
        logp = cand;
        return true;
    }
    return false;
}

// Convergence diagnostics over (already corrected) per-chain draws.
double split_rhat(const std::vector<Eigen::ArrayXd>& chains);
double effective_sample_size(const std::vector<Eigen::ArrayXd>& chains);

}  // namespace misclass

#endif
