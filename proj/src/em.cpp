#include "misclass/em.hpp"

#include <cmath>
#include <vector>

#include "misclass/glm.hpp"
#include "misclass/model.hpp"
#include "misclass/rng.hpp"

namespace misclass {

namespace {

constexpr int kInnerMaxIter = 25;
constexpr double kInnerTol = 1e-8;
constexpr double kEmptyComponentFrac = 1e-6;

MStepResult m_step_impl(const PosteriorWeights& weights, const ObservedDataset& data,
                        const ParameterSet& prev, Restriction r) {
    const Eigen::Index n = data.n();
    const Eigen::ArrayXd w1 = weights.w.col(0).array();
    const Eigen::ArrayXd w2 = weights.w.col(1).array();

    MStepResult out;
    out.params = prev;

    // Q_beta: soft responses, unit case weights.
    {
        WeightedLogitProblem prob{data.x(), w1, Eigen::ArrayXd::Ones(n)};
        const LogitSolution sol = fit_weighted_logistic(prob, prev.beta, kInnerMaxIter, kInnerTol);
        out.params.beta = sol.coefficients;
        out.all_converged = out.all_converged && sol.converged;
    }
    // Q_gamma_k1 / Q_gamma_k2: observed class as response, weights w_ij.
    // A component whose weight mass has vanished is held at prev.
    if (r != Restriction::perfect_sensitivity) {
        if (w1.sum() < kEmptyComponentFrac * static_cast<double>(n)) {
            out.gamma1_frozen = true;
        } else {
            WeightedLogitProblem prob{data.z(), data.ystar1(), w1};
            const LogitSolution sol =
                fit_weighted_logistic(prob, prev.gamma1, kInnerMaxIter, kInnerTol);
            out.params.gamma1 = sol.coefficients;
            out.all_converged = out.all_converged && sol.converged;
        }
    }
    if (r != Restriction::perfect_specificity) {
        if (w2.sum() < kEmptyComponentFrac * static_cast<double>(n)) {
            out.gamma2_frozen = true;
        } else {
            WeightedLogitProblem prob{data.z(), data.ystar1(), w2};
            const LogitSolution sol =
                fit_weighted_logistic(prob, prev.gamma2, kInnerMaxIter, kInnerTol);
            out.params.gamma2 = sol.coefficients;
            out.all_converged = out.all_converged && sol.converged;
        }
    }
    return out;
}

double max_param_change(const ParameterSet& a, const ParameterSet& b) {
    double d = (a.beta - b.beta).lpNorm<Eigen::Infinity>();
    if (a.gamma1.size() > 0) d = std::max(d, (a.gamma1 - b.gamma1).lpNorm<Eigen::Infinity>());
    if (a.gamma2.size() > 0) d = std::max(d, (a.gamma2 - b.gamma2).lpNorm<Eigen::Infinity>());
    return d;
}

}  // namespace

PosteriorWeights e_step(const ParameterSet& params, const ObservedDataset& data) {
    return PosteriorWeights{latent_class_weights(compute_probability_grid(params, data), data)};
}

MStepResult m_step(const PosteriorWeights& weights, const ObservedDataset& data,
                   const ParameterSet& prev) {
    return m_step_impl(weights, data, prev, Restriction::none);
}

namespace detail {

EmRun run_em_loop(const ObservedDataset& data, const ParameterSet& init, const EmConfig& config,
                  Restriction r) {
    if (config.loglik_tol <= 0.0 || config.param_tol <= 0.0)
        throw ValidationError("EM tolerances must be positive");

    EmRun run;
    run.params = init;
    ProbabilityGrid grid = compute_probability_grid(run.params, data, r);
    run.loglik = observed_loglik(grid, data);
    run.trace.push_back(run.loglik);

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        run.iterations = iter;
        const PosteriorWeights weights{latent_class_weights(grid, data)};
        const MStepResult ms = m_step_impl(weights, data, run.params, r);
        run.any_inner_issue = run.any_inner_issue || !ms.all_converged || ms.gamma1_frozen ||
                              ms.gamma2_frozen;

        const double dparam = max_param_change(ms.params, run.params);
        grid = compute_probability_grid(ms.params, data, r);
        const double loglik = observed_loglik(grid, data);
        run.trace.push_back(loglik);

        const bool done =
            std::abs(loglik - run.loglik) < config.loglik_tol || dparam < config.param_tol;
        run.params = ms.params;
        run.loglik = loglik;
        if (done) {
            run.converged = true;
            break;
        }
    }
    return run;
}

ParameterSet naive_start(const ObservedDataset& data) {
    WeightedLogitProblem prob{data.x(), data.ystar1(), Eigen::ArrayXd::Ones(data.n())};
    const LogitSolution sol =
        fit_weighted_logistic(prob, Eigen::VectorXd::Zero(data.px()), 100, 1e-8);
    ParameterSet init;
    init.beta = sol.coefficients;
    init.gamma1 = Eigen::VectorXd::Zero(data.pz());
    init.gamma1[0] = logit(0.8);
    init.gamma2 = Eigen::VectorXd::Zero(data.pz());
    init.gamma2[0] = logit(0.2);
    return init;
}

}  // namespace detail

FitResult fit_em(const ObservedDataset& data, const EmConfig& config) {
    if (!data.identifiable())
        throw ValidationError(
            "dataset has fewer than 7 distinct covariate combinations; the mixture is not "
            "identified");

    std::vector<ParameterSet> starts;
    switch (config.init) {
        case EmConfig::Init::naive_start:
            starts.push_back(detail::naive_start(data));
            break;
        case EmConfig::Init::custom:
            if (!config.start) throw ValidationError("custom EM init requires start parameters");
            starts.push_back(*config.start);
            break;
        case EmConfig::Init::random_starts: {
            if (config.n_random_starts < 1)
                throw ValidationError("random_starts needs at least one start");
            const Eigen::Index d = data.px() + 2 * data.pz();
            for (int s = 0; s < config.n_random_starts; ++s) {
                CounterRng rng(config.seed, config.run_id, 0x100u + static_cast<unsigned>(s));
                Eigen::VectorXd theta(d);
                for (Eigen::Index j = 0; j < d; ++j) theta[j] = rng.uniform(-2.0, 2.0);
                starts.push_back(unpack_parameters(theta, data.px(), data.pz()));
            }
            break;
        }
    }

    detail::EmRun best;
    bool have = false;
    for (const ParameterSet& s : starts) {
        detail::EmRun run = detail::run_em_loop(data, s, config, Restriction::none);
        // observed_loglik is invariant under transposition, so the best
        // corrected log-likelihood is the best raw one.
        if (!have || run.loglik > best.loglik) {
            best = std::move(run);
            have = true;
        }
    }

    auto [corrected, report] = correct_label_switching(best.params, data);
    const CovarianceEstimate cov = estimate_covariance(corrected, data, Restriction::none);

    FitResult fit;
    fit.method = "em";
    fit.names = coefficient_names(data.px(), data.pz());
    fit.params = corrected;
    fit.covariance = cov.cov;
    fit.rank_deficient = cov.rank_deficient;
    fit.std_errors = cov.cov.diagonal().array().max(0.0).sqrt();
    fit.rates = average_rates(corrected, data);
    fit.correction = report;
    fit.loglik = observed_loglik(corrected, data);
    fit.converged = best.converged;
    fit.iterations = best.iterations;
    fit.loglik_trace = std::move(best.trace);
    return fit;
}

CovarianceEstimate estimate_covariance(const ParameterSet& params, const ObservedDataset& data,
                                       Restriction r) {
    const Eigen::VectorXd theta = pack_parameters(params, r);
    const Eigen::Index d = theta.size();
    const Eigen::Index px = data.px();
    const Eigen::Index pz = data.pz();

    Eigen::MatrixXd hess(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double h = 1e-5 * (1.0 + std::abs(theta[j]));
        Eigen::VectorXd tp = theta, tm = theta;
        tp[j] += h;
        tm[j] -= h;
        const Eigen::VectorXd gp =
            observed_loglik_gradient(unpack_parameters(tp, px, pz, r), data, r);
        const Eigen::VectorXd gm =
            observed_loglik_gradient(unpack_parameters(tm, px, pz, r), data, r);
        hess.col(j) = (gp - gm) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    const Eigen::MatrixXd info = -hess;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
    const Eigen::VectorXd vals = es.eigenvalues();
    const double cutoff = vals.cwiseAbs().maxCoeff() * 1e-10;

    CovarianceEstimate out;
    out.cov = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        if (vals[j] > cutoff) {
            out.cov.noalias() +=
                es.eigenvectors().col(j) * es.eigenvectors().col(j).transpose() / vals[j];
        } else {
            out.rank_deficient = true;
        }
    }
    return out;
}

}  // namespace misclass
