#include "misclass/mcmc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "misclass/label_switch.hpp"
#include "misclass/model.hpp"

namespace misclass {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTargetAcceptance = 0.35;

Eigen::VectorXd broadcast(const Eigen::VectorXd& v, Eigen::Index d, const char* what) {
    if (v.size() == d) return v;
    if (v.size() == 1) return Eigen::VectorXd::Constant(d, v[0]);
    throw ValidationError(std::string("prior ") + what + " must have length 1 or " +
                          std::to_string(d) + ", got " + std::to_string(v.size()));
}

// log(1 + exp(x)), elementwise and overflow-safe
Eigen::ArrayXd log1p_exp(const Eigen::ArrayXd& x) {
    return x.max(0.0) + (1.0 + (-x.abs()).exp()).log();
}

}  // namespace

PriorSpec PriorSpec::uniform(double lo, double hi) {
    PriorSpec p;
    p.family = PriorFamily::uniform;
    p.lower = Eigen::VectorXd::Constant(1, lo);
    p.upper = Eigen::VectorXd::Constant(1, hi);
    return p;
}

PriorSpec PriorSpec::normal(double location, double scale) {
    PriorSpec p;
    p.family = PriorFamily::normal;
    p.location = Eigen::VectorXd::Constant(1, location);
    p.scale = Eigen::VectorXd::Constant(1, scale);
    return p;
}

PriorSpec PriorSpec::double_exponential(double location, double scale) {
    PriorSpec p = normal(location, scale);
    p.family = PriorFamily::double_exponential;
    return p;
}

PriorSpec PriorSpec::student_t(double location, double scale, double df) {
    PriorSpec p = normal(location, scale);
    p.family = PriorFamily::student_t;
    p.df = Eigen::VectorXd::Constant(1, df);
    return p;
}

PriorSpec PriorSpec::resolve(Eigen::Index d) const {
    PriorSpec r = *this;
    switch (family) {
        case PriorFamily::uniform:
            r.lower = broadcast(lower, d, "lower");
            r.upper = broadcast(upper, d, "upper");
            if (((r.upper - r.lower).array() <= 0.0).any())
                throw ValidationError("uniform prior requires lower < upper");
            break;
        case PriorFamily::student_t:
            r.df = broadcast(df, d, "df");
            if ((r.df.array() <= 0.0).any()) throw ValidationError("t prior requires df > 0");
            [[fallthrough]];
        case PriorFamily::normal:
        case PriorFamily::double_exponential:
            r.location = broadcast(location, d, "location");
            r.scale = broadcast(scale, d, "scale");
            if ((r.scale.array() <= 0.0).any())
                throw ValidationError("prior scale must be positive");
            break;
    }
    return r;
}

double log_prior_packed(const Eigen::VectorXd& theta, const PriorSpec& prior,
                        Eigen::Index offset) {
    double lp = 0.0;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
        const Eigen::Index g = offset + j;
        const double v = theta[j];
        switch (prior.family) {
            case PriorFamily::uniform: {
                if (v < prior.lower[g] || v > prior.upper[g]) return kNegInf;
                lp -= std::log(prior.upper[g] - prior.lower[g]);
                break;
            }
            case PriorFamily::normal: {
                const double z = (v - prior.location[g]) / prior.scale[g];
                lp += -0.5 * std::log(2.0 * std::numbers::pi) - std::log(prior.scale[g]) -
                      0.5 * z * z;
                break;
            }
            case PriorFamily::double_exponential: {
                const double z = (v - prior.location[g]) / prior.scale[g];
                lp += -std::log(2.0 * prior.scale[g]) - std::abs(z);
                break;
            }
            case PriorFamily::student_t: {
                const double nu = prior.df[g];
                const double z = (v - prior.location[g]) / prior.scale[g];
                lp += std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                      0.5 * std::log(nu * std::numbers::pi) - std::log(prior.scale[g]) -
                      0.5 * (nu + 1.0) * std::log1p(z * z / nu);
                break;
            }
        }
    }
    return lp;
}

double log_prior(const ParameterSet& params, const PriorSpec& prior) {
    const Eigen::VectorXd theta = pack_parameters(params);
    return log_prior_packed(theta, prior.resolve(theta.size()));
}

namespace {

// Cached per-block linear predictor state. sigma = exp(eta - lse).
struct BlockState {
    Eigen::VectorXd coef;
    Eigen::ArrayXd eta;
    Eigen::ArrayXd lse;  // log(1 + exp(eta))
};

void refresh(BlockState& b, const Eigen::MatrixXd& design) {
    b.eta = (design * b.coef).array();
    b.lse = log1p_exp(b.eta);
}

struct ChainTask {
    const ObservedDataset* data;
    const PriorSpec* prior;  // resolved over the full stack
    const McmcConfig* config;
    int chain_index;
};

ChainResult run_chain(const ChainTask& task) {
    const ObservedDataset& data = *task.data;
    const McmcConfig& cfg = *task.config;
    const PriorSpec& prior = *task.prior;
    const Eigen::Index n = data.n();
    const Eigen::Index px = data.px();
    const Eigen::Index pz = data.pz();
    const Eigen::Index d = px + 2 * pz;
    const Eigen::ArrayXd& y1 = data.ystar1();

    // Stream ids 0x200+ keep chains disjoint from the data-generation and
    // EM-start streams under a shared (seed, run_id).
    CounterRng rng(cfg.seed, cfg.run_id, 0x200u + static_cast<std::uint64_t>(task.chain_index));

    // Starting point: supplied inits, else diffuse draws inside the support.
    ParameterSet start;
    if (!cfg.chain_inits.empty()) {
        start = cfg.chain_inits[static_cast<std::size_t>(task.chain_index) %
                                cfg.chain_inits.size()];
    } else {
        Eigen::VectorXd theta(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            double lo = -2.0, hi = 2.0;
            if (prior.family == PriorFamily::uniform) {
                const double margin = 1e-3 * (prior.upper[j] - prior.lower[j]);
                lo = std::max(lo, prior.lower[j] + margin);
                hi = std::min(hi, prior.upper[j] - margin);
                if (lo >= hi) {
                    lo = prior.lower[j] + margin;
                    hi = prior.upper[j] - margin;
                }
            }
            theta[j] = rng.uniform(lo, hi);
        }
        start = unpack_parameters(theta, px, pz);
    }

    BlockState beta{start.beta, {}, {}};
    BlockState gamma1{start.gamma1, {}, {}};
    BlockState gamma2{start.gamma2, {}, {}};
    refresh(beta, data.x());
    refresh(gamma1, data.z());
    refresh(gamma2, data.z());

    const Eigen::Index offsets[3] = {0, px, px + pz};
    double scales[3] = {0.5, 0.5, 0.5};
    int window_accepts[3] = {0, 0, 0};
    int window_count = 0;
    int window_index = 0;
    long post_accepts[3] = {0, 0, 0};

    const Eigen::Index kept_rows = (cfg.iterations - cfg.burn_in) / cfg.thin;
    Eigen::MatrixXd draws(kept_rows, d);
    Eigen::Index kept = 0;

    Eigen::ArrayXd ylat1(n);
    for (int iter = 1; iter <= cfg.iterations; ++iter) {
        // (a) latent outcome from the posterior class probabilities (E-step form)
        {
            const Eigen::ArrayXd sx = (beta.eta - beta.lse).exp();    // pi_i1
            const Eigen::ArrayXd s1 = (gamma1.eta - gamma1.lse).exp();  // pi*_i11
            const Eigen::ArrayXd s2 = (gamma2.eta - gamma2.lse).exp();  // pi*_i12
            const Eigen::ArrayXd a1 = (y1 * s1 + (1.0 - y1) * (1.0 - s1)) * sx;
            const Eigen::ArrayXd a2 = (y1 * s2 + (1.0 - y1) * (1.0 - s2)) * (1.0 - sx);
            const Eigen::ArrayXd w1 = a1 / (a1 + a2);
            for (Eigen::Index i = 0; i < n; ++i) ylat1[i] = rng.uniform() < w1[i] ? 1.0 : 0.0;
        }

        // (b)-(d) block random-walk updates against complete-data conditionals
        const Eigen::ArrayXd ylat2 = 1.0 - ylat1;
        BlockState* blocks[3] = {&beta, &gamma1, &gamma2};
        const Eigen::MatrixXd* designs[3] = {&data.x(), &data.z(), &data.z()};
        // block log-likelihoods: sum_i mask_i [resp_i eta_i - lse_i]
        const Eigen::ArrayXd* masks[3] = {nullptr, &ylat1, &ylat2};
        const Eigen::ArrayXd* resps[3] = {&ylat1, &y1, &y1};

        for (int b = 0; b < 3; ++b) {
            BlockState& blk = *blocks[b];
            const Eigen::MatrixXd& design = *designs[b];
            const Eigen::ArrayXd& resp = *resps[b];

            double cur;
            if (masks[b] == nullptr)
                cur = (resp * blk.eta - blk.lse).sum();
            else
                cur = (*masks[b] * (resp * blk.eta - blk.lse)).sum();
            cur += log_prior_packed(blk.coef, prior, offsets[b]);

            Eigen::VectorXd proposal(blk.coef.size());
            for (Eigen::Index j = 0; j < proposal.size(); ++j)
                proposal[j] = blk.coef[j] + scales[b] * rng.normal();
            const double u = rng.uniform_oo();

            double cand = log_prior_packed(proposal, prior, offsets[b]);
            Eigen::ArrayXd cand_eta, cand_lse;
            if (std::isfinite(cand)) {
                cand_eta = (design * proposal).array();
                cand_lse = log1p_exp(cand_eta);
                if (masks[b] == nullptr)
                    cand += (resp * cand_eta - cand_lse).sum();
                else
                    cand += (*masks[b] * (resp * cand_eta - cand_lse)).sum();
            }

            const bool accept = std::isfinite(cand) && std::log(u) < cand - cur;
            if (accept) {
                blk.coef = proposal;
                blk.eta = std::move(cand_eta);
                blk.lse = std::move(cand_lse);
            }
            if (iter <= cfg.burn_in) {
                if (accept) ++window_accepts[b];
            } else if (accept) {
                ++post_accepts[b];
            }
        }

        // proposal adaptation toward the target acceptance rate, burn-in only
        if (iter <= cfg.burn_in && ++window_count == cfg.adapt_window) {
            ++window_index;
            const double gain = 1.0 / std::sqrt(static_cast<double>(window_index));
            for (int b = 0; b < 3; ++b) {
                const double rate =
                    static_cast<double>(window_accepts[b]) / static_cast<double>(cfg.adapt_window);
                scales[b] = std::clamp(scales[b] * std::exp(gain * (rate - kTargetAcceptance)),
                                       1e-3, 10.0);
                window_accepts[b] = 0;
            }
            window_count = 0;
        }

        if (iter > cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0 && kept < kept_rows) {
            draws.row(kept).segment(0, px) = beta.coef;
            draws.row(kept).segment(px, pz) = gamma1.coef;
            draws.row(kept).segment(px + pz, pz) = gamma2.coef;
            ++kept;
        }
    }

    ChainResult result;
    result.draws = draws.topRows(kept);

    const double denom = static_cast<double>(cfg.iterations - cfg.burn_in);
    for (int b = 0; b < 3; ++b) {
        result.acceptance[static_cast<std::size_t>(b)] =
            static_cast<double>(post_accepts[b]) / denom;
        const double rate = result.acceptance[static_cast<std::size_t>(b)];
        if (rate < 0.05 || rate > 0.7) {
            static const char* kBlockNames[3] = {"beta", "gamma1", "gamma2"};
            result.warnings.push_back("chain " + std::to_string(task.chain_index) + " " +
                                      kBlockNames[b] + " acceptance rate " +
                                      std::to_string(rate) + " outside [0.05, 0.7]");
        }
    }

    // Per-chain label-switching correction, decided at the chain mean and
    // applied to every draw of the chain.
    const Eigen::VectorXd mean = result.draws.colwise().mean();
    const ParameterSet mean_params = unpack_parameters(mean, px, pz);
    auto [corrected, report] = correct_label_switching(mean_params, data);
    (void)corrected;
    if (report.flipped) {
        result.draws.leftCols(px) *= -1.0;
        const Eigen::MatrixXd g1 = result.draws.middleCols(px, pz);
        result.draws.middleCols(px, pz) = result.draws.middleCols(px + pz, pz);
        result.draws.middleCols(px + pz, pz) = g1;
    }
    result.correction = report;
    return result;
}

}  // namespace

PosteriorSample sample_posterior(const ObservedDataset& data, const PriorSpec& prior,
                                 const McmcConfig& config) {
    if (config.chains < 1) throw ValidationError("need at least one chain");
    if (config.burn_in < 0 || config.burn_in >= config.iterations)
        throw ValidationError("burn_in must satisfy 0 <= burn_in < iterations");
    if (config.thin < 1) throw ValidationError("thin must be >= 1");
    if (config.adapt_window < 1) throw ValidationError("adapt_window must be >= 1");
    if (!data.identifiable())
        throw ValidationError(
            "dataset has fewer than 7 distinct covariate combinations; the mixture is not "
            "identified");
    for (const ParameterSet& p : config.chain_inits) {
        if (p.beta.size() != data.px() || p.gamma1.size() != data.pz() ||
            p.gamma2.size() != data.pz())
            throw DimensionError("chain_inits", "init block sizes do not match the dataset");
    }

    const Eigen::Index d = data.px() + 2 * data.pz();
    const PriorSpec resolved = prior.resolve(d);

    PosteriorSample sample;
    sample.px = data.px();
    sample.pz = data.pz();
    sample.names = coefficient_names(data.px(), data.pz());
    sample.chains.resize(static_cast<std::size_t>(config.chains));

    // Each chain owns stream (seed, run_id, chain); results are deterministic
    // for any worker count.
    const int workers = std::max(1, config.jobs > 0 ? std::min(config.jobs, config.chains)
                                                    : config.chains);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int c = next.fetch_add(1);
            if (c >= config.chains) return;
            sample.chains[static_cast<std::size_t>(c)] =
                run_chain(ChainTask{&data, &resolved, &config, c});
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    sample.rhat.resize(d);
    sample.ess.resize(d);
    std::vector<Eigen::ArrayXd> per_chain(static_cast<std::size_t>(config.chains));
    for (Eigen::Index j = 0; j < d; ++j) {
        for (std::size_t c = 0; c < sample.chains.size(); ++c)
            per_chain[c] = sample.chains[c].draws.col(j).array();
        sample.rhat[j] = split_rhat(per_chain);
        sample.ess[j] = effective_sample_size(per_chain);
    }
    sample.not_converged = (sample.rhat.array() > 1.1).any();
    for (const ChainResult& c : sample.chains)
        sample.warnings.insert(sample.warnings.end(), c.warnings.begin(), c.warnings.end());
    if (sample.not_converged) sample.warnings.push_back("split-Rhat above 1.1; not converged");
    return sample;
}

FitResult summarize_posterior(const PosteriorSample& sample, const ObservedDataset& data) {
    if (sample.chains.empty() || sample.kept_per_chain() == 0)
        throw ValidationError("posterior sample is empty");
    const Eigen::Index d = static_cast<Eigen::Index>(sample.names.size());
    const Eigen::Index per = sample.kept_per_chain();
    const Eigen::Index total = per * static_cast<Eigen::Index>(sample.chains.size());

    Eigen::MatrixXd pooled(total, d);
    for (std::size_t c = 0; c < sample.chains.size(); ++c)
        pooled.middleRows(static_cast<Eigen::Index>(c) * per, per) = sample.chains[c].draws;

    const Eigen::VectorXd mean = pooled.colwise().mean();
    const Eigen::MatrixXd centered = pooled.rowwise() - mean.transpose();
    Eigen::MatrixXd cov;
    if (total > 1)
        cov = centered.transpose() * centered / static_cast<double>(total - 1);
    else
        cov = Eigen::MatrixXd::Zero(d, d);

    Eigen::VectorXd medians(d);
    std::vector<double> scratch(static_cast<std::size_t>(total));
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < total; ++i) scratch[static_cast<std::size_t>(i)] = pooled(i, j);
        const auto mid = scratch.begin() + total / 2;
        std::nth_element(scratch.begin(), mid, scratch.end());
        if (total % 2 == 1) {
            medians[j] = *mid;
        } else {
            const double hi = *mid;
            medians[j] = (hi + *std::max_element(scratch.begin(), mid)) / 2.0;
        }
    }

    FitResult fit;
    fit.method = "mcmc";
    fit.names = sample.names;
    fit.params = unpack_parameters(mean, sample.px, sample.pz);
    fit.covariance = cov;
    fit.std_errors = cov.diagonal().array().max(0.0).sqrt();
    fit.rates = average_rates(fit.params, data);
    // Chains are already individually corrected; this records the pooled-mean check.
    fit.correction = correct_label_switching(fit.params, data).second;
    fit.loglik = observed_loglik(fit.params, data);
    fit.converged = !sample.not_converged;
    fit.iterations = static_cast<int>(total);

    McmcDiagnostics diag;
    diag.rhat = sample.rhat;
    diag.ess = sample.ess;
    diag.posterior_median = medians;
    diag.kept_draws = static_cast<int>(total);
    for (const ChainResult& c : sample.chains) {
        diag.acceptance.push_back(c.acceptance);
        diag.chain_corrections.push_back(c.correction);
    }
    diag.warnings = sample.warnings;
    fit.mcmc = std::move(diag);
    return fit;
}

double split_rhat(const std::vector<Eigen::ArrayXd>& chains) {
    std::vector<Eigen::ArrayXd> halves;
    for (const Eigen::ArrayXd& c : chains) {
        const Eigen::Index nh = c.size() / 2;
        if (nh < 2) return 1.0;
        halves.push_back(c.head(nh));
        halves.push_back(c.tail(nh));
    }
    const double m = static_cast<double>(halves.size());
    const double nh = static_cast<double>(halves.front().size());

    double w = 0.0;
    Eigen::ArrayXd means(halves.size());
    for (std::size_t s = 0; s < halves.size(); ++s) {
        means[static_cast<Eigen::Index>(s)] = halves[s].mean();
        w += (halves[s] - halves[s].mean()).square().sum() / (nh - 1.0);
    }
    w /= m;
    const double grand = means.mean();
    const double var_means = (means - grand).square().sum() / (m - 1.0);
    if (w <= 0.0) return 1.0;
    const double var_plus = (nh - 1.0) / nh * w + var_means;
    return std::max(1.0, std::sqrt(var_plus / w));
}

double effective_sample_size(const std::vector<Eigen::ArrayXd>& chains) {
    std::vector<Eigen::ArrayXd> halves;
    for (const Eigen::ArrayXd& c : chains) {
        const Eigen::Index nh = c.size() / 2;
        if (nh < 4) return static_cast<double>(c.size() * chains.size());
        halves.push_back(c.head(nh));
        halves.push_back(c.tail(nh));
    }
    const double m = static_cast<double>(halves.size());
    const Eigen::Index nh = halves.front().size();
    const double total = m * static_cast<double>(nh);

    double w = 0.0;
    Eigen::ArrayXd means(halves.size());
    for (std::size_t s = 0; s < halves.size(); ++s) {
        means[static_cast<Eigen::Index>(s)] = halves[s].mean();
        w += (halves[s] - halves[s].mean()).square().sum() / (static_cast<double>(nh) - 1.0);
    }
    w /= m;
    if (w <= 0.0) return total;
    const double var_means = halves.size() > 1
                                 ? (means - means.mean()).square().sum() / (m - 1.0)
                                 : 0.0;
    const double var_plus =
        (static_cast<double>(nh) - 1.0) / static_cast<double>(nh) * w + var_means;

    // variogram estimate of the autocorrelation, Geyer initial-monotone sum
    auto rho = [&](Eigen::Index t) {
        double vt = 0.0;
        for (const Eigen::ArrayXd& h : halves)
            vt += (h.tail(nh - t) - h.head(nh - t)).square().sum() /
                  static_cast<double>(nh - t);
        vt /= m;
        return 1.0 - vt / (2.0 * var_plus);
    };

    double prev_pair = std::numeric_limits<double>::infinity();
    double sum_pairs = 0.0;
    for (Eigen::Index t = 0; t + 1 < nh; t += 2) {
        const double r0 = (t == 0) ? 1.0 : rho(t);
        const double r1 = rho(t + 1);
        double pair = r0 + r1;
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair);
        prev_pair = pair;
        sum_pairs += pair;
    }
    const double tau = std::max(2.0 * sum_pairs - 1.0, 1.0 / (2.0 * total));
    return std::min(total / tau, total);
}

}  // namespace misclass
