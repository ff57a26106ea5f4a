#include "misclass/sim.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "misclass/baselines.hpp"
#include "misclass/model.hpp"
#include "misclass/rng.hpp"

namespace misclass {

namespace {

constexpr std::uint64_t kStreamCovariates = 0;
constexpr std::uint64_t kStreamOutcome = 1;
constexpr std::uint64_t kStreamObserved = 2;

double nan_mean(const std::vector<double>& values) {
    double sum = 0.0;
    int count = 0;
    for (double v : values)
        if (std::isfinite(v)) {
            sum += v;
            ++count;
        }
    return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::em: return "em";
        case Method::mcmc: return "mcmc";
        case Method::naive: return "naive";
        case Method::perfect_spec: return "perfect-spec";
        case Method::perfect_sens: return "perfect-sens";
    }
    return "?";
}

std::optional<Method> method_from_name(const std::string& name) {
    for (Method m : {Method::em, Method::mcmc, Method::naive, Method::perfect_spec,
                     Method::perfect_sens})
        if (method_name(m) == name) return m;
    return std::nullopt;
}

ScenarioConfig ScenarioConfig::setting(int which) {
    ScenarioConfig s;
    s.name = "setting" + std::to_string(which);
    s.beta_true = Eigen::Vector2d(1.0, -2.0);
    s.gamma1_true = Eigen::Vector2d(0.5, 1.0);
    s.estimators = {Method::em, Method::mcmc, Method::naive, Method::perfect_spec,
                    Method::perfect_sens};
    switch (which) {
        case 1:
            s.n = 1000;
            s.z_mean = 1.5;
            s.gamma2_true = Eigen::Vector2d(-0.5, -1.0);
            break;
        case 2:
            s.n = 10000;
            s.z_mean = 2.5;
            s.gamma2_true = Eigen::Vector2d(-0.5, -1.0);
            break;
        case 3:
            s.n = 5000;
            s.z_mean = 1.5;
            s.gamma2_true = Eigen::Vector2d(-5.0, -5.0);
            break;
        default:
            throw ValidationError("unknown setting " + std::to_string(which) +
                                  "; expected 1, 2 or 3");
    }
    return s;
}

void ScenarioConfig::validate() const {
    if (n <= 0) throw ValidationError("scenario field n must be positive");
    if (n_realizations <= 0)
        throw ValidationError("scenario field n_realizations must be positive");
    if (std::abs(covariance) >= 1.0)
        throw ValidationError("scenario field covariance must lie in (-1, 1)");
    if (beta_true.size() < 1 || gamma1_true.size() < 1 || gamma2_true.size() < 1)
        throw ValidationError("true coefficient vectors must include an intercept");
    if (beta_true.size() != 2 || gamma1_true.size() != 2 || gamma2_true.size() != 2)
        throw ValidationError(
            "the generator draws one x and one z covariate; true coefficient vectors must "
            "have length 2");
    if (estimators.empty()) throw ValidationError("scenario requests no estimators");
}

Eigen::VectorXd ScenarioConfig::truth_for(Method m) const {
    ParameterSet truth{beta_true, gamma1_true, gamma2_true};
    switch (m) {
        case Method::em:
        case Method::mcmc: return pack_parameters(truth);
        case Method::naive: return beta_true;
        case Method::perfect_spec:
            return pack_parameters(truth, Restriction::perfect_specificity);
        case Method::perfect_sens:
            return pack_parameters(truth, Restriction::perfect_sensitivity);
    }
    return {};
}

std::vector<std::string> ScenarioConfig::names_for(Method m) const {
    const Eigen::Index px = beta_true.size();
    const Eigen::Index pz = gamma1_true.size();
    switch (m) {
        case Method::em:
        case Method::mcmc: return coefficient_names(px, pz);
        case Method::naive: return beta_coefficient_names(px);
        case Method::perfect_spec:
            return coefficient_names(px, pz, Restriction::perfect_specificity);
        case Method::perfect_sens:
            return coefficient_names(px, pz, Restriction::perfect_sensitivity);
    }
    return {};
}

GeneratedDataset generate_dataset(const ScenarioConfig& scenario, int replicate_index) {
    scenario.validate();
    const int n = scenario.n;
    const std::uint64_t rep = static_cast<std::uint64_t>(replicate_index);

    CounterRng rng_cov(scenario.seed, rep, kStreamCovariates);
    CounterRng rng_y(scenario.seed, rep, kStreamOutcome);
    CounterRng rng_obs(scenario.seed, rep, kStreamObserved);

    Eigen::MatrixXd x(n, 2), z(n, 2);
    x.col(0).setOnes();
    z.col(0).setOnes();
    const double slope = scenario.covariance;
    const double resid = std::sqrt(1.0 - slope * slope);
    for (int i = 0; i < n; ++i) {
        const double u1 = rng_cov.normal();
        const double u2 = rng_cov.normal();
        x(i, 1) = scenario.x_mean + u1;
        z(i, 1) = std::abs(scenario.z_mean + slope * u1 + resid * u2);
    }

    Eigen::VectorXi y_true(n), ystar(n);
    const Eigen::ArrayXd eta_y = (x * scenario.beta_true).array();
    for (int i = 0; i < n; ++i)
        y_true[i] = rng_y.uniform() < logistic(eta_y[i]) ? 1 : 2;
    const Eigen::ArrayXd eta_s1 = (z * scenario.gamma1_true).array();
    const Eigen::ArrayXd eta_s2 = (z * scenario.gamma2_true).array();
    for (int i = 0; i < n; ++i) {
        const double p = logistic(y_true[i] == 1 ? eta_s1[i] : eta_s2[i]);
        ystar[i] = rng_obs.uniform() < p ? 1 : 2;
    }

    GeneratedDataset g{ObservedDataset(std::move(ystar), std::move(x), std::move(z)),
                       std::move(y_true)};
    long n1 = 0, n11 = 0, n22 = 0;
    for (int i = 0; i < n; ++i) {
        const bool is1 = g.y_true[i] == 1;
        n1 += is1;
        if (is1 && g.data.ystar()[i] == 1) ++n11;
        if (!is1 && g.data.ystar()[i] == 2) ++n22;
    }
    g.realized_p1 = static_cast<double>(n1) / n;
    g.realized_sens = n1 > 0 ? static_cast<double>(n11) / static_cast<double>(n1)
                             : std::numeric_limits<double>::quiet_NaN();
    g.realized_spec = n1 < n ? static_cast<double>(n22) / static_cast<double>(n - n1)
                             : std::numeric_limits<double>::quiet_NaN();
    return g;
}

FitResult fit_method(Method m, const ObservedDataset& data, const ScenarioConfig& scenario,
                     int replicate_index) {
    switch (m) {
        case Method::em: {
            EmConfig cfg = scenario.em;
            cfg.seed = scenario.seed;
            cfg.run_id = static_cast<std::uint64_t>(replicate_index);
            return fit_em(data, cfg);
        }
        case Method::mcmc: {
            McmcConfig cfg = scenario.mcmc;
            cfg.seed = scenario.seed;
            cfg.run_id = static_cast<std::uint64_t>(replicate_index);
            return summarize_posterior(sample_posterior(data, scenario.prior, cfg), data);
        }
        case Method::naive: return fit_naive(data);
        case Method::perfect_spec: {
            EmConfig cfg = scenario.em;
            cfg.seed = scenario.seed;
            cfg.run_id = static_cast<std::uint64_t>(replicate_index);
            return fit_one_directional_em(data, Restriction::perfect_specificity, cfg);
        }
        case Method::perfect_sens: {
            EmConfig cfg = scenario.em;
            cfg.seed = scenario.seed;
            cfg.run_id = static_cast<std::uint64_t>(replicate_index);
            return fit_one_directional_em(data, Restriction::perfect_sensitivity, cfg);
        }
    }
    throw ValidationError("unknown estimator");
}

namespace {

EstimateRecord make_record(const FitResult& fit, const ObservedDataset& data) {
    EstimateRecord rec;
    rec.ok = true;
    rec.converged = fit.converged;
    if (fit.correction) {
        rec.flipped = fit.correction->flipped;
        rec.ambiguous = fit.correction->ambiguous;
    }
    rec.names = fit.names;
    rec.estimates = fit.packed();
    rec.std_errors = fit.std_errors;
    rec.est_p1 = logistic_clamped((data.x() * fit.params.beta).array()).mean();
    if (fit.rates) {
        rec.est_sens = fit.rates->sens;
        rec.est_spec = fit.rates->spec;
    }
    return rec;
}

}  // namespace

CellStat aggregate_cell(const std::string& name, const std::vector<double>& estimates,
                        double truth) {
    CellStat cell;
    cell.name = name;
    cell.truth = truth;
    cell.n_used = static_cast<int>(estimates.size());
    if (estimates.empty()) {
        cell.bias = cell.rmse = std::numeric_limits<double>::quiet_NaN();
        return cell;
    }
    double sum = 0.0, sumsq = 0.0;
    for (double est : estimates) {
        const double err = est - truth;
        sum += err;
        sumsq += err * err;
    }
    cell.bias = sum / static_cast<double>(estimates.size());
    cell.rmse = std::sqrt(sumsq / static_cast<double>(estimates.size()));
    return cell;
}

StudyReport run_study(const ScenarioConfig& scenario, int jobs) {
    scenario.validate();
    const int reps = scenario.n_realizations;
    const int workers = std::max(
        1, jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency()));

    ScenarioConfig scn = scenario;
    if (workers > 1) scn.mcmc.jobs = 1;  // replicates already saturate the pool

    StudyReport report;
    report.scenario = scenario;
    report.replicates.resize(static_cast<std::size_t>(reps));

    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= reps) return;
            ReplicateResult& res = report.replicates[static_cast<std::size_t>(r)];
            res.replicate = r;
            const GeneratedDataset g = generate_dataset(scn, r);
            res.data_p1 = g.realized_p1;
            res.data_sens = g.realized_sens;
            res.data_spec = g.realized_spec;
            for (Method m : scn.estimators) {
                EstimateRecord rec;
                try {
                    rec = make_record(fit_method(m, g.data, scn, r), g.data);
                } catch (const std::exception& e) {
                    rec = EstimateRecord{};
                    rec.failure = e.what();
                }
                res.records.push_back(std::move(rec));
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // ordered, deterministic reduction
    std::vector<double> p1s, senss, specs;
    for (const ReplicateResult& r : report.replicates) {
        p1s.push_back(r.data_p1);
        senss.push_back(r.data_sens);
        specs.push_back(r.data_spec);
    }
    report.data_mean_p1 = nan_mean(p1s);
    report.data_mean_sens = nan_mean(senss);
    report.data_mean_spec = nan_mean(specs);

    for (std::size_t mi = 0; mi < scn.estimators.size(); ++mi) {
        const Method m = scn.estimators[mi];
        MethodSummary summary;
        summary.method = m;
        const std::vector<std::string> names = scn.names_for(m);
        const Eigen::VectorXd truth = scn.truth_for(m);

        std::vector<std::vector<double>> per_coef(names.size());
        std::vector<double> mp1, msens, mspec;
        for (const ReplicateResult& r : report.replicates) {
            const EstimateRecord& rec = r.records[mi];
            if (!rec.ok) {
                ++summary.n_failed;
                continue;
            }
            if (!rec.converged) ++summary.n_nonconverged;
            if (rec.ambiguous) ++summary.n_ambiguous;
            for (std::size_t j = 0; j < names.size(); ++j)
                per_coef[j].push_back(rec.estimates[static_cast<Eigen::Index>(j)]);
            mp1.push_back(rec.est_p1);
            msens.push_back(rec.est_sens);
            mspec.push_back(rec.est_spec);
        }
        for (std::size_t j = 0; j < names.size(); ++j)
            summary.cells.push_back(
                aggregate_cell(names[j], per_coef[j], truth[static_cast<Eigen::Index>(j)]));
        summary.mean_p1 = nan_mean(mp1);
        summary.mean_p2 = std::isfinite(summary.mean_p1)
                              ? 1.0 - summary.mean_p1
                              : std::numeric_limits<double>::quiet_NaN();
        summary.mean_sens = nan_mean(msens);
        summary.mean_spec = nan_mean(mspec);
        report.summaries.push_back(std::move(summary));
    }
    return report;
}

}  // namespace misclass
