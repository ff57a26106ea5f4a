// Command-line front end: dataset simulation, single-dataset fitting, and
// full simulation studies. Exit codes: 0 success (possibly flagged
// non-converged), 2 usage/config error, 3 I/O error.

#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "misclass/baselines.hpp"
#include "misclass/csv.hpp"
#include "misclass/em.hpp"
#include "misclass/errors.hpp"
#include "misclass/mcmc.hpp"
#include "misclass/model.hpp"
#include "misclass/report.hpp"
#include "misclass/sim.hpp"
#include "misclass/version.hpp"

namespace {

using misclass::Method;
using misclass::PriorFamily;
using misclass::PriorSpec;
using misclass::ScenarioConfig;

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

struct PriorCli {
    std::string family = "uniform";
    std::vector<double> lower{-10.0};
    std::vector<double> upper{10.0};
    std::vector<double> location{0.0};
    std::vector<double> scale{10.0};
    std::vector<double> df{4.0};

    void add_options(CLI::App* cmd) {
        cmd->add_option("--prior", family, "prior family for MCMC")
            ->check(CLI::IsMember({"uniform", "normal", "double-exponential", "t"}));
        cmd->add_option("--prior-lower", lower, "uniform prior lower bound(s)")->delimiter(',');
        cmd->add_option("--prior-upper", upper, "uniform prior upper bound(s)")->delimiter(',');
        cmd->add_option("--prior-location", location, "prior location(s)")->delimiter(',');
        cmd->add_option("--prior-scale", scale, "prior scale(s)")->delimiter(',');
        cmd->add_option("--prior-df", df, "t prior degrees of freedom")->delimiter(',');
    }

    PriorSpec build() const {
        PriorSpec p;
        if (family == "uniform") {
            p.family = PriorFamily::uniform;
            p.lower = to_eigen(lower);
            p.upper = to_eigen(upper);
        } else {
            p.family = family == "normal" ? PriorFamily::normal
                       : family == "t"    ? PriorFamily::student_t
                                          : PriorFamily::double_exponential;
            p.location = to_eigen(location);
            p.scale = to_eigen(scale);
            p.df = to_eigen(df);
        }
        return p;
    }
};

struct ScenarioCli {
    int setting = 0;
    int n = 0;
    int replicates = 0;
    double x_mean = 0.0, z_mean = 0.0, covariance = 0.0;
    std::vector<double> beta_true, gamma1_true, gamma2_true;
    std::uint64_t seed = 0;
    PriorCli prior;

    CLI::Option* setting_opt = nullptr;
    CLI::Option* n_opt = nullptr;
    CLI::Option* replicates_opt = nullptr;
    CLI::Option* x_mean_opt = nullptr;
    CLI::Option* z_mean_opt = nullptr;
    CLI::Option* covariance_opt = nullptr;
    CLI::Option* beta_opt = nullptr;
    CLI::Option* gamma1_opt = nullptr;
    CLI::Option* gamma2_opt = nullptr;

    void add_options(CLI::App* cmd, bool with_replicates) {
        setting_opt = cmd->add_option("--setting", setting, "scenario preset (1|2|3)")
                          ->check(CLI::Range(1, 3));
        n_opt = cmd->add_option("--n", n, "sample size per replicate")
                    ->check(CLI::PositiveNumber);
        if (with_replicates)
            replicates_opt =
                cmd->add_option("--replicates,--n-realizations", replicates,
                                "number of generated datasets")
                    ->check(CLI::PositiveNumber);
        x_mean_opt = cmd->add_option("--x-mean", x_mean, "mean of the X covariate");
        z_mean_opt = cmd->add_option("--z-mean", z_mean, "mean of Z before |.|");
        covariance_opt =
            cmd->add_option("--covariance", covariance, "Cov(X, Z) of the generator")
                ->check(CLI::Range(-0.999, 0.999));
        beta_opt = cmd->add_option("--beta-true", beta_true,
                                   "true outcome mechanism logit coefficients")
                       ->delimiter(',');
        gamma1_opt = cmd->add_option("--gamma1-true", gamma1_true,
                                     "P(Y*=1|Y=1) logit coefficients")
                         ->delimiter(',');
        gamma2_opt = cmd->add_option("--gamma2-true", gamma2_true,
                                     "P(Y*=1|Y=2) logit coefficients")
                         ->delimiter(',');
        cmd->add_option("--seed", seed, "RNG seed")->capture_default_str();
        prior.add_options(cmd);
    }

    ScenarioConfig build() const {
        ScenarioConfig scn =
            setting_opt->count() > 0 ? ScenarioConfig::setting(setting) : ScenarioConfig();
        if (setting_opt->count() == 0) {
            scn.name = "custom";
            scn.beta_true = Eigen::Vector2d(1.0, -2.0);
            scn.gamma1_true = Eigen::Vector2d(0.5, 1.0);
            scn.gamma2_true = Eigen::Vector2d(-0.5, -1.0);
        }
        if (n_opt->count() > 0) scn.n = n;
        if (replicates_opt && replicates_opt->count() > 0) scn.n_realizations = replicates;
        if (x_mean_opt->count() > 0) scn.x_mean = x_mean;
        if (z_mean_opt->count() > 0) scn.z_mean = z_mean;
        if (covariance_opt->count() > 0) scn.covariance = covariance;
        if (beta_opt->count() > 0) scn.beta_true = to_eigen(beta_true);
        if (gamma1_opt->count() > 0) scn.gamma1_true = to_eigen(gamma1_true);
        if (gamma2_opt->count() > 0) scn.gamma2_true = to_eigen(gamma2_true);
        scn.seed = seed;
        scn.prior = prior.build();
        scn.validate();
        return scn;
    }
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_simulate(const ScenarioCli& scn_cli, const std::string& out, bool with_truth,
                 int replicate) {
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioConfig scn = scn_cli.build();
    const misclass::GeneratedDataset g = misclass::generate_dataset(scn, replicate);
    misclass::write_dataset_csv(out, g.data, with_truth ? &g.y_true : nullptr);

    const nlohmann::json manifest = misclass::make_manifest(
        "simulate", misclass::scenario_to_json(scn), scn.seed, {out}, seconds_since(t0));
    misclass::write_json_atomic(out + ".manifest.json", manifest);
    std::printf("wrote %s: %ld rows, realized P(Y=1)=%.3f sens=%.3f spec=%.3f\n", out.c_str(),
                static_cast<long>(g.data.n()), g.realized_p1, g.realized_sens, g.realized_spec);
    return 0;
}

struct FitCli {
    std::string data_path;
    std::string method = "em";
    std::string out = "fit_result.json";
    std::string dump_draws;
    std::string init = "naive";
    int max_iter = 1500;
    double loglik_tol = 1e-7;
    double param_tol = 1e-6;
    int random_starts = 10;
    int chains = 4;
    int iterations = 8000;
    int burn_in = 3000;
    int thin = 1;
    int adapt_window = 50;
    int jobs = 0;
    std::uint64_t seed = 0;
    PriorCli prior;
};

int run_fit(const FitCli& cli) {
    const auto t0 = std::chrono::steady_clock::now();
    const misclass::DatasetCsv file = misclass::read_dataset_csv(cli.data_path);
    if (file.n_dropped > 0)
        std::fprintf(stderr, "warning: dropped %ld rows with missing fields\n", file.n_dropped);

    misclass::EmConfig em;
    em.max_iter = cli.max_iter;
    em.loglik_tol = cli.loglik_tol;
    em.param_tol = cli.param_tol;
    em.seed = cli.seed;
    if (cli.init == "random") {
        em.init = misclass::EmConfig::Init::random_starts;
        em.n_random_starts = cli.random_starts;
    }

    misclass::FitResult fit;
    std::vector<std::string> outputs{cli.out};
    nlohmann::json config{{"data", cli.data_path}, {"method", cli.method}, {"seed", cli.seed}};
    if (cli.method == "em") {
        fit = misclass::fit_em(file.data, em);
    } else if (cli.method == "naive") {
        fit = misclass::fit_naive(file.data);
    } else if (cli.method == "perfect-spec") {
        fit = misclass::fit_one_directional_em(file.data,
                                               misclass::Restriction::perfect_specificity, em);
    } else if (cli.method == "perfect-sens") {
        fit = misclass::fit_one_directional_em(file.data,
                                               misclass::Restriction::perfect_sensitivity, em);
    } else {  // mcmc
        misclass::McmcConfig mcmc;
        mcmc.chains = cli.chains;
        mcmc.iterations = cli.iterations;
        mcmc.burn_in = cli.burn_in;
        mcmc.thin = cli.thin;
        mcmc.adapt_window = cli.adapt_window;
        mcmc.seed = cli.seed;
        mcmc.jobs = cli.jobs;
        const PriorSpec prior = cli.prior.build();
        config["prior"] = misclass::prior_to_json(prior);
        const misclass::PosteriorSample sample =
            misclass::sample_posterior(file.data, prior, mcmc);
        if (!cli.dump_draws.empty()) {
            const auto paths = misclass::write_chain_draws_csv(cli.dump_draws, sample);
            outputs.insert(outputs.end(), paths.begin(), paths.end());
        }
        fit = misclass::summarize_posterior(sample, file.data);
    }

    std::fputs(misclass::render_fit_table(fit).c_str(), stdout);
    misclass::write_json_atomic(cli.out, misclass::fit_result_to_json(fit));
    misclass::write_json_atomic(
        cli.out + ".manifest.json",
        misclass::make_manifest("fit", config, cli.seed, outputs, seconds_since(t0)));
    if (!fit.converged)
        std::fprintf(stderr, "warning: %s fit did not converge; estimates may be unreliable\n",
                     fit.method.c_str());
    return 0;
}

int run_study(const ScenarioCli& scn_cli, const std::string& methods_csv,
              const std::string& prefix, int jobs) {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig scn = scn_cli.build();

    std::vector<Method> methods;
    std::stringstream ss(methods_csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
        const auto m = misclass::method_from_name(token);
        if (!m)
            throw misclass::ValidationError(
                "unknown method '" + token + "' (expected em|mcmc|naive|perfect-spec|perfect-sens)");
        methods.push_back(*m);
    }
    if (!methods.empty()) scn.estimators = methods;

    const misclass::StudyReport report = misclass::run_study(scn, jobs);

    const std::string table = misclass::render_study_tables(report);
    std::fputs(table.c_str(), stdout);

    const std::string json_path = prefix + "_summary.json";
    const std::string csv_path = prefix + "_replicates.csv";
    const std::string table_path = prefix + "_table.txt";
    misclass::write_json_atomic(json_path, misclass::study_report_to_json(report));
    misclass::write_replicates_csv(csv_path, report);
    misclass::write_text_atomic(table_path, table);
    misclass::write_json_atomic(
        prefix + "_manifest.json",
        misclass::make_manifest("study", misclass::scenario_to_json(scn), scn.seed,
                                {json_path, csv_path, table_path}, seconds_since(t0)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary outcome misclassification: EM / MCMC estimators with label switching "
                 "correction"};
    app.set_version_flag("--version", MISCLASS_VERSION);
    app.require_subcommand(1);
    // config keys live under a section named after the subcommand, e.g.
    // [study]\nsetting = 2
    app.set_config("--config", "", "read options from a TOML config file");

    auto* sim = app.add_subcommand("simulate", "generate one dataset CSV from a scenario");
    sim->fallthrough();
    ScenarioCli sim_scn;
    sim_scn.add_options(sim, false);
    std::string sim_out = "dataset.csv";
    bool with_truth = false;
    int sim_replicate = 0;
    sim->add_option("--out", sim_out, "output CSV path")->capture_default_str();
    sim->add_flag("--with-truth", with_truth, "include the latent y_true column");
    sim->add_option("--replicate", sim_replicate, "replicate index to generate")
        ->check(CLI::NonNegativeNumber);

    auto* fit = app.add_subcommand("fit", "fit one estimator to a dataset CSV");
    fit->fallthrough();
    FitCli fit_cli;
    fit->add_option("--data", fit_cli.data_path, "dataset CSV (ystar,x...,z...)")->required();
    fit->add_option("--method", fit_cli.method, "estimator")
        ->check(CLI::IsMember({"em", "mcmc", "naive", "perfect-spec", "perfect-sens"}));
    fit->add_option("--out", fit_cli.out, "output JSON path")->capture_default_str();
    fit->add_option("--max-iter", fit_cli.max_iter, "EM iteration cap")
        ->check(CLI::PositiveNumber);
    fit->add_option("--loglik-tol", fit_cli.loglik_tol, "EM |delta loglik| tolerance");
    fit->add_option("--param-tol", fit_cli.param_tol, "EM max-norm parameter tolerance");
    fit->add_option("--init", fit_cli.init, "EM initialization")
        ->check(CLI::IsMember({"naive", "random"}));
    fit->add_option("--random-starts", fit_cli.random_starts, "number of random EM starts")
        ->check(CLI::PositiveNumber);
    fit->add_option("--chains", fit_cli.chains, "MCMC chains")->check(CLI::PositiveNumber);
    fit->add_option("--iterations", fit_cli.iterations, "MCMC iterations per chain")
        ->check(CLI::PositiveNumber);
    fit->add_option("--burn-in", fit_cli.burn_in, "MCMC burn-in iterations")
        ->check(CLI::NonNegativeNumber);
    fit->add_option("--thin", fit_cli.thin, "MCMC thinning stride")->check(CLI::PositiveNumber);
    fit->add_option("--adapt-window", fit_cli.adapt_window, "proposal adaptation window")
        ->check(CLI::PositiveNumber);
    fit->add_option("--dump-draws", fit_cli.dump_draws, "prefix for per-chain draw CSVs");
    fit->add_option("--jobs", fit_cli.jobs, "worker threads (0 = auto)");
    fit->add_option("--seed", fit_cli.seed, "RNG seed")->capture_default_str();
    fit_cli.prior.add_options(fit);

    auto* study = app.add_subcommand("study", "run a Monte Carlo simulation study");
    study->fallthrough();
    ScenarioCli study_scn;
    study_scn.add_options(study, true);
    std::string methods_csv = "em";
    std::string prefix = "study";
    int study_jobs = 0;
    study->add_option("--methods", methods_csv, "comma-separated estimators")
        ->capture_default_str();
    study->add_option("--out-prefix", prefix, "output file prefix")->capture_default_str();
    study->add_option("--jobs", study_jobs, "worker threads (0 = auto)");

    int rc = 0;
    sim->callback([&]() { rc = run_simulate(sim_scn, sim_out, with_truth, sim_replicate); });
    fit->callback([&]() { rc = run_fit(fit_cli); });
    study->callback([&]() { rc = run_study(study_scn, methods_csv, prefix, study_jobs); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const misclass::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const misclass::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return rc;
}
