#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "misclass/baselines.hpp"
#include "misclass/mcmc.hpp"
#include "misclass/model.hpp"
#include "misclass/sim.hpp"

using namespace misclass;
using testutil::vec;

namespace {

GeneratedDataset small_replicate(std::uint64_t seed, int n = 400, int setting = 1) {
    ScenarioConfig scn = ScenarioConfig::setting(setting);
    scn.seed = seed;
    scn.n = n;
    return generate_dataset(scn, 0);
}

}  // namespace

TEST_CASE("log prior densities") {
    const ParameterSet p6 = testutil::params({1, -2}, {0.5, 1}, {-0.5, -1});

    SUBCASE("uniform(-10,10) is flat inside the support") {
        CHECK(log_prior(p6, PriorSpec::uniform(-10, 10)) ==
              doctest::Approx(6.0 * -2.995732273553991).epsilon(1e-12));
    }
    SUBCASE("outside the uniform support the density vanishes") {
        const ParameterSet out = testutil::params({10.5, 0}, {0, 0}, {0, 0});
        CHECK(log_prior(out, PriorSpec::uniform(-10, 10)) ==
              -std::numeric_limits<double>::infinity());
    }
    SUBCASE("standard normal at zero") {
        const ParameterSet one{vec({0.0}), Eigen::VectorXd(), Eigen::VectorXd()};
        CHECK(log_prior(one, PriorSpec::normal(0, 1)) ==
              doctest::Approx(-0.9189385332046727).epsilon(1e-12));
    }
    SUBCASE("double exponential at its location") {
        const ParameterSet one{vec({0.0}), Eigen::VectorXd(), Eigen::VectorXd()};
        CHECK(log_prior(one, PriorSpec::double_exponential(0, 1)) ==
              doctest::Approx(std::log(0.5)).epsilon(1e-12));
    }
    SUBCASE("t density matches its closed form") {
        const ParameterSet one{vec({1.3}), Eigen::VectorXd(), Eigen::VectorXd()};
        const double nu = 4.0;
        const double expect = std::lgamma(2.5) - std::lgamma(2.0) -
                              0.5 * std::log(nu * std::numbers::pi) -
                              2.5 * std::log1p(1.3 * 1.3 / nu);
        CHECK(log_prior(one, PriorSpec::student_t(0, 1, nu)) ==
              doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("hyperparameter validation") {
        CHECK_THROWS_AS(PriorSpec::normal(0, -1).resolve(3), ValidationError);
        CHECK_THROWS_AS(PriorSpec::uniform(2, 2).resolve(3), ValidationError);
        CHECK_THROWS_AS(PriorSpec::student_t(0, 1, 0).resolve(3), ValidationError);
        PriorSpec wrong_len = PriorSpec::uniform(-1, 1);
        wrong_len.lower = testutil::vec({-1, -1, -1});
        CHECK_THROWS_AS(wrong_len.resolve(6), ValidationError);
    }
}

TEST_CASE("random-walk kernel reproduces a brute-force grid posterior") {
    // two-coefficient logistic posterior, flat prior over [-10,10]^2
    Eigen::MatrixXd design(12, 2);
    design << 1, -2.1, 1, -1.5, 1, -0.9, 1, -0.4, 1, -0.1, 1, 0.2, 1, 0.6, 1, 0.9, 1, 1.3, 1,
        1.7, 1, 2.2, 1, 2.8;
    Eigen::ArrayXd labels(12);
    labels << 0, 0, 0, 1, 0, 1, 0, 1, 1, 1, 1, 1;

    auto log_target = [&](double a, double b) {
        if (std::abs(a) > 10.0 || std::abs(b) > 10.0)
            return -std::numeric_limits<double>::infinity();
        double ll = 0.0;
        for (int i = 0; i < 12; ++i) {
            const double eta = a + b * design(i, 1);
            ll += labels[i] * eta - (eta > 0 ? eta + std::log1p(std::exp(-eta))
                                             : std::log1p(std::exp(eta)));
        }
        return ll;
    };

    // 201 x 201 grid oracle over the support
    double wsum = 0.0, mean_a = 0.0, mean_b = 0.0;
    for (int ia = 0; ia < 201; ++ia) {
        for (int ib = 0; ib < 201; ++ib) {
            const double a = -10.0 + 0.1 * ia;
            const double b = -10.0 + 0.1 * ib;
            const double w = std::exp(log_target(a, b));
            wsum += w;
            mean_a += w * a;
            mean_b += w * b;
        }
    }
    mean_a /= wsum;
    mean_b /= wsum;

    // Metropolis-within-Gibbs over the two coordinates with the shared kernel
    CounterRng rng(12345, 0, 0);
    Eigen::VectorXd a(1), b(1);
    a << 0.0;
    b << 0.0;
    double lp = log_target(a[0], b[0]);
    const int iters = 120000, burn = 10000;
    Eigen::ArrayXd draws_a(iters - burn), draws_b(iters - burn);
    for (int t = 0; t < iters; ++t) {
        double lpa = lp;
        mh_step(a, lpa, [&](const Eigen::VectorXd& cand) { return log_target(cand[0], b[0]); },
                1.6, rng);
        double lpb = log_target(a[0], b[0]);
        mh_step(b, lpb, [&](const Eigen::VectorXd& cand) { return log_target(a[0], cand[0]); },
                1.6, rng);
        lp = lpb;
        if (t >= burn) {
            draws_a[t - burn] = a[0];
            draws_b[t - burn] = b[0];
        }
    }

    auto mcse = [](const Eigen::ArrayXd& d) {
        const double sd = std::sqrt((d - d.mean()).square().sum() / (d.size() - 1));
        const double ess = effective_sample_size({d});
        return sd / std::sqrt(ess);
    };
    CHECK(std::abs(draws_a.mean() - mean_a) < 3.0 * mcse(draws_a));
    CHECK(std::abs(draws_b.mean() - mean_b) < 3.0 * mcse(draws_b));
}

TEST_CASE("posterior sampling is deterministic in the seed, for any job count") {
    const GeneratedDataset g = small_replicate(201, 300);
    McmcConfig cfg;
    cfg.chains = 2;
    cfg.iterations = 600;
    cfg.burn_in = 200;
    cfg.seed = 9;

    const PosteriorSample s1 = sample_posterior(g.data, PriorSpec::uniform(-10, 10), cfg);
    cfg.jobs = 2;
    const PosteriorSample s2 = sample_posterior(g.data, PriorSpec::uniform(-10, 10), cfg);
    cfg.jobs = 1;
    const PosteriorSample s3 = sample_posterior(g.data, PriorSpec::uniform(-10, 10), cfg);
    for (std::size_t c = 0; c < s1.chains.size(); ++c) {
        CHECK(s1.chains[c].draws == s2.chains[c].draws);
        CHECK(s1.chains[c].draws == s3.chains[c].draws);
    }
    CHECK(s1.rhat == s2.rhat);
}

TEST_CASE("uniform prior bounds are never violated by retained draws") {
    const GeneratedDataset g = small_replicate(203, 500);
    McmcConfig cfg;
    cfg.chains = 2;
    cfg.iterations = 1500;
    cfg.burn_in = 500;
    cfg.seed = 17;
    const PosteriorSample s = sample_posterior(g.data, PriorSpec::uniform(-3, 3), cfg);
    for (const ChainResult& c : s.chains) {
        CHECK(c.draws.minCoeff() >= -3.0);
        CHECK(c.draws.maxCoeff() <= 3.0);
    }
}

TEST_CASE("draw bookkeeping honors burn-in and thinning") {
    const GeneratedDataset g = small_replicate(205, 300);
    McmcConfig cfg;
    cfg.chains = 2;
    cfg.iterations = 900;
    cfg.burn_in = 300;
    cfg.thin = 3;
    cfg.seed = 21;
    const PosteriorSample s = sample_posterior(g.data, PriorSpec::uniform(-10, 10), cfg);
    CHECK(s.kept_per_chain() == 200);
    CHECK(s.rhat.size() == 6);
    CHECK((s.rhat.array() >= 1.0 - 1e-6).all());

    McmcConfig bad = cfg;
    bad.burn_in = 900;
    CHECK_THROWS_AS(sample_posterior(g.data, PriorSpec::uniform(-10, 10), bad),
                    ValidationError);
    bad = cfg;
    bad.thin = 0;
    CHECK_THROWS_AS(sample_posterior(g.data, PriorSpec::uniform(-10, 10), bad),
                    ValidationError);
}

TEST_CASE("concentrated posterior recovers the logistic MLE") {
    ScenarioConfig scn = ScenarioConfig::setting(1);
    scn.seed = 207;
    scn.n = 800;
    scn.gamma1_true = vec({40.0, 0.0});
    scn.gamma2_true = vec({-40.0, 0.0});
    const GeneratedDataset g = generate_dataset(scn, 0);

    McmcConfig cfg;
    cfg.chains = 2;
    cfg.iterations = 4000;
    cfg.burn_in = 1500;
    cfg.seed = 23;
    const FitResult fit =
        summarize_posterior(sample_posterior(g.data, PriorSpec::normal(0, 10), cfg), g.data);
    const FitResult mle = fit_naive(g.data);
    for (int j = 0; j < 2; ++j)
        CHECK(std::abs(fit.params.beta[j] - mle.params.beta[j]) < 2.0 * fit.std_errors[j]);
}

TEST_CASE("chains started in opposite modes agree after per-chain correction") {
    ScenarioConfig scn = ScenarioConfig::setting(2);
    scn.seed = 209;
    scn.n = 3000;
    const GeneratedDataset g = generate_dataset(scn, 0);
    const ParameterSet truth{vec({1.0, -2.0}), vec({0.5, 1.0}), vec({-0.5, -1.0})};

    McmcConfig cfg;
    cfg.chains = 2;
    cfg.iterations = 5000;
    cfg.burn_in = 2000;
    cfg.seed = 31;
    cfg.chain_inits = {truth, transpose_parameter_set(truth)};
    const PosteriorSample s = sample_posterior(g.data, PriorSpec::uniform(-10, 10), cfg);

    REQUIRE(s.chains.size() == 2);
    CHECK_FALSE(s.chains[0].correction.flipped);
    CHECK(s.chains[1].correction.flipped);
    for (const ChainResult& c : s.chains) {
        CHECK(c.correction.post_sens > 0.5);
        CHECK(c.correction.post_spec > 0.5);
    }
    for (Eigen::Index j = 0; j < 6; ++j) {
        const Eigen::ArrayXd d0 = s.chains[0].draws.col(j).array();
        const Eigen::ArrayXd d1 = s.chains[1].draws.col(j).array();
        const double se0 = std::sqrt((d0 - d0.mean()).square().sum() / (d0.size() - 1) /
                                     effective_sample_size({d0}));
        const double se1 = std::sqrt((d1 - d1.mean()).square().sum() / (d1.size() - 1) /
                                     effective_sample_size({d1}));
        CHECK(std::abs(d0.mean() - d1.mean()) <
              3.0 * std::sqrt(se0 * se0 + se1 * se1));
    }
}

TEST_CASE("setting 3 posterior recovers sensitivity and pins specificity") {
    ScenarioConfig scn = ScenarioConfig::setting(3);
    scn.seed = 211;
    double sens = 0.0, spec = 0.0;
    const int reps = 2;
    for (int r = 0; r < reps; ++r) {
        const GeneratedDataset g = generate_dataset(scn, r);
        McmcConfig cfg;
        cfg.chains = 2;
        cfg.iterations = 4000;
        cfg.burn_in = 1500;
        cfg.seed = 37;
        cfg.run_id = static_cast<std::uint64_t>(r);
        const PosteriorSample s = sample_posterior(g.data, PriorSpec::uniform(-10, 10), cfg);
        for (const ChainResult& c : s.chains) {
            CHECK(c.draws.minCoeff() >= -10.0);  // the prior truncates gamma_12 drift
            CHECK(c.draws.maxCoeff() <= 10.0);
        }
        const FitResult fit = summarize_posterior(s, g.data);
        sens += fit.rates->sens;
        spec += fit.rates->spec;
    }
    CHECK(std::abs(sens / reps - 0.859) < 0.03);
    CHECK(spec / reps > 0.99);
}

TEST_CASE("summarize_posterior computes means, SDs and medians") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 1), z = Eigen::MatrixXd::Ones(2, 1);
    Eigen::VectorXi ystar(2);
    ystar << 1, 2;
    const ObservedDataset data(ystar, x, z);

    PosteriorSample s;
    s.px = 1;
    s.pz = 1;
    s.names = coefficient_names(1, 1);
    ChainResult chain;
    chain.draws = Eigen::MatrixXd::Zero(3, 3);
    chain.draws.col(0) << 1.0, 2.0, 3.0;
    s.chains.push_back(chain);
    s.rhat = Eigen::VectorXd::Ones(3);
    s.ess = Eigen::VectorXd::Constant(3, 3.0);

    const FitResult fit = summarize_posterior(s, data);
    CHECK(fit.params.beta[0] == doctest::Approx(2.0));
    CHECK(fit.std_errors[0] == doctest::Approx(1.0));
    CHECK(fit.mcmc->posterior_median[0] == doctest::Approx(2.0));
    CHECK(fit.std_errors[1] == doctest::Approx(0.0));  // constant draws
    CHECK(fit.iterations == 3);
}

TEST_CASE("split-Rhat separates mixed from disjoint chains") {
    CounterRng rng(5, 0, 0);
    Eigen::ArrayXd a(2000), b(2000);
    for (int i = 0; i < 2000; ++i) {
        a[i] = rng.normal();
        b[i] = rng.normal();
    }
    CHECK(split_rhat({a, b}) < 1.05);
    CHECK(split_rhat({a, b + 5.0}) > 1.5);
    CHECK(split_rhat({a, a}) < 1.05);
    CHECK(effective_sample_size({a, b}) > 1000.0);
}
