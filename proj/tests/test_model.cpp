#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "helpers.hpp"
#include "misclass/model.hpp"

using namespace misclass;
using testutil::params;
using testutil::vec;

TEST_CASE("probability grid matches hand-evaluated logistic values") {
    // one subject, x = 0, z = 0.5
    Eigen::MatrixXd x(1, 2), z(1, 2);
    x << 1.0, 0.0;
    z << 1.0, 0.5;
    Eigen::VectorXi ystar(1);
    ystar << 1;
    ObservedDataset data(ystar, x, z);

    SUBCASE("all-zero coefficients give 1/2 everywhere") {
        const ProbabilityGrid g = compute_probability_grid(params({0, 0}, {0, 0}, {0, 0}), data);
        CHECK(g.pi(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(g.pistar_given1(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(g.pistar_given2(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("beta = (1,-2) at x = 0 gives logistic(1)") {
        const ProbabilityGrid g = compute_probability_grid(params({1, -2}, {0, 0}, {0, 0}), data);
        CHECK(g.pi(0, 0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
    }
    SUBCASE("gamma1 = (0.5, 1) at z = 0.5 gives logistic(1)") {
        const ProbabilityGrid g =
            compute_probability_grid(params({0, 0}, {0.5, 1.0}, {0, 0}), data);
        CHECK(g.pistar_given1(0, 0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
    }
    SUBCASE("dimension mismatch names the offending block") {
        const ParameterSet bad{vec({0.0}), vec({0, 0}), vec({0, 0})};
        CHECK_THROWS_WITH_AS(compute_probability_grid(bad, data),
                             doctest::Contains("beta"), DimensionError);
        const ParameterSet bad2{vec({0, 0}), vec({0.0, 0.0, 0.0}), vec({0, 0})};
        CHECK_THROWS_WITH_AS(compute_probability_grid(bad2, data),
                             doctest::Contains("gamma1"), DimensionError);
    }
}

TEST_CASE("grid rows are stochastic and strictly inside (0,1)") {
    const ObservedDataset data = testutil::random_dataset(60, 42);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const ParameterSet p = testutil::random_params(s, 6.0);
        const ProbabilityGrid g = compute_probability_grid(p, data);
        for (const Eigen::MatrixXd* m : {&g.pi, &g.pistar_given1, &g.pistar_given2}) {
            CHECK(((*m).rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
            CHECK((*m).minCoeff() > 0.0);
            CHECK((*m).maxCoeff() < 1.0);
        }
    }
}

TEST_CASE("observed probability is the two-component mixture") {
    Eigen::MatrixXd x(1, 2), z(1, 2);
    x << 1.0, 0.0;
    z << 1.0, 0.0;
    Eigen::VectorXi ystar(1);
    ystar << 1;
    ObservedDataset data(ystar, x, z);

    SUBCASE("uninformative observation mechanism gives 1/2") {
        const Eigen::MatrixXd p =
            observed_probability(params({3.0, 1.0}, {0, 0}, {0, 0}), data);
        CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("perfect classification returns pi") {
        const Eigen::MatrixXd p =
            observed_probability(params({1.0, 0.0}, {40, 0}, {-40, 0}), data);
        CHECK(p(0, 0) == doctest::Approx(0.7310585786300049).epsilon(1e-9));
    }
    SUBCASE("0.9 * 0.7 + 0.2 * 0.3 = 0.69") {
        const ParameterSet p{vec({logit(0.7), 0.0}), vec({logit(0.9), 0.0}),
                             vec({logit(0.2), 0.0})};
        const Eigen::MatrixXd prob = observed_probability(p, data);
        CHECK(prob(0, 0) == doctest::Approx(0.69).epsilon(1e-12));
        CHECK(prob(0, 0) + prob(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("observed log-likelihood hand values") {
    Eigen::MatrixXd x(1, 2), z(1, 2);
    x << 1.0, 0.0;
    z << 1.0, 0.0;
    Eigen::VectorXi ystar(1);
    ystar << 1;
    ObservedDataset data(ystar, x, z);

    SUBCASE("single subject with P(Y*=1) = 0.69") {
        const ParameterSet p{vec({logit(0.7), 0.0}), vec({logit(0.9), 0.0}),
                             vec({logit(0.2), 0.0})};
        CHECK(observed_loglik(p, data) ==
              doctest::Approx(-0.37106368139083207).epsilon(1e-10));
    }
    SUBCASE("uninformative coefficients give n log(1/2)") {
        const ObservedDataset big = testutil::random_dataset(37, 7);
        CHECK(observed_loglik(params({0, 0}, {0, 0}, {0, 0}), big) ==
              doctest::Approx(37.0 * std::log(0.5)).epsilon(1e-12));
    }
}

TEST_CASE("mode duality: transposition preserves the observed log-likelihood") {
    const ObservedDataset data = testutil::random_dataset(80, 3);
    for (std::uint64_t s = 100; s < 120; ++s) {
        const ParameterSet p = testutil::random_params(s, 3.0);
        const double a = observed_loglik(p, data);
        const double b = observed_loglik(transpose_parameter_set(p), data);
        CHECK(std::abs(a - b) < 1e-9);
    }
}

TEST_CASE("complete-data log-likelihood") {
    Eigen::MatrixXd x(1, 2), z(1, 2);
    x << 1.0, 0.0;
    z << 1.0, 0.0;
    Eigen::VectorXi ystar(1), y_true(1);
    ystar << 1;
    y_true << 1;
    ObservedDataset data(ystar, x, z);

    SUBCASE("log(0.7) + log(0.9) for Y=1, Y*=1") {
        const ParameterSet p{vec({logit(0.7), 0.0}), vec({logit(0.9), 0.0}),
                             vec({logit(0.2), 0.0})};
        CHECK(complete_loglik(p, data, y_true) ==
              doctest::Approx(-0.46203545959655873).epsilon(1e-10));
    }
    SUBCASE("relabeling invariance: flip y_true, negate beta, swap gammas") {
        const ObservedDataset big = testutil::random_dataset(50, 11);
        CounterRng rng(4, 0, 5);
        Eigen::VectorXi y(50);
        for (int i = 0; i < 50; ++i) y[i] = rng.bernoulli(0.6) ? 1 : 2;
        for (std::uint64_t s = 0; s < 10; ++s) {
            const ParameterSet p = testutil::random_params(s, 2.5);
            const Eigen::VectorXi y_flipped = (3 - y.array()).matrix();
            CHECK(std::abs(complete_loglik(p, big, y) -
                           complete_loglik(transpose_parameter_set(p), big, y_flipped)) < 1e-9);
        }
    }
    SUBCASE("perfect classification with y_true = ystar collapses to sum log pi") {
        const ObservedDataset big = testutil::random_dataset(40, 13);
        const ParameterSet p{vec({0.8, -1.2}), vec({40, 0}), vec({-40, 0})};
        const ProbabilityGrid g = compute_probability_grid(p, big);
        double expect = 0.0;
        for (Eigen::Index i = 0; i < big.n(); ++i)
            expect += std::log(g.pi(i, big.ystar()[i] - 1));
        CHECK(complete_loglik(p, big, big.ystar()) ==
              doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("parameter transposition") {
    const ParameterSet p = params({1.0, -2.0}, {0.5, 1.0}, {-0.5, -1.0});
    const ParameterSet t = transpose_parameter_set(p);
    CHECK(t.beta == (-p.beta).eval());
    CHECK(t.gamma1 == p.gamma2);
    CHECK(t.gamma2 == p.gamma1);

    SUBCASE("all-zero parameters are a fixed point") {
        const ParameterSet z = params({0, 0}, {0, 0}, {0, 0});
        const ParameterSet tz = transpose_parameter_set(z);
        CHECK(tz.beta == z.beta);
        CHECK(tz.gamma1 == z.gamma1);
    }
    SUBCASE("involution is bit-exact") {
        const ParameterSet tt = transpose_parameter_set(transpose_parameter_set(p));
        CHECK(tt.beta == p.beta);
        CHECK(tt.gamma1 == p.gamma1);
        CHECK(tt.gamma2 == p.gamma2);
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    const ObservedDataset data = testutil::random_dataset(70, 21);
    for (std::uint64_t s = 200; s < 220; ++s) {
        const ParameterSet p = testutil::random_params(s, 2.0);
        const Eigen::VectorXd ga = observed_loglik_gradient(p, data);
        const Eigen::VectorXd gf = testutil::fd_gradient(p, data, 1e-5);
        const double rel = (ga - gf).lpNorm<Eigen::Infinity>() /
                           std::max(1.0, gf.lpNorm<Eigen::Infinity>());
        CHECK(rel < 1e-4);
    }
}

TEST_CASE("gradient of the restricted models also matches finite differences") {
    const ObservedDataset data = testutil::random_dataset(60, 33);
    for (const Restriction r :
         {Restriction::perfect_specificity, Restriction::perfect_sensitivity}) {
        for (std::uint64_t s = 300; s < 306; ++s) {
            ParameterSet p = testutil::random_params(s, 1.5);
            if (r == Restriction::perfect_specificity)
                p.gamma2.resize(0);
            else
                p.gamma1.resize(0);
            const Eigen::VectorXd ga = observed_loglik_gradient(p, data, r);
            const Eigen::VectorXd gf = testutil::fd_gradient(p, data, 1e-5, r);
            CHECK((ga - gf).lpNorm<Eigen::Infinity>() /
                      std::max(1.0, gf.lpNorm<Eigen::Infinity>()) <
                  1e-4);
        }
    }
}

TEST_CASE("dataset validation") {
    Eigen::MatrixXd x(2, 2), z(2, 2);
    x << 1, 0.5, 1, -0.5;
    z << 1, 0.2, 1, 0.9;
    Eigen::VectorXi good(2), bad(2);
    good << 1, 2;
    bad << 1, 3;
    CHECK_NOTHROW(ObservedDataset(good, x, z));
    CHECK_THROWS_AS(ObservedDataset(bad, x, z), ValidationError);

    Eigen::MatrixXd no_intercept = x;
    no_intercept(0, 0) = 0.0;
    CHECK_THROWS_AS(ObservedDataset(good, no_intercept, z), ValidationError);

    CHECK_FALSE(ObservedDataset(good, x, z).identifiable());
    CHECK(testutil::random_dataset(20, 1).identifiable());
}

TEST_CASE("coefficient naming and packing round trip") {
    const auto names = coefficient_names(3, 2);
    CHECK(names == std::vector<std::string>{"beta_0", "beta_x1", "beta_x2", "gamma_110",
                                            "gamma_11z1", "gamma_120", "gamma_12z1"});
    const auto spec_names = coefficient_names(2, 2, Restriction::perfect_specificity);
    CHECK(spec_names == std::vector<std::string>{"beta_0", "beta_x1", "gamma_110", "gamma_11z1"});

    const ParameterSet p = params({1, 2}, {3, 4}, {5, 6});
    const Eigen::VectorXd theta = pack_parameters(p);
    const ParameterSet back = unpack_parameters(theta, 2, 2);
    CHECK(back.beta == p.beta);
    CHECK(back.gamma1 == p.gamma1);
    CHECK(back.gamma2 == p.gamma2);
}
