#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gelunet/activation.hpp"
#include "gelunet/builders.hpp"
#include "gelunet/errors.hpp"
#include "gelunet/jet.hpp"
#include "gelunet/verify.hpp"

using namespace gelunet;

TEST_CASE("shallow identity") {
    BuildResult r = build_identity_shallow(1e-3, 3);
    CHECK(r.certificate.summary.pass);
    CHECK(r.certificate.config.depth == 2);
    CHECK(r.certificate.config.max_width() == 1);
    CHECK(r.certificate.config.nonzeros <= 3);
    CHECK(evaluate(r.network, {0.0})[0] == 0.0);
    Oracle id{.kind = Oracle::Kind::identity};
    SobolevReport rep =
        sobolev_error(r.network, id, GridSpec::box({{-2.0, 2.0}}, 512), 3, 4e-3);
    CHECK(rep.overall <= 4e-3);
}

TEST_CASE("deep identity") {
    // L = 2 degenerates to the clip alone
    BuildResult two = build_identity_deep(1e-2, 1, 2, 1.0);
    CHECK(two.certificate.config.depth == 2);
    double worst = 0.0;
    for (int t = 0; t <= 200; ++t) {
        double x = -1.0 + 2.0 * t / 200.0;
        worst = std::max(worst, std::fabs(evaluate(two.network, {x})[0] - x));
    }
    CHECK(worst <= 1e-2);

    // S grows affinely with L
    long long s2 = build_identity_deep(1e-2, 2, 2, 1.0).certificate.config.nonzeros;
    long long s4 = build_identity_deep(1e-2, 2, 4, 1.0).certificate.config.nonzeros;
    long long s8 = build_identity_deep(1e-2, 2, 8, 1.0).certificate.config.nonzeros;
    CHECK(s4 - s2 > 0);
    CHECK(s8 - s4 <= 2 * (s4 - s2));
    CHECK(s8 - s4 >= (s4 - s2) / 2);

    BuildResult r = build_identity_deep(1e-2, 2, 4, 2.0);
    CHECK(r.certificate.summary.pass);
    CHECK(r.certificate.config.depth == 4);
    CHECK(r.certificate.summary.measured_error <= 1e-2);
    CHECK_THROWS_AS(build_identity_deep(1e-2, 2, 1, 1.0), RequestError);
}

TEST_CASE("heaviside") {
    BuildResult r = build_heaviside(1e-2, 1, 0.25);
    CHECK(r.certificate.summary.pass);
    CHECK(r.certificate.config.depth == 2);
    CHECK(r.certificate.config.nonzeros <= 8);
    CHECK(std::fabs(evaluate(r.network, {0.0})[0] - 0.5) <= 1e-2);
    double worst = 0.0;
    for (int t = 0; t <= 500; ++t) {
        double x = 0.25 + (10.0 - 0.25) * t / 500.0;
        worst = std::max(worst, std::fabs(1.0 - evaluate(r.network, {x})[0]));
    }
    CHECK(worst <= 1e-2);
    CHECK_THROWS_AS(build_heaviside(1e-2, 1, 1.5), RequestError);
}

TEST_CASE("partition of unity") {
    PartitionBuildResult r = build_partition_of_unity(1e-2, 1, 3);
    CHECK(r.certificate.summary.pass);
    REQUIRE(r.networks.size() == 3);
    for (const Network& n : r.networks) CHECK(n.depth() == 2);
    double worst = 0.0;
    for (int t = 0; t <= 10000; ++t) {
        double x = -2.0 + 4.0 * t / 10000.0;
        long double s = 0.0L;
        for (const Network& n : r.networks) s += evaluate_ld(n, {x})[0];
        worst = std::max(worst, std::fabs(static_cast<double>(s - 1.0L)));
    }
    CHECK(worst <= 1e-12);
    // psi_1 right tail beyond a_2 = 1/2
    double tail = 0.0;
    for (int t = 0; t <= 500; ++t) {
        double x = 0.5 + 9.5 * t / 500.0;
        tail = std::max(tail, std::fabs(evaluate(r.networks[0], {x})[0]));
    }
    CHECK(tail <= 1e-2);
    CHECK_THROWS_AS(build_partition_of_unity(1e-2, 1, 2), RequestError);
}

TEST_CASE("clip") {
    BuildResult r = build_clip(1e-3, 2, 1.0);
    CHECK(r.certificate.summary.pass);
    CHECK(r.certificate.config.depth == 2);
    CHECK(r.certificate.config.max_width() == 2);
    CHECK(r.certificate.config.nonzeros == 7);
    CHECK(std::fabs(evaluate(r.network, {0.0})[0]) <= 1e-3);
    double ray = 0.0, sup = 0.0;
    for (int t = 0; t <= 500; ++t) {
        double x = 2.0 + 19.0 * t / 500.0;
        ray = std::max(ray, std::fabs(evaluate(r.network, {x})[0] - 1.5));
        sup = std::max(sup, std::fabs(evaluate(r.network, {x})[0]));
    }
    CHECK(ray <= 1e-3);
    CHECK(sup <= 3.5);
    CHECK_THROWS_AS(build_clip(1e-3, 2, 0.5), RequestError);
}

TEST_CASE("square") {
    BuildResult r = build_square(1e-3, 3);
    CHECK(r.certificate.summary.pass);
    CHECK(r.certificate.config.depth == 2);
    CHECK(r.certificate.config.max_width() == 2);
    CHECK(r.certificate.config.nonzeros <= 6);
    CHECK(evaluate(r.network, {0.0})[0] == 0.0);
    CHECK(std::fabs(evaluate(r.network, {1.5})[0] - 2.25) <= 8e-3);
    CHECK_THROWS_AS(build_square(1e-7, 3), RequestError);  // cancellation guard
}

TEST_CASE("mul2") {
    BuildResult r = build_mul2(1e-3, 2);
    CHECK(r.certificate.summary.pass);
    CHECK(r.certificate.config.depth == 2);
    CHECK(r.certificate.config.max_width() <= 4);
    CHECK(r.certificate.config.nonzeros <= 12);
    CHECK(std::fabs(evaluate(r.network, {1.2, -0.8})[0] + 0.96) <= 8e-3);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    for (int t = 0; t < 200; ++t)
        CHECK(std::fabs(evaluate(r.network, {u(rng), 0.0})[0]) <= 1e-12);
}

TEST_CASE("prod_d") {
    BuildResult r = build_prod_d(1e-2, 2, 3, 1.0);
    CHECK(r.certificate.summary.pass);
    // padded construction still equals the three-factor product
    Oracle pr{.kind = Oracle::Kind::product};
    SobolevReport rep = sobolev_error(
        r.network, pr, GridSpec::box({{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}}, 12), 2, 1e-2,
        r.certificate.noise_floor);
    CHECK(rep.overall <= 1e-2 + r.certificate.noise_floor);
    // far probe stays finite
    auto jets = partials_all(r.network, {100.0, 100.0, 100.0}, 2);
    for (double c : jets[0].coefficients) CHECK(std::isfinite(c));
    // depth trend: L grows like log d
    int l2 = build_prod_d(5e-2, 1, 2, 1.0).certificate.config.depth;
    int l4 = build_prod_d(5e-2, 1, 4, 1.0).certificate.config.depth;
    int l8 = build_prod_d(5e-2, 1, 8, 1.0).certificate.config.depth;
    CHECK(l8 - l4 <= l4 - l2 + 2);
    CHECK_THROWS_AS(build_prod_d(1e-2, 2, 9, 1.0), RequestError);  // desk guard
    CHECK_THROWS_AS(build_prod_d(1e-2, 4, 4, 1.0), RequestError);
}

TEST_CASE("monomial") {
    BuildResult r = build_monomial(1e-2, 2, {2, 0}, 1.0);
    CHECK(r.certificate.summary.pass);
    // zero-exponent coordinate is structurally absent
    CHECK(std::fabs(evaluate(r.network, {0.37, 0.9})[0] -
                    evaluate(r.network, {0.37, -0.9})[0]) <= 1e-12);
    BuildResult xy = build_monomial(1e-2, 2, {1, 1}, 1.0);
    CHECK(std::fabs(evaluate(xy.network, {0.5, 0.5})[0] - 0.25) <= 1e-2);
    CHECK_THROWS_AS(build_monomial(1e-2, 2, {1, 0}, 1.0), RequestError);  // degree < 2
}

TEST_CASE("polynomial") {
    // degree <= 1 is exact
    BuildResult lin = build_polynomial(1e-2, 3, {{{1}, 1.0}}, 3.0);
    for (double x : {-3.0, -0.2, 0.0, 2.7}) CHECK(std::fabs(evaluate(lin.network, {x})[0] - x) <= 1e-12);

    // empty coefficients give the zero network
    BuildResult zero = build_polynomial(1e-2, 3, {}, 1.0);
    CHECK(evaluate(zero.network, {0.7})[0] == 0.0);

    // all-zero coefficients collapse to the constant-zero network too
    BuildResult zeros = build_polynomial(1e-2, 3, {{{2}, 0.0}, {{1}, 0.0}}, 1.0);
    CHECK(zeros.network.depth() == 1);
    for (double x : {-1.0, 0.3, 1.0}) CHECK(evaluate(zeros.network, {x})[0] == 0.0);

    BuildResult r = build_polynomial(1e-2, 3, {{{2, 0}, 1.0}, {{1, 1}, 1.0}}, 1.0);
    CHECK(r.certificate.summary.pass);
    CHECK(std::fabs(evaluate(r.network, {0.5, 0.25})[0] - (0.25 + 0.125)) <= 1e-2);

    CHECK_THROWS_AS(build_polynomial(1e-2, 3, {{{2}, 1.5}}, 1.0), RequestError);  // |a| > 1
    CHECK_THROWS_AS(build_polynomial(1e-2, 3, {{{2}, 0.5}, {{2}, 0.25}}, 1.0),
                    RequestError);  // duplicate index
    CHECK_THROWS_AS(build_polynomial(1e-2, 2, {{{2}, 1.0}}, 1.0), RequestError);  // m >= 3
}

TEST_CASE("exp") {
    BuildResult r = build_exp(1e-2, 3, 0.5);
    CHECK(r.certificate.summary.pass);
    CHECK(std::fabs(evaluate(r.network, {0.0})[0] - 1.0) <= 1e-2);
    CHECK(std::fabs(evaluate(r.network, {-0.5})[0] - std::exp(0.5)) <= 1e-2);
    double far = std::fabs(evaluate(r.network, {1000.0})[0]);
    CHECK(far <= r.certificate.global_bound);
    auto jets = partials_all(r.network, {1000.0}, 3);
    for (double c : jets[0].coefficients) CHECK(std::isfinite(c));
    CHECK_THROWS_AS(build_exp(1e-2, 3, 2.0), RequestError);  // A <= 1
}

TEST_CASE("naive reciprocal") {
    BuildResult r = build_reciprocal_naive(1e-2, 3, 0.5, 1.0);
    CHECK(r.certificate.summary.pass);
    // the series collapses to 1/b at x = b
    CHECK(std::fabs(evaluate(r.network, {1.0})[0] - 1.0) <= 1e-2);
    CHECK(std::fabs(evaluate(r.network, {0.5})[0] - 2.0) <= 1e-2);
    // clipped input keeps far-out evaluations bounded
    CHECK(std::fabs(evaluate(r.network, {-5.0})[0]) <= r.certificate.global_bound);
    CHECK_THROWS_AS(build_reciprocal_naive(1e-2, 3, 0.9, 1.0), RequestError);  // b/a < 5/4
    CHECK_THROWS_AS(build_reciprocal_naive(1e-2, 2, 0.5, 1.0), RequestError);  // m >= 3
}

TEST_CASE("reciprocal") {
    BuildResult r = build_reciprocal(1e-1, 3, 3);
    CHECK(r.certificate.summary.pass);
    CHECK(std::fabs(evaluate(r.network, {1.0})[0] - 1.0) <= 1e-1);
    CHECK(std::fabs(evaluate(r.network, {0.125})[0] - 8.0) <= 1e-1 * (1.0 + 64.0));
    CHECK_THROWS_AS(build_reciprocal(1e-1, 3, 7), RequestError);  // desk guard
}

TEST_CASE("allocate_budgets") {
    BudgetPolicy policy;
    BuildRequest sq;
    sq.target = Target::square;
    sq.eps = 1e-3;
    sq.order = 3;
    auto m1 = allocate_budgets(sq, policy);
    REQUIRE(m1.count("R") == 1);
    CHECK(m1.size() == 1);
    double c2 = 0.7978845608028654;
    CHECK(m1["R"] >= 10.0 * gelu_seminorm_bound(3) / (c2 * 1e-3));

    BuildRequest pd;
    pd.target = Target::prod_d;
    pd.eps = 1e-2;
    pd.order = 2;
    pd.dim = 4;
    pd.scale = 1.0;
    auto m2 = allocate_budgets(pd, policy);
    CHECK(m2["gamma_1"] == 0.0);
    int m_t = pd.order + 1;
    for (int j = 1; j <= 2; ++j)
        CHECK(m2["gamma_" + std::to_string(j)] <= (m_t + 3) * std::pow(4.0, j));

    // sub-budgets shrink monotonically as the constant grows
    BudgetPolicy doubled = policy;
    doubled.asymptotic_constant = 2.0;
    BuildRequest rec;
    rec.target = Target::reciprocal;
    rec.eps = 1e-1;
    rec.order = 3;
    rec.knots = 3;
    auto a = allocate_budgets(rec, policy);
    auto b = allocate_budgets(rec, doubled);
    for (const auto& [key, value] : a) CHECK(b.at(key) <= value * (1.0 + 1e-12));
}

TEST_CASE("builders never return silently failing certificates") {
    BudgetPolicy starve;
    starve.max_refinements = 0;
    // exp needs at least one escalation for its Taylor reach; with zero
    // refinements it must throw, carrying the last measured error
    CHECK_THROWS_AS(build_exp(1e-2, 3, 0.5, starve), RefinementError);
    try {
        build_exp(1e-2, 3, 0.5, starve);
    } catch (const RefinementError& e) {
        CHECK(e.last_measured_error > 1e-2);
    }
}

TEST_CASE("requests outside the construction preconditions are rejected") {
    CHECK_THROWS_AS(build_square(2.0, 3), RequestError);
    CHECK_THROWS_AS(build_square(0.0, 3), RequestError);
    BudgetPolicy bad;
    bad.backoff_factor = 1.5;
    CHECK_THROWS_AS(build_square(1e-3, 3, bad), RequestError);
}

TEST_CASE("certificates echo budgets and configuration") {
    BuildResult r = build_prod_d(1e-2, 2, 2, 1.0);
    for (const auto& [key, value] : r.certificate.sub_budgets) {
        CAPTURE(key);
        CHECK(value >= 0.0);
    }
    CHECK(r.certificate.sub_budgets.count("eps_mul_d") == 1);
    CHECK(r.certificate.sub_budgets.count("gamma_1") == 1);
    NetworkConfig cfg = audit(r.network);
    CHECK(cfg.depth == r.certificate.config.depth);
    CHECK(cfg.nonzeros == r.certificate.config.nonzeros);
    CHECK(cfg.magnitude == r.certificate.config.magnitude);
    std::string json = r.certificate.to_json();
    CHECK(json.find("\"sub_budgets\"") != std::string::npos);
    CHECK(json.find("\"verification\"") != std::string::npos);
}
