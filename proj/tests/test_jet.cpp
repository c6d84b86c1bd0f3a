#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gelunet/builders.hpp"
#include "gelunet/errors.hpp"
#include "gelunet/jet.hpp"
#include "gelunet/verify.hpp"

using namespace gelunet;

namespace {

Network random_net(std::mt19937_64& rng, int max_depth = 4, int max_width = 6) {
    std::uniform_int_distribution<int> depth_d(2, max_depth), width_d(1, max_width);
    std::uniform_real_distribution<double> w(-2.0, 2.0);
    int depth = depth_d(rng);
    std::vector<int> widths(depth + 1);
    for (int& v : widths) v = width_d(rng);
    widths[0] = std::min(widths[0], 3);
    Network n;
    n.input_dim = widths.front();
    n.output_dim = widths.back();
    for (int j = 0; j < depth; ++j) {
        Layer l = Layer::zeros(widths[j + 1], widths[j]);
        for (double& v : l.weight) v = w(rng);
        for (double& v : l.shift) v = w(rng);
        n.layers.push_back(std::move(l));
    }
    return n;
}

}  // namespace

TEST_CASE("identity network jets") {
    Network id = Network::affine(Layer::identity(1));
    for (double x : {-1.5, 0.0, 2.25}) {
        Jet j = partials(id, {x}, 2, 0);
        CHECK(j.partial({0}) == x);
        CHECK(j.partial({1}) == 1.0);
        CHECK(j.partial({2}) == 0.0);
    }
}

TEST_CASE("jet through a single GELU layer") {
    // 2 GELU(x) - 1 at 0: first partial is 2 * dGELU(0) = 1
    Network n;
    n.input_dim = n.output_dim = 1;
    Layer l1 = Layer::zeros(1, 1);
    l1.at(0, 0) = 1.0;
    Layer l2 = Layer::zeros(1, 1);
    l2.at(0, 0) = 2.0;
    l2.shift[0] = 1.0;
    n.layers = {l1, l2};
    Jet j = partials(n, {0.0}, 1, 0);
    CHECK(j.partial({0}) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(j.partial({1}) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("three-layer net matches finite differences at order 3") {
    std::mt19937_64 rng(101);
    Network n;
    do {
        n = random_net(rng, 3, 4);
    } while (n.input_dim != 2 || n.depth() != 3);
    std::vector<double> x{0.3, -0.7};
    Jet j = partials(n, x, 3, 0);
    auto sp = j.space;
    for (int i = 0; i < sp->size(); ++i) {
        const MultiIndex& k = sp->index(i);
        double mine = j.partial(k);
        double fd = static_cast<double>(finite_difference_partial(n, x, k, 0));
        CHECK(std::fabs(mine - fd) <= 1e-5 * std::max(1.0, std::fabs(fd)) + 1e-5);
    }
}

TEST_CASE("random networks match finite differences") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        Network n = random_net(rng);
        std::vector<double> x(n.input_dim);
        for (double& v : x) v = u(rng);
        int out = 0;
        Jet j = partials(n, x, 3, out);
        auto sp = j.space;
        for (int i = 0; i < sp->size(); ++i) {
            const MultiIndex& k = sp->index(i);
            double mine = j.partial(k);
            double fd = static_cast<double>(finite_difference_partial(n, x, k, out));
            // relative above unit scale, absolute 1e-4 below (the FD oracle's own
            // truncation dominates near derivative zeros)
            CHECK(std::fabs(mine - fd) <=
                  1e-4 * std::max({std::fabs(fd), std::fabs(mine), 1.0}) + 1e-8);
        }
    }
}

TEST_CASE("order zero jet equals plain evaluation") {
    std::mt19937_64 rng(55);
    Network n = random_net(rng);
    std::vector<double> x(n.input_dim, 0.21);
    auto jets = partials_all(n, x, 0);
    auto vals = evaluate(n, x);
    for (int i = 0; i < n.output_dim; ++i)
        CHECK(jets[i].value() == doctest::Approx(vals[i]).epsilon(1e-15));
}

TEST_CASE("jet arithmetic building blocks") {
    auto sp = JetSpace::make(1, 3);
    Jet x = jet_variable(sp, 0, 0.5);
    Jet one = jet_constant(sp, 1.0);
    // (1 + x)^2 = 1 + 2x + x^2 around 0.5
    Jet p = jet_multiply(jet_add(one, x), jet_add(one, x));
    CHECK(p.partial({0}) == doctest::Approx(2.25));
    CHECK(p.partial({1}) == doctest::Approx(3.0));
    CHECK(p.partial({2}) == doctest::Approx(2.0));
    CHECK(p.partial({3}) == doctest::Approx(0.0));

    // exp(-x) by series substitution
    std::vector<double> derivs(4);
    double v = std::exp(-0.5);
    for (int j = 0; j <= 3; ++j) derivs[j] = (j % 2 == 0) ? v : -v;
    Jet e = jet_compose_series(x, derivs);
    CHECK(e.partial({0}) == doctest::Approx(v));
    CHECK(e.partial({1}) == doctest::Approx(-v));
    CHECK(e.partial({2}) == doctest::Approx(v));
    CHECK(e.partial({3}) == doctest::Approx(-v));
}

TEST_CASE("coefficient count follows the binomial formula") {
    // C(n + m, m) coefficients
    CHECK(JetSpace::make(1, 3)->size() == 4);
    CHECK(JetSpace::make(2, 3)->size() == 10);
    CHECK(JetSpace::make(4, 2)->size() == 15);
}

TEST_CASE("capacity limits") {
    CHECK_THROWS_AS(JetSpace::make(1, 13), CapacityError);
    CHECK_THROWS_AS(JetSpace::make(9, 3), CapacityError);
    Network wide;
    wide.input_dim = wide.output_dim = 9;
    wide.layers.push_back(Layer::identity(9));
    CHECK_THROWS_AS(partials(wide, std::vector<double>(9, 0.0), 3, 0), CapacityError);
    // 9 variables at order 2 is fine
    CHECK(JetSpace::make(9, 2)->size() == 55);
}
