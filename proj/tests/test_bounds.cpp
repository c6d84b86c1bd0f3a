#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gelunet/bounds.hpp"
#include "gelunet/errors.hpp"
#include "gelunet/jet.hpp"
#include "gelunet/network.hpp"

using namespace gelunet;

namespace {
constexpr double kE2 = 7.38905609893065;  // e^2

Network random_scalar_net(std::mt19937_64& rng, double weight_scale) {
    std::uniform_real_distribution<double> w(-weight_scale, weight_scale);
    Network n;
    n.input_dim = n.output_dim = 1;
    Layer l1 = Layer::zeros(3, 1);
    for (double& v : l1.weight) v = w(rng);
    for (double& v : l1.shift) v = w(rng);
    Layer l2 = Layer::zeros(1, 3);
    for (double& v : l2.weight) v = w(rng);
    for (double& v : l2.shift) v = w(rng);
    n.layers = {l1, l2};
    return n;
}

// grid estimate of ||f||_{W^{k,inf}([-1,1])} through the jet engine
double grid_sobolev_norm(const Network& n, int k) {
    double best = 0.0;
    for (int t = 0; t <= 200; ++t) {
        double x = -1.0 + 2.0 * t / 200.0;
        Jet j = partials(n, {x}, k, 0);
        for (int order = 0; order <= k; ++order)
            best = std::max(best, std::fabs(j.partial({order})));
    }
    return best;
}

}  // namespace

TEST_CASE("product bound") {
    CHECK(product_bound(0, 1.7, 2.5).value == doctest::Approx(1.7 * 2.5));
    CHECK(product_bound(3, 1.0, 1.0).value == doctest::Approx(8.0));
    CHECK(product_bound(2, 0.5, 4.0).value == doctest::Approx(8.0));
    CHECK(product_bound(2, 0.0, 4.0).value == 0.0);
    CHECK_THROWS_AS(product_bound(2, -1.0, 4.0), RequestError);
}

TEST_CASE("composition bound") {
    // n = 0 collapses the exponent
    CHECK(composition_bound(0, 1, 1, 3.0, {100.0}).value == doctest::Approx(16.0 * 3.0));
    CHECK(composition_bound(1, 1, 1, 1.0, {1.0}).value == doctest::Approx(16.0 * kE2));
    double expected = 16.0 * std::pow(kE2 * 16.0 * 2.0, 2) * 3.0 * 4.0;
    CHECK(composition_bound(2, 2, 1, 3.0, {2.0, 0.5}).value == doctest::Approx(expected));
}

TEST_CASE("composition difference bound") {
    CHECK(composition_difference_bound(2, 1, 1, 5.0, {1.0}, {1.0}, 0.0).value == 0.0);
    // 32 (e^2 n^5 m^2 d^2)^n * g * delta * max(1, f^{2n}, ftilde^{2n})
    double expected = 32.0 * (kE2 * 1.0) * 2.0 * 0.25 * 1.0;
    CHECK(composition_difference_bound(1, 1, 1, 2.0, {0.5}, {0.5}, 0.25).value ==
          doctest::Approx(expected));
    double e2 = 32.0 * std::pow(kE2 * 32.0 * 4.0 * 1.0, 2) * 1.5 * 0.1 * std::pow(2.0, 4);
    CHECK(composition_difference_bound(2, 2, 1, 1.5, {2.0, 1.0}, {0.5, 0.5}, 0.1).value ==
          doctest::Approx(e2));
}

TEST_CASE("bounds are monotone in every norm argument") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int t = 0; t < 50; ++t) {
        double a = u(rng), b = u(rng), bump = u(rng);
        CHECK(product_bound(3, a + bump, b).value >= product_bound(3, a, b).value);
        CHECK(product_bound(3, a, b + bump).value >= product_bound(3, a, b).value);
        CHECK(composition_bound(2, 2, 2, a + bump, {b, b}).value >=
              composition_bound(2, 2, 2, a, {b, b}).value);
        CHECK(composition_bound(2, 2, 2, a, {b + bump, b}).value >=
              composition_bound(2, 2, 2, a, {b, b}).value);
    }
}

TEST_CASE("overflow saturates to the log-space result") {
    BoundResult r = composition_bound(12, 8, 8, 1e300, {1e300});
    CHECK(r.overflowed);
    CHECK(std::isinf(r.value));
    CHECK(std::isfinite(r.log_value));
    BoundResult p = product_bound(4, 1e200, 1e200);
    CHECK(p.overflowed);
    CHECK(p.log_value == doctest::Approx(4.0 * std::log(2.0) + 2.0 * std::log(1e200)));
}

TEST_CASE("bounds dominate measured norms on random pairs") {
    std::mt19937_64 rng(29);
    int checked = 0;
    for (int t = 0; t < 20; ++t) {
        Network f = random_scalar_net(rng, 1.0);
        Network g = random_scalar_net(rng, 1.0);
        const int k = 2;
        double nf = grid_sobolev_norm(f, k);
        double ng = grid_sobolev_norm(g, k);

        // product f * g measured via a jet of the pair through a virtual product
        double measured_prod = 0.0;
        for (int s = 0; s <= 100; ++s) {
            double x = -1.0 + 2.0 * s / 100.0;
            Jet jf = partials(f, {x}, k, 0);
            Jet jg = partials(g, {x}, k, 0);
            Jet prod = jet_multiply(jf, jg);
            for (int order = 0; order <= k; ++order)
                measured_prod = std::max(measured_prod, std::fabs(prod.partial({order})));
        }
        CHECK(measured_prod <= product_bound(k, nf, ng).value * (1.0 + 1e-9));

        // composition g(f(x)): the image of f on [-1,1] must sit inside the
        // domain where ng was measured
        if (grid_sobolev_norm(f, 0) <= 1.0) {
            Network gf = compose(g, f);
            double measured_comp = grid_sobolev_norm(gf, k);
            double bound = composition_bound(k, 1, 1, ng, {nf}).value;
            CHECK(measured_comp <= bound * (1.0 + 1e-9));
            ++checked;
        }
    }
    CHECK(checked >= 3);
}
