#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gelunet/certificate.hpp"
#include "gelunet/jet.hpp"
#include "gelunet/network.hpp"

namespace gelunet {

struct GridSpec {
    std::vector<std::pair<double, double>> intervals;  // per-dimension [lo, hi]
    int points_per_dim = 64;
    std::vector<std::vector<double>> probe_points;  // extra far-field probes
    int zoom_rounds = 3;

    static GridSpec box(std::vector<std::pair<double, double>> intervals, int points);
};

// Analytic reference targets with closed-form partials.
struct Oracle {
    enum class Kind {
        identity,        // first coordinate
        square,
        product,         // prod of all coordinates
        monomial,        // prod x_i^{k_i}, exponents in `multi`
        polynomial,      // sum of a_k x^k over `terms`
        exp_neg,         // e^{-x}
        reciprocal,      // 1/x
        division,        // x/y
        heaviside_tails, // 0 (left) / 1 (right); usable only off (-kappa, kappa)
        clip_reference,  // id inside [-A, A], +-(A+1/2) outside [-A-1, A+1]
        expression,      // arbitrary callable jet
    };
    Kind kind = Kind::identity;
    std::vector<int> multi;
    std::vector<std::pair<std::vector<int>, double>> terms;
    double param = 0.0;  // kappa for heaviside tails, A for clip
    // for Kind::expression: evaluates all partials |k| <= order at x
    std::function<Jet(const std::vector<double>&, int)> jet_fn;

    int dimension() const;
    // d^k oracle(x) (the plain derivative, not divided by k!).
    double partial(const std::vector<double>& x, const MultiIndex& k) const;
};

struct IndexReport {
    MultiIndex k;
    double max_err = 0.0;
    std::vector<double> argmax;
};

struct SobolevReport {
    std::string target;
    double eps = 0.0;
    int order = 0;
    std::string grid_note;
    std::vector<IndexReport> per_index;
    double overall = 0.0;
    double noise_floor = 0.0;
    bool pass = false;

    std::string to_json() const;
};

// Grid + argmax-zoom estimate of ||net - oracle||_{W^{order,inf}} over the grid box.
SobolevReport sobolev_error(const Network& net, const Oracle& oracle, const GridSpec& grid,
                            int order, double eps, double noise_floor = 0.0,
                            int output_index = 0);

// Nested central differences, truncation order 2, per-order steps
// h_k = machine_eps^{1/(k+2)} * (1 + |x|) in the evaluation precision.
long double finite_difference_partial(
    const std::function<long double(const std::vector<long double>&)>& f,
    const std::vector<double>& x, const MultiIndex& k);

long double finite_difference_partial(const Network& net, const std::vector<double>& x,
                                      const MultiIndex& k, int output_index = 0);

// Runs the target-specific check battery, fills the
// verification summary, sets pass/fail. Returns the stamped certificate.
BuildCertificate check_certificate(const Network& net, BuildCertificate certificate,
                                   const BudgetPolicy& policy);

// Same battery, but also usable against a pou family (N networks).
BuildCertificate check_certificate_family(const std::vector<Network>& nets,
                                          BuildCertificate certificate,
                                          const BudgetPolicy& policy);

}  // namespace gelunet
