#pragma once

#include <map>
#include <string>
#include <vector>

#include "gelunet/network.hpp"

namespace gelunet {

enum class Target {
    identity_shallow,
    identity_deep,
    heaviside,
    partition_of_unity,
    clip,
    square,
    mul2,
    prod_d,
    monomial,
    polynomial,
    exp_neg,
    reciprocal_naive,
    reciprocal,
    division,
};

std::string target_name(Target t);
Target target_from_name(const std::string& name);

// What to build and with which construction parameters. Fields beyond (target, eps,
// order) are read per target; unused ones are ignored.
struct BuildRequest {
    Target target = Target::square;
    double eps = 1e-3;
    int order = 1;

    int depth = 2;        // identity_deep
    double scale = 1.0;   // K for identity_deep / prod_d / monomial / polynomial
    double kappa = 0.5;   // heaviside
    int knots = 3;        // N for partition_of_unity / reciprocal / division
    double clip_a = 1.0;  // clip
    int dim = 2;          // d for prod_d
    std::vector<int> multi;  // monomial exponents (length I)
    std::vector<std::pair<std::vector<int>, double>> coefficients;  // polynomial terms
    double rec_a = 0.5, rec_b = 1.0;  // reciprocal_naive
    double exp_a = 0.5;               // exp_neg

    void validate() const;  // throws RequestError on precondition violations
};

// Tunable constants hiding inside the proofs' "asymptotically equal" choices.
struct BudgetPolicy {
    double asymptotic_constant = 1.0;
    double backoff_factor = 0.1;
    int max_refinements = 6;

    void validate() const;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double allowed = 0.0;
};

struct VerificationSummary {
    bool verified = false;  // battery has run
    bool pass = false;
    double measured_error = 0.0;
    std::vector<CheckResult> checks;
};

// Echo of the request, the proof-level sub-budgets actually used, the audited
// configuration, and the verification summary filled by the verify module.
struct BuildCertificate {
    BuildRequest request;
    std::map<std::string, double> sub_budgets;
    NetworkConfig config;
    VerificationSummary summary;
    double noise_floor = 0.0;
    double global_bound = 0.0;  // probe-level bound on |phi| used by far-field checks
    int refinements_used = 0;

    std::string to_json() const;
};

}  // namespace gelunet
