#pragma once

#include <map>
#include <string>
#include <vector>

#include "gelunet/certificate.hpp"
#include "gelunet/network.hpp"

namespace gelunet {

struct BuildResult {
    Network network;
    BuildCertificate certificate;
};

struct PartitionBuildResult {
    std::vector<Network> networks;
    BuildCertificate certificate;
};

// One constructor per target. Each resolves its construction-level sub-budgets from
// the policy, assembles the network, runs the verification battery, and
// retries with tightened budgets up to policy.max_refinements before throwing
// RefinementError. Certificates are never returned unstamped.
BuildResult build_identity_shallow(double eps, int m, const BudgetPolicy& policy = {});
BuildResult build_identity_deep(double eps, int m, int depth, double K,
                                const BudgetPolicy& policy = {});
BuildResult build_heaviside(double eps, int m, double kappa, const BudgetPolicy& policy = {});
PartitionBuildResult build_partition_of_unity(double eps, int m, int N,
                                              const BudgetPolicy& policy = {});
BuildResult build_clip(double eps, int m, double A, const BudgetPolicy& policy = {});
BuildResult build_square(double eps, int m, const BudgetPolicy& policy = {});
BuildResult build_mul2(double eps, int m, const BudgetPolicy& policy = {});
BuildResult build_prod_d(double eps, int m, int d, double K, const BudgetPolicy& policy = {});
BuildResult build_monomial(double eps, int m, const std::vector<int>& exponents, double K,
                           const BudgetPolicy& policy = {});
BuildResult build_polynomial(double eps, int m,
                             const std::vector<std::pair<std::vector<int>, double>>& coefficients,
                             double K, const BudgetPolicy& policy = {});
BuildResult build_exp(double eps, int m, double A, const BudgetPolicy& policy = {});
BuildResult build_reciprocal_naive(double eps, int m, double a, double b,
                                   const BudgetPolicy& policy = {});
BuildResult build_reciprocal(double eps, int m, int N, const BudgetPolicy& policy = {});
BuildResult build_division(double eps, int m, int N, const BudgetPolicy& policy = {});

// Dispatch on a request. partition_of_unity is not reachable here (its result
// is a family); use build_partition_of_unity directly.
BuildResult build(const BuildRequest& request, const BudgetPolicy& policy = {});

// Deterministic map of the proof-level epsilon symbols for the target,
// straight from the proof formulas (no feasibility clamping).
std::map<std::string, double> allocate_budgets(const BuildRequest& request,
                                               const BudgetPolicy& policy = {});

// Pads `net` with an identity chain so the result has exactly target_depth
// layers. `scale` must cover the magnitude of the values passing through.
Network equalize_depth(const Network& net, int target_depth, int m, double eps_id, double scale);

}  // namespace gelunet
