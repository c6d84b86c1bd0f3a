#pragma once

#include <memory>
#include <vector>

#include "gelunet/network.hpp"

namespace gelunet {

using MultiIndex = std::vector<int>;

// Shared descriptor for truncated Taylor polynomials in n variables up to
// total order m: the graded multi-index basis plus a pairwise product table.
class JetSpace {
  public:
    static std::shared_ptr<const JetSpace> make(int variables, int order);

    int variables() const { return n_; }
    int order() const { return m_; }
    int size() const { return static_cast<int>(indices_.size()); }
    const MultiIndex& index(int i) const { return indices_[i]; }
    int position(const MultiIndex& k) const;  // -1 if |k| > order
    // Product target for basis entries i and j; -1 when the result truncates away.
    int product_target(int i, int j) const {
        return product_[static_cast<size_t>(i) * indices_.size() + j];
    }
    long double index_factorial(int i) const { return factorials_[i]; }

  private:
    JetSpace(int n, int m);
    int n_, m_;
    std::vector<MultiIndex> indices_;
    std::vector<int> product_;
    std::vector<long double> factorials_;  // k! per basis entry
};

// Truncated multivariate Taylor expansion. coefficient(k) = d^k f(x0) / k!.
struct Jet {
    std::shared_ptr<const JetSpace> space;
    std::vector<double> coefficients;

    double coefficient(const MultiIndex& k) const;
    double partial(const MultiIndex& k) const;  // coefficient * k!
    double value() const { return coefficients.empty() ? 0.0 : coefficients[0]; }
};

// Plain jet arithmetic, used by the expression oracle and tests.
Jet jet_constant(std::shared_ptr<const JetSpace> space, double v);
Jet jet_variable(std::shared_ptr<const JetSpace> space, int variable, double value);
Jet jet_add(const Jet& a, const Jet& b);
Jet jet_sub(const Jet& a, const Jet& b);
Jet jet_scale(Jet a, double s);
Jet jet_multiply(const Jet& a, const Jet& b);
// g(u) by truncated series substitution; derivs[j] = g^{(j)} at u.value().
Jet jet_compose_series(const Jet& u, const std::vector<double>& derivs);

// All partial derivatives of one output component at x, |k| <= order,
// propagated exactly through the layers (affine maps act linearly on
// coefficients, GELU composes by truncated Horner substitution).
Jet partials(const Network& net, const std::vector<double>& x, int order, int output_index);

// Same propagation, returning every output component's jet; shares the
// forward pass across components.
std::vector<Jet> partials_all(const Network& net, const std::vector<double>& x, int order);

}  // namespace gelunet
