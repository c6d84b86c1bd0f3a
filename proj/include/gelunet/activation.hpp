#pragma once

#include <vector>

namespace gelunet {

// Everything here is pure and thread-safe. Scalar work runs in long double
// internally so that downstream cancellation-heavy assemblies keep headroom
// below the double noise floor.

inline constexpr int kMaxDerivativeOrder = 12;

// Standard normal CDF. erfc-based, with an asymptotic continuation for
// arguments below -37 where erfc underflows in double.
long double normal_cdf(long double x);
long double normal_pdf(long double x);

// GELU(x) = x * Phi(x). Total on finite inputs.
double gelu(double x);
long double gelu_ld(long double x);

// k-th derivative of GELU, 1 <= k <= kMaxDerivativeOrder.
// k = 1 uses Phi(x) + x*phi(x); k >= 2 uses the Hermite closed form
//   (-1)^k * phi(x) * (H_{k-2}(x) - H_k(x)).
double gelu_derivative(int k, double x);
long double gelu_derivative_ld(int k, long double x);

// Fills out[0..m] with GELU(x), dGELU(x), ..., d^m GELU(x). m <= max order.
void gelu_derivatives_ld(int m, long double x, long double* out);

// Probabilist's Hermite polynomial H_n evaluated by the three-term
// recurrence on values.
long double hermite_value(int n, long double x);

// Coefficient table for H_0..H_max_order, kept for testing the recurrence
// invariant; evaluation always goes through hermite_value.
struct HermiteTable {
    int max_order = 0;
    // coefficients[n][j] is the coefficient of x^j in H_n (integers stored as reals)
    std::vector<std::vector<double>> coefficients;

    static HermiteTable build(int max_order);
    double evaluate(int n, double x) const;
};

// Upper bound on |GELU|_{W^{k,inf}(R)}: 1 + 1/sqrt(2*pi) for k = 1,
// (k+1)*sqrt((k-2)!/(2*pi)) for k >= 2. Throws for k = 0.
double gelu_seminorm_bound(int k);

// 2 * exp(-A^2/4) * sqrt(m!), bounding both ||GELU - id|| on [A, inf) and
// ||GELU|| on (-inf, -A] in W^{m,inf}.
double gelu_tail_bound(int m, double A);

// log(n!) via lgamma; exact table below 21!.
double log_factorial(int n);
double factorial(int n);

}  // namespace gelunet
