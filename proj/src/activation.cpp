#include "gelunet/activation.hpp"

#include <cmath>
#include <limits>

#include "gelunet/errors.hpp"

namespace gelunet {

namespace {

constexpr long double kSqrt2 = 1.41421356237309504880168872420969808L;
constexpr long double kInvSqrt2Pi = 0.39894228040143267793994605993438187L;

}  // namespace

long double normal_pdf(long double x) {
    return kInvSqrt2Pi * std::exp(-0.5L * x * x);
}

long double normal_cdf(long double x) {
    if (x >= -100.0L) {
        return 0.5L * std::erfc(-x / kSqrt2);
    }
    // Deep left tail: Phi(x) = phi(x)/|x| * (1 - 1/x^2 + 3/x^4 - 15/x^6).
    // erfcl underflows its intermediate exp(-x^2/2) around x = -106.
    long double inv2 = 1.0L / (x * x);
    long double series = 1.0L - inv2 * (1.0L - 3.0L * inv2 * (1.0L - 5.0L * inv2));
    return normal_pdf(x) / (-x) * series;
}

long double gelu_ld(long double x) { return x * normal_cdf(x); }

double gelu(double x) { return static_cast<double>(gelu_ld(x)); }

long double hermite_value(int n, long double x) {
    long double hm = 1.0L;  // H_0
    if (n == 0) return hm;
    long double h = x;  // H_1
    for (int j = 1; j < n; ++j) {
        long double next = x * h - static_cast<long double>(j) * hm;
        hm = h;
        h = next;
    }
    return h;
}

long double gelu_derivative_ld(int k, long double x) {
    if (k < 1) throw RequestError("gelu_derivative: order must be >= 1");
    if (k > kMaxDerivativeOrder)
        throw CapacityError("gelu_derivative: order " + std::to_string(k) +
                            " exceeds table capacity " + std::to_string(kMaxDerivativeOrder));
    if (k == 1) return normal_cdf(x) + x * normal_pdf(x);
    long double pdf = normal_pdf(x);
    if (pdf == 0.0L) return 0.0L;
    long double sign = (k % 2 == 0) ? 1.0L : -1.0L;
    return sign * pdf * (hermite_value(k - 2, x) - hermite_value(k, x));
}

double gelu_derivative(int k, double x) {
    return static_cast<double>(gelu_derivative_ld(k, x));
}

void gelu_derivatives_ld(int m, long double x, long double* out) {
    if (m > kMaxDerivativeOrder)
        throw CapacityError("gelu_derivatives: order exceeds capacity");
    out[0] = gelu_ld(x);
    if (m >= 1) out[1] = normal_cdf(x) + x * normal_pdf(x);
    if (m < 2) return;
    long double pdf = normal_pdf(x);
    if (pdf == 0.0L) {
        for (int k = 2; k <= m; ++k) out[k] = 0.0L;
        return;
    }
    // Run the Hermite recurrence once and reuse values for every order.
    long double hm = 1.0L, h = x;  // H_0, H_1
    for (int k = 2; k <= m; ++k) {
        long double next = x * h - static_cast<long double>(k - 1) * hm;
        // next = H_k, hm = H_{k-2}
        long double sign = (k % 2 == 0) ? 1.0L : -1.0L;
        out[k] = sign * pdf * (hm - next);
        hm = h;
        h = next;
    }
}

HermiteTable HermiteTable::build(int max_order) {
    if (max_order < 0 || max_order > 24)
        throw CapacityError("HermiteTable: order out of range");
    HermiteTable t;
    t.max_order = max_order;
    t.coefficients.resize(max_order + 1);
    t.coefficients[0] = {1.0};
    if (max_order >= 1) t.coefficients[1] = {0.0, 1.0};
    for (int n = 1; n < max_order; ++n) {
        const auto& hn = t.coefficients[n];
        const auto& hm = t.coefficients[n - 1];
        std::vector<double> next(n + 2, 0.0);
        for (size_t j = 0; j < hn.size(); ++j) next[j + 1] += hn[j];
        for (size_t j = 0; j < hm.size(); ++j) next[j] -= static_cast<double>(n) * hm[j];
        t.coefficients[n + 1] = std::move(next);
    }
    return t;
}

double HermiteTable::evaluate(int n, double x) const {
    if (n < 0 || n > max_order) throw CapacityError("HermiteTable: order out of range");
    const auto& c = coefficients[n];
    double acc = 0.0;
    for (size_t j = c.size(); j-- > 0;) acc = acc * x + c[j];
    return acc;
}

double log_factorial(int n) {
    if (n < 0) throw RequestError("log_factorial: negative argument");
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double factorial(int n) {
    if (n < 0) throw RequestError("factorial: negative argument");
    if (n <= 20) {
        double acc = 1.0;
        for (int j = 2; j <= n; ++j) acc *= j;
        return acc;
    }
    return std::exp(log_factorial(n));
}

double gelu_seminorm_bound(int k) {
    if (k < 1) throw RequestError("gelu_seminorm_bound: order must be >= 1");
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    if (k == 1) return 1.0 + 1.0 / std::sqrt(kTwoPi);
    return (k + 1) * std::sqrt(factorial(k - 2) / kTwoPi);
}

double gelu_tail_bound(int m, double A) {
    if (A < 0.0) throw RequestError("gelu_tail_bound: A must be >= 0");
    // 2 e^{-A^2/4} sqrt(m!), in logs so large A does not underflow prematurely.
    double lg = std::log(2.0) - A * A / 4.0 + 0.5 * log_factorial(m);
    return std::exp(lg);
}

}  // namespace gelunet
