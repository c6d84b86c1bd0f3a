#include "gelunet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gelunet/errors.hpp"

namespace gelunet {

namespace {

constexpr double kLogDoubleMax = 709.0;

BoundResult from_log(double log_value) {
    BoundResult r;
    r.log_value = log_value;
    if (log_value > kLogDoubleMax) {
        r.value = std::numeric_limits<double>::infinity();
        r.overflowed = true;
    } else {
        r.value = std::exp(log_value);
    }
    return r;
}

double safe_log(double v) {
    if (v < 0.0) throw RequestError("bound: negative norm argument");
    if (v == 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(v);
}

double max_norm_power_log(const std::vector<double>& norms, int power) {
    // log of max_i (norms_i^power v 1)
    double best = 0.0;  // log(1)
    for (double v : norms) best = std::max(best, power * safe_log(v));
    return best;
}

}  // namespace

BoundResult product_bound(int k, double f_norm, double g_norm) {
    if (k < 0) throw RequestError("product_bound: negative order");
    if (f_norm == 0.0 || g_norm == 0.0) return BoundResult{0.0, -std::numeric_limits<double>::infinity(), false};
    return from_log(k * std::log(2.0) + safe_log(f_norm) + safe_log(g_norm));
}

BoundResult composition_bound(int n, int m, int d, double g_norm,
                              const std::vector<double>& f_norms) {
    if (n < 0 || m < 1 || d < 1) throw RequestError("composition_bound: bad shape arguments");
    if (g_norm == 0.0) return BoundResult{0.0, -std::numeric_limits<double>::infinity(), false};
    double base = 2.0 + 4.0 * std::log(static_cast<double>(n == 0 ? 1 : n)) +
                  std::log(static_cast<double>(m)) + 2.0 * std::log(static_cast<double>(d));
    double lg = std::log(16.0) + n * base + safe_log(g_norm) + max_norm_power_log(f_norms, n);
    return from_log(lg);
}

BoundResult composition_difference_bound(int n, int m, int d, double g_norm_np1,
                                         const std::vector<double>& f_norms,
                                         const std::vector<double>& ftilde_norms,
                                         double delta) {
    if (n < 0 || m < 1 || d < 1) throw RequestError("composition_difference_bound: bad shape arguments");
    if (delta < 0.0) throw RequestError("composition_difference_bound: negative delta");
    if (delta == 0.0 || g_norm_np1 == 0.0)
        return BoundResult{0.0, -std::numeric_limits<double>::infinity(), false};
    double base = 2.0 + 5.0 * std::log(static_cast<double>(n == 0 ? 1 : n)) +
                  2.0 * std::log(static_cast<double>(m)) + 2.0 * std::log(static_cast<double>(d));
    double factor = std::max(max_norm_power_log(f_norms, 2 * n),
                             max_norm_power_log(ftilde_norms, 2 * n));
    double lg = std::log(32.0) + n * base + safe_log(g_norm_np1) + safe_log(delta) + factor;
    return from_log(lg);
}

}  // namespace gelunet
