#pragma once

#include <string>
#include <vector>

namespace gelunet {

// Closed-form Sobolev calculus used by the budget allocators. All bounds are
// computed in log-space first; `value` saturates to +inf when the linear
// number would overflow and `overflowed` is set.
struct BoundResult {
    double value = 0.0;
    double log_value = 0.0;
    bool overflowed = false;
};

struct SobolevBudget {
    int order = 0;
    std::string domain_note;
    double value = 0.0;
};

// ||f*g||_{W^{k,inf}} <= 2^k ||f|| ||g||.
BoundResult product_bound(int k, double f_norm, double g_norm);

// ||g o f||_{W^{n,inf}} <= 16 (e^2 n^4 m d^2)^n ||g|| max_i(||f_i||^n v 1),
// with m inner outputs and d inner inputs. n = 0 collapses to 16 ||g||.
BoundResult composition_bound(int n, int m, int d, double g_norm,
                              const std::vector<double>& f_norms);

// ||g o f - g o f~|| <= 32 (e^2 n^5 m^2 d^2)^n ||g||_{W^{n+1}} delta
//   * max_i (1 v ||f_i||^{2n} v ||f~_i||^{2n}).
BoundResult composition_difference_bound(int n, int m, int d, double g_norm_np1,
                                         const std::vector<double>& f_norms,
                                         const std::vector<double>& ftilde_norms,
                                         double delta);

}  // namespace gelunet
