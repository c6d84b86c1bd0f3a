#pragma once

// Test-only high-precision oracle: GELU in __float128 plus central finite
// differences. Independent of the library's Hermite closed forms.

#include <quadmath.h>

inline __float128 gelu_q(__float128 x) {
    const __float128 inv_sqrt2 = 0.7071067811865475244008443621048490Q;
    return x * 0.5Q * erfcq(-x * inv_sqrt2);
}

// k-th central difference of gelu_q at x, truncation order 2.
inline __float128 fd_gelu_q(int k, __float128 x) {
    const __float128 eps = FLT128_EPSILON;
    __float128 h = powq(eps, 1.0Q / (k + 2)) * (1.0Q + fabsq(x));
    switch (k) {
        case 1: return (gelu_q(x + h) - gelu_q(x - h)) / (2.0Q * h);
        case 2: return (gelu_q(x + h) - 2.0Q * gelu_q(x) + gelu_q(x - h)) / (h * h);
        case 3:
            return (gelu_q(x + 2 * h) - 2.0Q * gelu_q(x + h) + 2.0Q * gelu_q(x - h) -
                    gelu_q(x - 2 * h)) /
                   (2.0Q * h * h * h);
        case 4:
            return (gelu_q(x + 2 * h) - 4.0Q * gelu_q(x + h) + 6.0Q * gelu_q(x) -
                    4.0Q * gelu_q(x - h) + gelu_q(x - 2 * h)) /
                   (h * h * h * h);
        default: return 0.0Q;
    }
}
