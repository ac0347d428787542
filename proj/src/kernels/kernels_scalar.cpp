#include <cmath>

#include "khan/kernels.hpp"

namespace khan::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc[16] = {};
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16)
        for (int l = 0; l < 16; ++l) acc[l] += a[i + l] * b[i + l];
    // Fold order mirrors the AVX2 register tree: (r0+r2)+(r1+r3), then lanes.
    double c[4];
    for (int l = 0; l < 4; ++l) c[l] = (acc[l] + acc[8 + l]) + (acc[4 + l] + acc[12 + l]);
    double s = (c[0] + c[1]) + (c[2] + c[3]);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = std::fabs(a[i] - b[i]);
        if (t > m) m = t;
    }
    return m;
}

}  // namespace khan::kernels::scalar
