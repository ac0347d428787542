#include <immintrin.h>

#include <cmath>

#include "khan/kernels.hpp"

namespace khan::kernels::avx2 {

double dot(const double* a, const double* b, std::size_t n) {
    __m256d r0 = _mm256_setzero_pd(), r1 = _mm256_setzero_pd();
    __m256d r2 = _mm256_setzero_pd(), r3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        r0 = _mm256_add_pd(r0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        r1 = _mm256_add_pd(r1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
        r2 = _mm256_add_pd(r2, _mm256_mul_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8)));
        r3 = _mm256_add_pd(r3, _mm256_mul_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12)));
    }
    const __m256d c = _mm256_add_pd(_mm256_add_pd(r0, r2), _mm256_add_pd(r1, r3));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, c);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
    }
    for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        m = _mm256_max_pd(m, _mm256_andnot_pd(sign, d));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = 0.0;
    for (double v : lanes)
        if (v > r) r = v;
    for (; i < n; ++i) {
        const double t = std::fabs(a[i] - b[i]);
        if (t > r) r = t;
    }
    return r;
}

}  // namespace khan::kernels::avx2
