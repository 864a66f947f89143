// AVX2 variants of the Monte Carlo inner-loop primitives. Element-wise ops use
// separate mul/add (no FMA) so results match the scalar reference bit for bit;
// reductions keep one 4-lane accumulator folded once at the end.

#include "sbsvie/simd_kernels.hpp"

#ifdef SBSVIE_BUILD_AVX2

#include <immintrin.h>

namespace sbsvie::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d s2 = _mm_add_pd(lo, hi);
    __m128d s1 = _mm_add_sd(s2, _mm_unpackhi_pd(s2, s2));
    return _mm_cvtsd_f64(s1);
}

double v_sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i];
    return r;
}

double v_dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, p);
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

double v_dot3(const double* x, const double* y, const double* z, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(p, _mm256_loadu_pd(z + i)));
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i] * y[i] * z[i];
    return r;
}

double v_sumsq(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i] * x[i];
    return r;
}

double v_wsumsq(const double* w, const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_mul_pd(v, v));
        acc = _mm256_add_pd(acc, p);
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += w[i] * x[i] * x[i];
    return r;
}

void v_axpy(double* y, double a, const double* x, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
    }
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void v_addmul(double* y, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), p));
    }
    for (; i < n; ++i) y[i] = y[i] + a[i] * b[i];
}

void v_scale(double* x, double a, std::size_t n) {
    __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
    for (; i < n; ++i) x[i] *= a;
}

void v_power_sums(const double* x, std::size_t n, int maxp, double* out) {
    __m256d acc[17];
    for (int p = 0; p <= maxp; ++p) acc[p] = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        __m256d xp = _mm256_set1_pd(1.0);
        acc[0] = _mm256_add_pd(acc[0], xp);
        for (int p = 1; p <= maxp; ++p) {
            xp = _mm256_mul_pd(xp, v);
            acc[p] = _mm256_add_pd(acc[p], xp);
        }
    }
    for (int p = 0; p <= maxp; ++p) out[p] = hsum(acc[p]);
    for (; i < n; ++i) {
        double xp = 1.0;
        out[0] += 1.0;
        for (int p = 1; p <= maxp; ++p) {
            xp *= x[i];
            out[p] += xp;
        }
    }
}

void v_weighted_power_sums(const double* x, const double* v, std::size_t n, int maxp,
                           double* out) {
    __m256d acc[17];
    for (int p = 0; p <= maxp; ++p) acc[p] = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d xp = _mm256_loadu_pd(v + i);
        acc[0] = _mm256_add_pd(acc[0], xp);
        for (int p = 1; p <= maxp; ++p) {
            xp = _mm256_mul_pd(xp, vx);
            acc[p] = _mm256_add_pd(acc[p], xp);
        }
    }
    for (int p = 0; p <= maxp; ++p) out[p] = hsum(acc[p]);
    for (; i < n; ++i) {
        double xp = v[i];
        out[0] += xp;
        for (int p = 1; p <= maxp; ++p) {
            xp *= x[i];
            out[p] += xp;
        }
    }
}

void v_polyval(const double* x, std::size_t n, const double* c, int k, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        __m256d acc = _mm256_set1_pd(c[k - 1]);
        for (int p = k - 2; p >= 0; --p)
            acc = _mm256_add_pd(_mm256_mul_pd(acc, v), _mm256_set1_pd(c[p]));
        _mm256_storeu_pd(out + i, acc);
    }
    for (; i < n; ++i) {
        double acc = c[k - 1];
        for (int p = k - 2; p >= 0; --p) acc = acc * x[i] + c[p];
        out[i] = acc;
    }
}

void v_polyval_add(const double* x, std::size_t n, const double* c, int k, double* out) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        __m256d acc = _mm256_set1_pd(c[k - 1]);
        for (int p = k - 2; p >= 0; --p)
            acc = _mm256_add_pd(_mm256_mul_pd(acc, v), _mm256_set1_pd(c[p]));
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), acc));
    }
    for (; i < n; ++i) {
        double acc = c[k - 1];
        for (int p = k - 2; p >= 0; --p) acc = acc * x[i] + c[p];
        out[i] += acc;
    }
}

const KernelTable g_avx2 = {
    "avx2",   v_sum,  v_dot,    v_dot3,   v_sumsq,
    v_wsumsq, v_axpy, v_addmul, v_scale,  v_power_sums,
    v_weighted_power_sums, v_polyval, v_polyval_add,
};

} // namespace

const KernelTable& avx2_table() { return g_avx2; }

} // namespace sbsvie::kernels

#endif // SBSVIE_BUILD_AVX2
