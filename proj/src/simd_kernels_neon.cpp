// NEON (aarch64) variants. Same contract as the AVX2 table: element-wise ops
// avoid FMA so they match the scalar reference exactly; reductions fold a
// 2-lane accumulator once at the end.

#include "sbsvie/simd_kernels.hpp"

#ifdef SBSVIE_BUILD_NEON

#include <arm_neon.h>

namespace sbsvie::kernels {

namespace {

inline double hsum(float64x2_t v) { return vgetq_lane_f64(v, 0) + vgetq_lane_f64(v, 1); }

double v_sum(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i];
    return r;
}

double v_dot(const double* x, const double* y, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i] * y[i];
    return r;
}

double v_dot3(const double* x, const double* y, const double* z, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t p = vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
        acc = vaddq_f64(acc, vmulq_f64(p, vld1q_f64(z + i)));
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i] * y[i] * z[i];
    return r;
}

double v_sumsq(const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        acc = vaddq_f64(acc, vmulq_f64(v, v));
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += x[i] * x[i];
    return r;
}

double v_wsumsq(const double* w, const double* x, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(w + i), vmulq_f64(v, v)));
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += w[i] * x[i] * x[i];
    return r;
}

void v_axpy(double* y, double a, const double* x, std::size_t n) {
    float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
    for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void v_addmul(double* y, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i),
                                   vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i))));
    for (; i < n; ++i) y[i] = y[i] + a[i] * b[i];
}

void v_scale(double* x, double a, std::size_t n) {
    float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(vld1q_f64(x + i), va));
    for (; i < n; ++i) x[i] *= a;
}

void v_power_sums(const double* x, std::size_t n, int maxp, double* out) {
    float64x2_t acc[17];
    for (int p = 0; p <= maxp; ++p) acc[p] = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        float64x2_t xp = vdupq_n_f64(1.0);
        acc[0] = vaddq_f64(acc[0], xp);
        for (int p = 1; p <= maxp; ++p) {
            xp = vmulq_f64(xp, v);
            acc[p] = vaddq_f64(acc[p], xp);
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
    float64x2_t acc[17];
    for (int p = 0; p <= maxp; ++p) acc[p] = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vx = vld1q_f64(x + i);
        float64x2_t xp = vld1q_f64(v + i);
        acc[0] = vaddq_f64(acc[0], xp);
        for (int p = 1; p <= maxp; ++p) {
            xp = vmulq_f64(xp, vx);
            acc[p] = vaddq_f64(acc[p], xp);
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
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        float64x2_t acc = vdupq_n_f64(c[k - 1]);
        for (int p = k - 2; p >= 0; --p)
            acc = vaddq_f64(vmulq_f64(acc, v), vdupq_n_f64(c[p]));
        vst1q_f64(out + i, acc);
    }
    for (; i < n; ++i) {
        double acc = c[k - 1];
        for (int p = k - 2; p >= 0; --p) acc = acc * x[i] + c[p];
        out[i] = acc;
    }
}

void v_polyval_add(const double* x, std::size_t n, const double* c, int k, double* out) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t v = vld1q_f64(x + i);
        float64x2_t acc = vdupq_n_f64(c[k - 1]);
        for (int p = k - 2; p >= 0; --p)
            acc = vaddq_f64(vmulq_f64(acc, v), vdupq_n_f64(c[p]));
        vst1q_f64(out + i, vaddq_f64(vld1q_f64(out + i), acc));
    }
    for (; i < n; ++i) {
        double acc = c[k - 1];
        for (int p = k - 2; p >= 0; --p) acc = acc * x[i] + c[p];
        out[i] += acc;
    }
}

const KernelTable g_neon = {
    "neon",   v_sum,  v_dot,    v_dot3,   v_sumsq,
    v_wsumsq, v_axpy, v_addmul, v_scale,  v_power_sums,
    v_weighted_power_sums, v_polyval, v_polyval_add,
};

} // namespace

const KernelTable& neon_table() { return g_neon; }

} // namespace sbsvie::kernels

#endif // SBSVIE_BUILD_NEON
