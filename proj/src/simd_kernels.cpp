#include "sbsvie/simd_kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace sbsvie::kernels {

namespace {

double s_sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double s_dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double s_dot3(const double* x, const double* y, const double* z, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i] * z[i];
    return acc;
}

double s_sumsq(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

double s_wsumsq(const double* w, const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += w[i] * x[i] * x[i];
    return acc;
}

void s_axpy(double* y, double a, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void s_addmul(double* y, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a[i] * b[i];
}

void s_scale(double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void s_power_sums(const double* x, std::size_t n, int maxp, double* out) {
    for (int p = 0; p <= maxp; ++p) out[p] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double xp = 1.0;
        out[0] += 1.0;
        for (int p = 1; p <= maxp; ++p) {
            xp *= x[i];
            out[p] += xp;
        }
    }
}

void s_weighted_power_sums(const double* x, const double* v, std::size_t n, int maxp,
                           double* out) {
    for (int p = 0; p <= maxp; ++p) out[p] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double xp = v[i];
        out[0] += xp;
        for (int p = 1; p <= maxp; ++p) {
            xp *= x[i];
            out[p] += xp;
        }
    }
}

void s_polyval(const double* x, std::size_t n, const double* c, int k, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = c[k - 1];
        for (int p = k - 2; p >= 0; --p) acc = acc * x[i] + c[p];
        out[i] = acc;
    }
}

void s_polyval_add(const double* x, std::size_t n, const double* c, int k, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = c[k - 1];
        for (int p = k - 2; p >= 0; --p) acc = acc * x[i] + c[p];
        out[i] += acc;
    }
}

const KernelTable g_scalar = {
    "scalar", s_sum,  s_dot,   s_dot3,       s_sumsq,
    s_wsumsq, s_axpy, s_addmul, s_scale,     s_power_sums,
    s_weighted_power_sums, s_polyval, s_polyval_add,
};

const KernelTable* pick_default() {
#ifdef SBSVIE_BUILD_AVX2
#if defined(__GNUC__) || defined(__clang__)
    if (__builtin_cpu_supports("avx2")) return &avx2_table();
#endif
#endif
#ifdef SBSVIE_BUILD_NEON
    return &neon_table();
#endif
    return &g_scalar;
}

const KernelTable* lookup(const std::string& name) {
    if (name == "scalar") return &g_scalar;
#ifdef SBSVIE_BUILD_AVX2
#if defined(__GNUC__) || defined(__clang__)
    if (name == "avx2" && __builtin_cpu_supports("avx2")) return &avx2_table();
#endif
#endif
#ifdef SBSVIE_BUILD_NEON
    if (name == "neon") return &neon_table();
#endif
    return nullptr;
}

const KernelTable* init_active() {
    if (const char* env = std::getenv("SBSVIE_KERNEL")) {
        if (const KernelTable* t = lookup(env)) return t;
    }
    return pick_default();
}

const KernelTable* g_active = nullptr;

} // namespace

const KernelTable& scalar_table() { return g_scalar; }

const KernelTable& active() {
    if (!g_active) g_active = init_active();
    return *g_active;
}

void force_backend(const std::string& name) {
    const KernelTable* t = lookup(name);
    if (!t) throw std::invalid_argument("kernel backend unavailable: " + name);
    g_active = t;
}

} // namespace sbsvie::kernels
