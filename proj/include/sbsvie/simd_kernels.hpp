#pragma once

#include <cstddef>
#include <string>

namespace sbsvie::kernels {

// Data-parallel primitives for the Monte Carlo inner loops. Every entry has a
// scalar reference implementation and (where built) an AVX2 / NEON variant.
//
// Contract:
//  - element-wise ops (axpy, addmul, scale, polyval*) produce bit-identical
//    results on every backend (no FMA contraction anywhere);
//  - reductions (sum, dot, dot3, sumsq, wsumsq, *power_sums) may reassociate;
//    backends agree to ~1e-13 relative accuracy (equivalence-tested);
//  - a fixed backend gives bit-reproducible results for fixed inputs.
struct KernelTable {
    const char* name;

    double (*sum)(const double* x, std::size_t n);
    double (*dot)(const double* x, const double* y, std::size_t n);
    // sum_i x[i] * y[i] * z[i]
    double (*dot3)(const double* x, const double* y, const double* z, std::size_t n);
    double (*sumsq)(const double* x, std::size_t n);
    // sum_i w[i] * x[i]^2
    double (*wsumsq)(const double* w, const double* x, std::size_t n);

    // y[i] += a * x[i]
    void (*axpy)(double* y, double a, const double* x, std::size_t n);
    // y[i] += a[i] * b[i]
    void (*addmul)(double* y, const double* a, const double* b, std::size_t n);
    // x[i] *= a
    void (*scale)(double* x, double a, std::size_t n);

    // out[p] = sum_i x[i]^p for p = 0..maxp (maxp <= 16)
    void (*power_sums)(const double* x, std::size_t n, int maxp, double* out);
    // out[p] = sum_i v[i] * x[i]^p for p = 0..maxp
    void (*weighted_power_sums)(const double* x, const double* v, std::size_t n,
                                int maxp, double* out);
    // out[i] = c[0] + c[1] x[i] + ... + c[k-1] x[i]^{k-1}  (Horner)
    void (*polyval)(const double* x, std::size_t n, const double* c, int k, double* out);
    // out[i] += polynomial(x[i])
    void (*polyval_add)(const double* x, std::size_t n, const double* c, int k, double* out);
};

const KernelTable& scalar_table();
#ifdef SBSVIE_BUILD_AVX2
const KernelTable& avx2_table();
#endif
#ifdef SBSVIE_BUILD_NEON
const KernelTable& neon_table();
#endif

// Runtime-selected table: best available for this CPU, or the backend named by
// the SBSVIE_KERNEL environment variable ("scalar", "avx2", "neon").
const KernelTable& active();

// Force a backend by name (tests); throws std::invalid_argument if unavailable.
void force_backend(const std::string& name);

} // namespace sbsvie::kernels
