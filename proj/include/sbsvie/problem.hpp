#pragma once

#include <cstddef>
#include <functional>

#include "sbsvie/fractional.hpp"
#include "sbsvie/modulus.hpp"
#include "sbsvie/wiener.hpp"

namespace sbsvie {

class PathEnsemble;

// Data of the singular BSVIE
//   x(t) = xi + int_t^T (s-t)^(a-1) f(t,s,x(s),y(t,s)) ds
//             + int_t^T (s-t)^(a-1) [g(t,s,x(s)) + y(t,s)] dw(s).
struct ProblemSpec {
    FractionalOrder alpha;
    double horizon; // T
    std::size_t state_dim; // n
    WienerSpec wiener;

    // terminal functional: full path -> R^n
    std::function<void(const PathEnsemble&, std::size_t m, double* out)> terminal;
    // f(t, s, x[n], y[n*d]) -> out[n]
    std::function<void(double t, double s, const double* x, const double* y, double* out)>
        driver;
    // g(t, s, x[n]) -> out[n*d]
    std::function<void(double t, double s, const double* x, double* out)> diffusion;

    ModulusRho modulus = ModulusRho::linear(0.0);
    double y_lipschitz = 0.0; // c of Assumption H3

    // structural hints used to pick field storage and representation caching
    bool driver_uses_t = false;    // f reads its first slot
    bool driver_uses_x = false;    // f reads x
    bool driver_uses_y = false;    // f reads y (implies t-dependence of the driver field)
    bool diffusion_uses_t = false; // g reads its first slot
    bool diffusion_uses_x = false; // g reads x
};

} // namespace sbsvie
