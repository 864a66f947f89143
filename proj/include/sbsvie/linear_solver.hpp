#pragma once

#include <cstddef>

#include "sbsvie/fields.hpp"
#include "sbsvie/fractional.hpp"
#include "sbsvie/regression.hpp"
#include "sbsvie/wiener.hpp"

namespace sbsvie {

// Data of the linear singular BSVIE
//   x(t) = xi + int_t^T (s-t)^(a-1) f(t,s) ds
//             + int_t^T (s-t)^(a-1) [g(t,s) + y(t,s)] dw(s).
// f lives on node pairs i <= j, g on i < j.
struct LinearData {
    PathValues xi;   // M x n
    TwoParamField f; // diagonal included, comps = n
    TwoParamField g; // strict, comps = n*d
    // f(t_i, s_j) does not vary with i (enables a shared K table)
    bool f_t_invariant = true;
};

struct LinearSolution {
    AdaptedProcess x;      // M x (N+1) x n
    TwoParamField y_tilde; // strict, n*d: raw integrand -L(u) - int (s-t)^(a-1) K ds
    TwoParamField y;       // strict, n*d: (u-t)^(1-a) * y_tilde - g
};

// Constructive solution via conditional expectations and the martingale
// representations of xi and of the driver observations. Rows i >= row_begin of
// x and y are populated (row_begin > 0 serves the horizon-stepping solver).
LinearSolution solve_linear(const LinearData& data, const PathEnsemble& ens,
                            const FractionalOrder& alpha, const RegressionEngine& engine,
                            std::size_t row_begin = 0);

// E max_i | xi + int f + int (g+y) dw - x(t_i) | of the discretized equation.
double equation_residual(const PathValues& xi, const AdaptedProcess& x,
                         const TwoParamField& f, const TwoParamField& g,
                         const TwoParamField& y, const PathEnsemble& ens,
                         const FractionalOrder& alpha);

double residual_check(const LinearSolution& sol, const LinearData& data,
                      const PathEnsemble& ens, const FractionalOrder& alpha);

struct BoundAudit {
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0; // 5 * bootstrap SE of (lhs - rhs)
    bool holds = true;
};

// Audit of the a-priori estimate: lhs = |(x,y)|_t^2 estimate, rhs the
// 8/16T/16(2T)^2a/2 combination of data masses.
BoundAudit apriori_bound_audit(const LinearSolution& sol, const LinearData& data,
                               std::size_t t_index, const PathEnsemble& ens,
                               const FractionalOrder& alpha);

// Extract the per-path values of a triangular field at fixed (i, j).
PathValues field_column(const TwoParamField& f, std::size_t i, std::size_t j);

} // namespace sbsvie
