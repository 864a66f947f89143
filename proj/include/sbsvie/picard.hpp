#pragma once

#include <cstddef>
#include <vector>

#include "sbsvie/errors.hpp"
#include "sbsvie/linear_solver.hpp"
#include "sbsvie/problem.hpp"

namespace sbsvie {

// Constants of the convergence analysis, plus the horizon-stepping rule
// derived from them.
struct ConstantsBlock {
    double C1 = 0, C2 = 0, C3 = 0, C4 = 0;
    double varpi = 0;    // 1 - 8 (2T)^{2a}/(2a-1) c  (Assumption H11)
    double factor32 = 0; // 1 - 32 (2T)^{2a}/(2a-1) c (inner-loop gate)
    double u_star = 0;   // C1 exp(C2 T)
    double t = 0;        // left endpoint the block was computed for
    double T = 0;
    double step = 0;     // 2 / (C3 (a/u + 2b))
    double T0 = 0;       // max(0, T - step)
    int steps = 1;       // ceil(T / step)
};

struct StepRule {
    double T0 = 0;
    double step = 0;
    int steps = 1;
};

struct H3Witness {
    bool driver = true; // violated by f (else by g)
    double t = 0, s = 0;
    std::vector<double> x, xbar, y, ybar;
    double lhs = 0, rhs = 0;
};

struct AssumptionReport {
    bool h1_ok = false;
    bool h11_ok = false;
    bool h3_ok = false;
    double varpi = 0;
    double f0_mass = 0; // double integral of |f(.,.,0,0)|^2
    double g0_mass = 0;
    std::vector<H3Witness> witnesses;
    bool ok() const { return h1_ok && h11_ok && h3_ok; }
    std::string describe() const;
};

AssumptionReport check_assumptions(const ProblemSpec& problem, const PathEnsemble& ens,
                                   std::size_t sample_count, double box = 4.0);

// Throws AssumptionError when varpi <= 0.
ConstantsBlock compute_constants(const ProblemSpec& problem, double t,
                                 const PathEnsemble& ens);

StepRule compute_T0(const ConstantsBlock& block, double a, double b);

enum class InnerInit { Previous, Zero };

struct PicardConfig {
    int max_iter = 25;
    double tol = 1e-6;
    int inner_max = 20;
    double inner_tol = 1e-7;
    RegressionBasis basis{3};
    bool keep_iterates = false;
    InnerInit inner_init = InnerInit::Previous;
    std::size_t h3_samples = 200;
    double h3_box = 4.0;
    bool trace_residual = true;
};

struct TraceRow {
    int window = 0;
    int iteration = 0;
    double m_norm_diff = 0;
    double diff_se = 0;
    double sup_x_sq = 0;
    double sup_se = 0;
    double y_mass = 0;
    double y_se = 0;
    int inner_iterations = 0;
    double residual = 0;
};

struct PicardResult {
    AdaptedProcess x;
    TwoParamField y;
    std::vector<TraceRow> trace;
    bool converged = false;
    int windows = 1;
    // x_0, x_1, ... when keep_iterates is set
    std::vector<AdaptedProcess> iterates;
};

PicardResult picard_iterate(const ProblemSpec& problem, const PathEnsemble& ens,
                            const PicardConfig& config);

// Horizon stepping: solve on [T0, T] first, then successive windows of length
// at most `step`, warm-starting each window from the value at its right end.
PicardResult stepped_solve(const ProblemSpec& problem, const PathEnsemble& ens,
                           const PicardConfig& config);

// E max_i |residual| of the discretized nonlinear equation for a candidate pair.
double verify_solution(const ProblemSpec& problem, const AdaptedProcess& x,
                       const TwoParamField& y, const PathEnsemble& ens);

// Field assembly from a candidate pair (shared by the solver, the verifier and
// the audits): F(t_i,s_j) = f(t_i,s_j,x(s_j),y(t_i,s_j)), G = g(t_i,s_j,x(s_j)).
PathValues eval_terminal(const ProblemSpec& problem, const PathEnsemble& ens);
TwoParamField build_driver_field(const ProblemSpec& problem, const PathEnsemble& ens,
                                 const AdaptedProcess& x, const TwoParamField& y,
                                 std::size_t row_begin = 0);
TwoParamField build_diffusion_field(const ProblemSpec& problem, const PathEnsemble& ens,
                                    const AdaptedProcess& x, std::size_t row_begin = 0);
LinearData linearize_at(const ProblemSpec& problem, const PathEnsemble& ens,
                        const AdaptedProcess& x, const TwoParamField& y);

struct IterateBoundRow {
    int j = 0;
    double sup_lhs = 0, sup_rhs = 0;
    bool sup_ok = true;
    double y_lhs = 0, y_rhs = 0;
    bool y_ok = true;
};

struct PairBoundRow {
    int j = 0, k = 0;
    double lhs = 0, rhs = 0;
    bool ok = true;
};

struct BoundAuditReport {
    std::vector<IterateBoundRow> iterate_rows;     // per-iterate sup/mass bounds
    std::vector<PairBoundRow> pair_rows;           // uniform pair-difference bound
    std::vector<PairBoundRow> contraction_rows;    // integral contraction bound
    std::vector<PairBoundRow> phi_domination;
    int violations = 0;
};

// Checks the per-iterate sup/mass bounds, the uniform pair-difference bound,
// the integral contraction bound and the phi-domination against a recorded run
// (the pair checks need keep_iterates).
BoundAuditReport audit_iterate_bounds(const PicardResult& result, const ConstantsBlock& block,
                                      std::size_t t_index, const ProblemSpec& problem,
                                      const PathEnsemble& ens);

struct PhiTable {
    std::vector<std::vector<double>> phi; // phi[j-1][node]
    bool monotone_on_window = true;       // phi_{j+1} <= phi_j on [T0, T]
    double monotone_from = 0;             // smallest t from which monotone holds
};

// Comparison sequences phi_1(t) = C4 (T-t), phi_{j+1}(t) = C3 int_t^T rho(phi_j).
PhiTable phi_sequences(const ConstantsBlock& block, const ModulusRho& rho,
                       const TimeGrid& grid, int j_max);

} // namespace sbsvie
