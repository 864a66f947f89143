#include "sbsvie/picard.hpp"
#include <functional>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "sbsvie/counter_rng.hpp"
#include "sbsvie/product_rule.hpp"
#include "sbsvie/stats.hpp"

namespace sbsvie {

namespace {

double triangle_integral(const TimeGrid& grid, std::size_t t_index,
                         const std::function<double(std::size_t, std::size_t)>& h) {
    // plain double trapezoid of h(i, j) over t <= s_i <= s_j <= T
    const std::size_t N = grid.cells();
    double outer = 0.0;
    std::vector<double> inner(N + 1 - t_index, 0.0);
    for (std::size_t i = t_index; i <= N; ++i) {
        double acc = 0.0;
        for (std::size_t j = i; j < N; ++j)
            acc += 0.5 * grid.dt(j) * (h(i, j) + h(i, j + 1));
        inner[i - t_index] = acc;
    }
    for (std::size_t i = t_index; i < N; ++i)
        outer += 0.5 * grid.dt(i) * (inner[i - t_index] + inner[i + 1 - t_index]);
    return outer;
}

double sq_norm(const double* v, std::size_t n) {
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += v[c] * v[c];
    return s;
}

} // namespace

std::string AssumptionReport::describe() const {
    std::ostringstream os;
    os << "H1 " << (h1_ok ? "ok" : "FAILED") << " (|f0|^2 mass " << f0_mass << ", |g0|^2 mass "
       << g0_mass << "); H11 " << (h11_ok ? "ok" : "FAILED") << " (varpi = " << varpi
       << "); H3 " << (h3_ok ? "ok" : "FAILED");
    if (!witnesses.empty()) {
        const H3Witness& w = witnesses.front();
        os << " (first witness: " << (w.driver ? "f" : "g") << " at t=" << w.t << ", s=" << w.s
           << ", lhs=" << w.lhs << " > rhs=" << w.rhs << ")";
    }
    return os.str();
}

AssumptionReport check_assumptions(const ProblemSpec& problem, const PathEnsemble& ens,
                                   std::size_t sample_count, double box) {
    const TimeGrid& grid = ens.grid();
    const std::size_t n = problem.state_dim;
    const std::size_t nd = n * problem.wiener.d;
    const double T = grid.horizon();

    AssumptionReport rep;

    // H1: zero-argument coefficients square-integrable over the triangle
    std::vector<double> zx(n, 0.0), zy(nd, 0.0), fv(n), gv(nd);
    bool finite = true;
    auto f0 = [&](std::size_t i, std::size_t j) {
        problem.driver(grid.node(i), grid.node(j), zx.data(), zy.data(), fv.data());
        const double v = sq_norm(fv.data(), n);
        if (!std::isfinite(v)) finite = false;
        return v;
    };
    auto g0 = [&](std::size_t i, std::size_t j) {
        problem.diffusion(grid.node(i), grid.node(j), zx.data(), gv.data());
        const double v = sq_norm(gv.data(), nd);
        if (!std::isfinite(v)) finite = false;
        return v;
    };
    rep.f0_mass = triangle_integral(grid, 0, f0);
    rep.g0_mass = triangle_integral(grid, 0, g0);
    const double xi2 = second_moment(eval_terminal(problem, ens));
    rep.h1_ok = finite && std::isfinite(rep.f0_mass) && std::isfinite(rep.g0_mass) &&
                std::isfinite(xi2);

    // H11
    const double kfac = squared_kernel_constant(problem.alpha, T, 0.0).majorant;
    rep.varpi = 1.0 - 8.0 * kfac * problem.y_lipschitz;
    rep.h11_ok = rep.varpi > 0.0;

    // H3 on sampled tuples
    rep.h3_ok = true;
    std::vector<double> x1(n), x2(n), y1(nd), y2(nd), f1(n), f2(n), g1(nd), g2(nd);
    const std::uint64_t seed = ens.seed() ^ 0x53a317ull;
    for (std::size_t q = 0; q < sample_count; ++q) {
        const double t = T * rng::uniform(seed, q, 0, 0);
        const double s = t + (T - t) * rng::uniform(seed, q, 1, 0);
        for (std::size_t c = 0; c < n; ++c) {
            x1[c] = box * (2.0 * rng::uniform(seed, q, 2, c) - 1.0);
            x2[c] = box * (2.0 * rng::uniform(seed, q, 3, c) - 1.0);
        }
        for (std::size_t c = 0; c < nd; ++c) {
            y1[c] = box * (2.0 * rng::uniform(seed, q, 4, c) - 1.0);
            y2[c] = box * (2.0 * rng::uniform(seed, q, 5, c) - 1.0);
        }
        double dx = 0.0, dy = 0.0;
        for (std::size_t c = 0; c < n; ++c) dx += (x1[c] - x2[c]) * (x1[c] - x2[c]);
        for (std::size_t c = 0; c < nd; ++c) dy += (y1[c] - y2[c]) * (y1[c] - y2[c]);

        problem.driver(t, s, x1.data(), y1.data(), f1.data());
        problem.driver(t, s, x2.data(), y2.data(), f2.data());
        double df = 0.0;
        for (std::size_t c = 0; c < n; ++c) df += (f1[c] - f2[c]) * (f1[c] - f2[c]);
        const double frhs = problem.modulus(dx) + problem.y_lipschitz * dy;
        if (df > frhs * (1.0 + 1e-9) + 1e-12) {
            rep.h3_ok = false;
            if (rep.witnesses.size() < 8)
                rep.witnesses.push_back({true, t, s, x1, x2, y1, y2, df, frhs});
        }

        problem.diffusion(t, s, x1.data(), g1.data());
        problem.diffusion(t, s, x2.data(), g2.data());
        double dg = 0.0;
        for (std::size_t c = 0; c < nd; ++c) dg += (g1[c] - g2[c]) * (g1[c] - g2[c]);
        const double grhs = problem.modulus(dx);
        if (dg > grhs * (1.0 + 1e-9) + 1e-12) {
            rep.h3_ok = false;
            if (rep.witnesses.size() < 8)
                rep.witnesses.push_back({false, t, s, x1, x2, y1, y2, dg, grhs});
        }
    }
    return rep;
}

ConstantsBlock compute_constants(const ProblemSpec& problem, double t,
                                 const PathEnsemble& ens) {
    const TimeGrid& grid = ens.grid();
    const std::size_t t_index = grid.index_of(t);
    const double T = grid.horizon();
    const std::size_t n = problem.state_dim;
    const std::size_t nd = n * problem.wiener.d;
    const double a = problem.modulus.a();
    const double b = problem.modulus.b();

    const double kfac = squared_kernel_constant(problem.alpha, T, 0.0).majorant;
    const double tfac = std::pow(T, 2.0 * problem.alpha.value()) *
                        problem.alpha.singular_reciprocal();

    ConstantsBlock block;
    block.t = t;
    block.T = T;
    block.varpi = 1.0 - 8.0 * kfac * problem.y_lipschitz;
    block.factor32 = 1.0 - 32.0 * kfac * problem.y_lipschitz;
    if (!(block.varpi > 0.0)) {
        std::ostringstream os;
        os << "Assumption H11 fails: varpi = 1 - 8 (2T)^{2a}/(2a-1) c = " << block.varpi
           << " <= 0";
        throw AssumptionError(os.str());
    }

    PathValues xi = eval_terminal(problem, ens);
    const double xi2 = second_moment(xi);

    std::vector<double> zx(n, 0.0), zy(nd, 0.0), fv(n), gv(nd);
    const double If = triangle_integral(grid, t_index, [&](std::size_t i, std::size_t j) {
        problem.driver(grid.node(i), grid.node(j), zx.data(), zy.data(), fv.data());
        return 2.0 * sq_norm(fv.data(), n) + 2.0 * a;
    });
    const double Ig = triangle_integral(grid, t_index, [&](std::size_t i, std::size_t j) {
        problem.diffusion(grid.node(i), grid.node(j), zx.data(), gv.data());
        return 2.0 * a + 2.0 * sq_norm(gv.data(), nd);
    });

    block.C1 = (8.0 + 16.0 * T) * xi2 + 16.0 * kfac * If + 2.0 * Ig;
    block.C2 = 4.0 * b * T * (1.0 + 36.0 * tfac);
    block.C3 = 16.0 * kfac + 2.0 * (T - t);
    block.u_star = block.C1 * std::exp(block.C2 * T);
    block.C4 = block.C3 * problem.modulus(4.0 * block.u_star);

    const StepRule rule = compute_T0(block, a, b);
    block.step = rule.step;
    block.T0 = rule.T0;
    block.steps = rule.steps;
    return block;
}

StepRule compute_T0(const ConstantsBlock& block, double a, double b) {
    StepRule rule;
    rule.step = std::numeric_limits<double>::infinity();
    if (block.u_star <= 0.0) {
        // zero problem: no window constraint
        rule.T0 = 0.0;
        rule.steps = 1;
        return rule;
    }
    const double ratio = a > 0.0 ? a / block.u_star : 0.0;
    const double denom = block.C3 * (ratio + 2.0 * b);
    if (denom <= 0.0) {
        rule.T0 = 0.0;
        rule.steps = 1;
        return rule;
    }
    rule.step = 2.0 / denom;
    rule.T0 = std::max(0.0, block.T - rule.step);
    rule.steps = rule.step >= block.T
                     ? 1
                     : static_cast<int>(std::ceil(block.T / rule.step - 1e-12));
    return rule;
}

PathValues eval_terminal(const ProblemSpec& problem, const PathEnsemble& ens) {
    PathValues xi(ens.paths(), problem.state_dim);
    for (std::size_t m = 0; m < ens.paths(); ++m) problem.terminal(ens, m, xi.at(m));
    return xi;
}

TwoParamField build_driver_field(const ProblemSpec& problem, const PathEnsemble& ens,
                                 const AdaptedProcess& x, const TwoParamField& y,
                                 std::size_t row_begin) {
    const TimeGrid& grid = ens.grid();
    const std::size_t N = grid.cells();
    const std::size_t M = ens.paths();
    const std::size_t n = problem.state_dim;
    const std::size_t nd = n * problem.wiener.d;

    TwoParamField F(M, N + 1, n, true);
    const bool stoch = problem.driver_uses_x || problem.driver_uses_y;
    const bool t_dep = problem.driver_uses_t || problem.driver_uses_y;
    std::vector<double> zx(n, 0.0), zy(nd, 0.0), yv(nd);

    if (!stoch) {
        F.ensure_det();
        for (std::size_t i = 0; i <= N; ++i)
            for (std::size_t j = i; j <= N; ++j)
                problem.driver(grid.node(i), grid.node(j), zx.data(), zy.data(),
                               F.det_at(i, j));
        return F;
    }
    if (!t_dep) {
        F.ensure_second();
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t j = 0; j <= N; ++j)
                problem.driver(grid.node(j), grid.node(j), x.at(m, j), zy.data(),
                               F.second_at(m, j));
        return F;
    }
    F.ensure_dense();
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t i = row_begin; i <= N; ++i) {
            for (std::size_t j = i; j <= N; ++j) {
                const double* ya = zy.data();
                if (problem.driver_uses_y && y.paths() == M) {
                    const std::size_t jq = std::max(j, i + 1);
                    if (jq <= N) {
                        y.value(m, i, jq, yv.data());
                        ya = yv.data();
                    }
                }
                problem.driver(grid.node(i), grid.node(j), x.at(m, j), ya,
                               F.dense_at(m, i, j));
            }
        }
    }
    return F;
}

TwoParamField build_diffusion_field(const ProblemSpec& problem, const PathEnsemble& ens,
                                    const AdaptedProcess& x, std::size_t row_begin) {
    const TimeGrid& grid = ens.grid();
    const std::size_t N = grid.cells();
    const std::size_t M = ens.paths();
    const std::size_t n = problem.state_dim;
    const std::size_t nd = n * problem.wiener.d;

    TwoParamField G(M, N + 1, nd, false);
    std::vector<double> zx(n, 0.0);
    if (!problem.diffusion_uses_x) {
        G.ensure_det();
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = i + 1; j <= N; ++j)
                problem.diffusion(grid.node(i), grid.node(j), zx.data(), G.det_at(i, j));
        return G;
    }
    if (!problem.diffusion_uses_t) {
        G.ensure_second();
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t j = 0; j <= N; ++j)
                problem.diffusion(grid.node(j), grid.node(j), x.at(m, j), G.second_at(m, j));
        return G;
    }
    G.ensure_dense();
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t i = row_begin; i < N; ++i)
            for (std::size_t j = i + 1; j <= N; ++j)
                problem.diffusion(grid.node(i), grid.node(j), x.at(m, j),
                                  G.dense_at(m, i, j));
    return G;
}

LinearData linearize_at(const ProblemSpec& problem, const PathEnsemble& ens,
                        const AdaptedProcess& x, const TwoParamField& y) {
    LinearData data;
    data.xi = eval_terminal(problem, ens);
    data.f = build_driver_field(problem, ens, x, y);
    data.g = build_diffusion_field(problem, ens, x);
    data.f_t_invariant = !(problem.driver_uses_t || problem.driver_uses_y);
    return data;
}

double verify_solution(const ProblemSpec& problem, const AdaptedProcess& x,
                       const TwoParamField& y, const PathEnsemble& ens) {
    const LinearData data = linearize_at(problem, ens, x, y);
    return equation_residual(data.xi, x, data.f, data.g, y, ens, problem.alpha);
}

namespace {

struct IterStats {
    double diff = 0, diff_se = 0;
    double sup = 0, sup_se = 0;
    double ymass = 0, y_se = 0;
};

IterStats iterate_stats(const AdaptedProcess& x_cur, const AdaptedProcess& x_prev,
                        const TwoParamField& y_cur, const TwoParamField& y_prev,
                        std::size_t t_index, const TimeGrid& grid,
                        const PathEnsemble& ens) {
    const std::size_t M = ens.paths();
    std::vector<double> a(M), b(M), d(M);
    IterStats st;
    m_norm_diff_per_path(x_cur, x_prev, y_cur, y_prev, t_index, grid, a.data(), b.data());
    for (std::size_t m = 0; m < M; ++m) d[m] = a[m] + b[m];
    st.diff = stats::mean(d.data(), M);
    st.diff_se = stats::se_of_mean(d.data(), M);
    m_norm_per_path(x_cur, y_cur, t_index, grid, a.data(), b.data());
    st.sup = stats::mean(a.data(), M);
    st.sup_se = stats::se_of_mean(a.data(), M);
    st.ymass = stats::mean(b.data(), M);
    st.y_se = stats::se_of_mean(b.data(), M);
    return st;
}

// one Picard stage on rows >= row_begin; x_state/y_state enter as the previous
// iterate (and frozen tail) and leave as the new one; returns inner-loop count
int picard_stage(const ProblemSpec& problem, const PathEnsemble& ens,
                 const RegressionEngine& engine, const PicardConfig& config,
                 std::size_t row_begin, const PathValues& xi, AdaptedProcess& x_state,
                 TwoParamField& y_state, double kfac32) {
    const TimeGrid& grid = ens.grid();
    TwoParamField G = build_diffusion_field(problem, ens, x_state, row_begin);

    TwoParamField y_cur =
        config.inner_init == InnerInit::Previous
            ? y_state
            : TwoParamField(ens.paths(), grid.size(), y_state.comps(), false);

    double last_change = std::numeric_limits<double>::infinity();
    int grows = 0;
    int inner = 0;
    LinearSolution sol;
    for (;;) {
        TwoParamField F = build_driver_field(problem, ens, x_state, y_cur, row_begin);
        LinearData data;
        data.xi = xi;
        data.f = std::move(F);
        data.g = std::move(G);
        data.f_t_invariant = !(problem.driver_uses_t || problem.driver_uses_y);
        sol = solve_linear(data, ens, problem.alpha, engine, row_begin);
        G = std::move(data.g);
        ++inner;
        if (!problem.driver_uses_y) {
            y_cur = std::move(sol.y);
            break;
        }
        const double change = y_mass_diff(sol.y, y_cur, row_begin, grid);
        y_cur = std::move(sol.y);
        if (change > last_change * (1.0 + 1e-12)) {
            if (++grows >= 3) {
                std::ostringstream os;
                os << "inner y-loop diverged: the smallness condition 32 c (2T)^{2a}/(2a-1)"
                   << " < 1 is violated or saturated (factor = " << kfac32 << ")";
                throw DivergedError(os.str(), kfac32);
            }
        } else {
            grows = 0;
        }
        last_change = change;
        if (change < config.inner_tol || inner >= config.inner_max) break;
    }
    x_state = std::move(sol.x);
    y_state = std::move(y_cur);
    return inner;
}

} // namespace

PicardResult picard_iterate(const ProblemSpec& problem, const PathEnsemble& ens,
                            const PicardConfig& config) {
    const TimeGrid& grid = ens.grid();
    const std::size_t N = grid.cells();
    const std::size_t M = ens.paths();
    const std::size_t n = problem.state_dim;
    const std::size_t nd = n * problem.wiener.d;

    AssumptionReport rep = check_assumptions(problem, ens, config.h3_samples, config.h3_box);
    if (!rep.ok()) throw AssumptionError("assumptions fail: " + rep.describe());

    const double kfac = squared_kernel_constant(problem.alpha, grid.horizon(), 0.0).majorant;
    const double factor32 = 1.0 - 32.0 * kfac * problem.y_lipschitz;
    if (problem.driver_uses_y && factor32 <= 0.0) {
        std::ostringstream os;
        os << "inner y-loop cannot contract: 32 c (2T)^{2a}/(2a-1) >= 1 (factor = "
           << factor32 << ")";
        throw DivergedError(os.str(), factor32);
    }

    const RegressionEngine engine(ens, config.basis);
    const PathValues xi = eval_terminal(problem, ens);

    PicardResult result;
    AdaptedProcess x_prev(M, N + 1, n);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t i = 0; i <= N; ++i)
            std::memcpy(x_prev.at(m, i), xi.at(m), n * sizeof(double));
    TwoParamField y_prev(M, N + 1, nd, false);
    if (config.keep_iterates) result.iterates.push_back(x_prev);

    for (int j = 1; j <= config.max_iter; ++j) {
        AdaptedProcess x_cur = x_prev;
        TwoParamField y_cur = y_prev;
        const int inner =
            picard_stage(problem, ens, engine, config, 0, xi, x_cur, y_cur, factor32);

        IterStats st = iterate_stats(x_cur, x_prev, y_cur, y_prev, 0, grid, ens);
        TraceRow row;
        row.window = 0;
        row.iteration = j;
        row.m_norm_diff = st.diff;
        row.diff_se = st.diff_se;
        row.sup_x_sq = st.sup;
        row.sup_se = st.sup_se;
        row.y_mass = st.ymass;
        row.y_se = st.y_se;
        row.inner_iterations = inner;
        if (config.trace_residual)
            row.residual = verify_solution(problem, x_cur, y_cur, ens);
        result.trace.push_back(row);

        x_prev = std::move(x_cur);
        y_prev = std::move(y_cur);
        if (config.keep_iterates) result.iterates.push_back(x_prev);

        if (st.diff < std::max(config.tol, 5.0 * st.diff_se)) {
            result.converged = true;
            break;
        }
    }
    result.x = std::move(x_prev);
    result.y = std::move(y_prev);
    return result;
}

PicardResult stepped_solve(const ProblemSpec& problem, const PathEnsemble& ens,
                           const PicardConfig& config) {
    const TimeGrid& grid = ens.grid();
    const std::size_t N = grid.cells();
    const std::size_t M = ens.paths();
    const std::size_t n = problem.state_dim;
    const std::size_t nd = n * problem.wiener.d;
    const double T = grid.horizon();

    const ConstantsBlock block = compute_constants(problem, 0.0, ens);
    if (!std::isfinite(block.step) || block.step >= T) return picard_iterate(problem, ens, config);

    AssumptionReport rep = check_assumptions(problem, ens, config.h3_samples, config.h3_box);
    if (!rep.ok()) throw AssumptionError("assumptions fail: " + rep.describe());

    // window boundaries snapped down to grid nodes, strictly decreasing
    std::vector<std::size_t> bounds; // right-to-left window left edges
    std::size_t right = N;
    for (int q = 1; right > 0; ++q) {
        const double target = T - static_cast<double>(q) * block.step;
        std::size_t b = target <= 0.0 ? 0 : grid.floor_index(target);
        if (b >= right) b = right - 1;
        bounds.push_back(b);
        right = b;
    }

    const RegressionEngine engine(ens, config.basis);
    const PathValues xi = eval_terminal(problem, ens);

    PicardResult result;
    result.windows = static_cast<int>(bounds.size());

    AdaptedProcess x_state(M, N + 1, n);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t i = 0; i <= N; ++i)
            std::memcpy(x_state.at(m, i), xi.at(m), n * sizeof(double));
    TwoParamField y_state(M, N + 1, nd, false);

    std::size_t hi = N;
    for (std::size_t w = 0; w < bounds.size(); ++w) {
        const std::size_t lo = bounds[w];
        // terminal-data warm start for the new rows
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t i = lo; i < hi; ++i)
                std::memcpy(x_state.at(m, i), x_state.at(m, hi), n * sizeof(double));

        bool converged = false;
        AdaptedProcess x_prev = x_state;
        TwoParamField y_prev = y_state;
        for (int j = 1; j <= config.max_iter; ++j) {
            AdaptedProcess x_cur = x_prev;
            TwoParamField y_cur = y_prev;
            const int inner = picard_stage(problem, ens, engine, config, lo, xi, x_cur,
                                           y_cur, block.factor32);
            IterStats st = iterate_stats(x_cur, x_prev, y_cur, y_prev, lo, grid, ens);
            TraceRow row;
            row.window = static_cast<int>(w + 1);
            row.iteration = j;
            row.m_norm_diff = st.diff;
            row.diff_se = st.diff_se;
            row.sup_x_sq = st.sup;
            row.sup_se = st.sup_se;
            row.y_mass = st.ymass;
            row.y_se = st.y_se;
            row.inner_iterations = inner;
            result.trace.push_back(row);
            x_prev = std::move(x_cur);
            y_prev = std::move(y_cur);
            if (st.diff < std::max(config.tol, 5.0 * st.diff_se)) {
                converged = true;
                break;
            }
        }
        x_state = std::move(x_prev);
        y_state = std::move(y_prev);
        if (!converged) {
            result.x = std::move(x_state);
            result.y = std::move(y_state);
            result.converged = false;
            return result;
        }
        hi = lo;
    }

    result.x = std::move(x_state);
    result.y = std::move(y_state);
    result.converged = true;
    if (config.trace_residual && !result.trace.empty())
        result.trace.back().residual = verify_solution(problem, result.x, result.y, ens);
    return result;
}

BoundAuditReport audit_iterate_bounds(const PicardResult& result, const ConstantsBlock& block,
                                      std::size_t t_index, const ProblemSpec& problem,
                                      const PathEnsemble& ens) {
    const TimeGrid& grid = ens.grid();
    const std::size_t N = grid.cells();
    const std::size_t M = ens.paths();
    const double T = grid.horizon();
    const double t = grid.node(t_index);
    const double span = T - t;

    BoundAuditReport rep;
    const double sup_bound = block.C1 * std::exp(block.C2 * span);
    const double y_bound =
        (1.0 / block.varpi) * block.C1 * (1.0 + block.C2 * span * std::exp(block.C2 * span));

    for (const TraceRow& row : result.trace) {
        IterateBoundRow r;
        r.j = row.iteration;
        r.sup_lhs = row.sup_x_sq;
        r.sup_rhs = sup_bound;
        r.sup_ok = row.sup_x_sq <= sup_bound + 5.0 * row.sup_se + 1e-12 * (1.0 + sup_bound);
        r.y_lhs = row.y_mass;
        r.y_rhs = y_bound;
        r.y_ok = row.y_mass <= y_bound + 5.0 * row.y_se + 1e-12 * (1.0 + y_bound);
        if (!r.sup_ok || !r.y_ok) ++rep.violations;
        rep.iterate_rows.push_back(r);
    }

    const std::size_t J = result.iterates.empty() ? 0 : result.iterates.size() - 1;
    if (J >= 2) {
        std::vector<double> supd(M);
        // suffix sup of the squared diff per node, feeding the contraction bound
        std::vector<double> suffix(N + 1);
        const std::size_t t0_index =
            grid.node(grid.floor_index(block.T0)) < block.T0 - 1e-12
                ? grid.floor_index(block.T0) + 1
                : grid.floor_index(block.T0);
        PhiTable phi = phi_sequences(block, problem.modulus, grid,
                                     static_cast<int>(J > 1 ? J - 1 : 1));

        for (std::size_t j = 1; j + 1 <= J; ++j) {
            for (std::size_t k = 1; j + k <= J; ++k) {
                AdaptedProcess::diff_sup_sq_per_path(result.iterates[j + k],
                                                     result.iterates[j], t_index, supd.data());
                const double lhs = stats::mean(supd.data(), M);
                const double se = stats::bootstrap_se_mean(supd.data(), M,
                                                           ens.seed() ^ (j * 131 + k));
                PairBoundRow pr;
                pr.j = static_cast<int>(j);
                pr.k = static_cast<int>(k);
                pr.lhs = lhs;
                pr.rhs = block.C4 * span;
                pr.ok = lhs <= pr.rhs + 5.0 * se + 1e-12 * (1.0 + pr.rhs);
                if (!pr.ok) ++rep.violations;
                rep.pair_rows.push_back(pr);

                // contraction bound: C3 int_t^T rho(E sup_{s<=r<=T} |dx_prev|^2) ds
                const AdaptedProcess& pa = result.iterates[j + k - 1];
                const AdaptedProcess& pb = result.iterates[j - 1];
                std::fill(suffix.begin(), suffix.end(), 0.0);
                for (std::size_t m = 0; m < M; ++m) {
                    double run = 0.0;
                    for (std::size_t i = N + 1; i-- > t_index;) {
                        double nrm = 0.0;
                        const double* va = pa.at(m, i);
                        const double* vb = pb.at(m, i);
                        for (std::size_t c = 0; c < pa.dim(); ++c) {
                            const double dv = va[c] - vb[c];
                            nrm += dv * dv;
                        }
                        run = std::max(run, nrm);
                        suffix[i] += run;
                    }
                }
                double integral = 0.0;
                for (std::size_t i = t_index; i < N; ++i) {
                    const double ga = problem.modulus(suffix[i] / static_cast<double>(M));
                    const double gb = problem.modulus(suffix[i + 1] / static_cast<double>(M));
                    integral += 0.5 * grid.dt(i) * (ga + gb);
                }
                PairBoundRow l3;
                l3.j = static_cast<int>(j);
                l3.k = static_cast<int>(k);
                l3.lhs = lhs;
                l3.rhs = block.C3 * integral;
                l3.ok = lhs <= l3.rhs + 5.0 * se + 1e-12 * (1.0 + l3.rhs);
                if (!l3.ok) ++rep.violations;
                rep.contraction_rows.push_back(l3);

                // phi domination at T0
                if (j - 1 < phi.phi.size() + 1 && j >= 1 &&
                    static_cast<std::size_t>(j) <= phi.phi.size()) {
                    AdaptedProcess::diff_sup_sq_per_path(result.iterates[j + k],
                                                         result.iterates[j], t0_index,
                                                         supd.data());
                    PairBoundRow pd;
                    pd.j = static_cast<int>(j);
                    pd.k = static_cast<int>(k);
                    pd.lhs = stats::mean(supd.data(), M);
                    pd.rhs = phi.phi[j - 1][t0_index];
                    const double se0 = stats::bootstrap_se_mean(
                        supd.data(), M, ens.seed() ^ (j * 977 + k));
                    pd.ok = pd.lhs <= pd.rhs + 5.0 * se0 + 1e-12 * (1.0 + pd.rhs);
                    if (!pd.ok) ++rep.violations;
                    rep.phi_domination.push_back(pd);
                }
            }
        }
    }
    return rep;
}

PhiTable phi_sequences(const ConstantsBlock& block, const ModulusRho& rho,
                       const TimeGrid& grid, int j_max) {
    if (j_max < 1) throw std::invalid_argument("phi_sequences needs j_max >= 1");
    const std::size_t N = grid.cells();
    PhiTable table;
    table.phi.resize(j_max);
    table.phi[0].resize(N + 1);
    for (std::size_t i = 0; i <= N; ++i)
        table.phi[0][i] = block.C4 * (grid.horizon() - grid.node(i));
    for (int j = 1; j < j_max; ++j) {
        table.phi[j].assign(N + 1, 0.0);
        double acc = 0.0;
        for (std::size_t i = N; i-- > 0;) {
            acc += 0.5 * grid.dt(i) *
                   (rho(table.phi[j - 1][i]) + rho(table.phi[j - 1][i + 1]));
            table.phi[j][i] = block.C3 * acc;
        }
    }

    // largest interval [monotone_from, T] on which phi_{j+1} <= phi_j for all j
    std::size_t from = 0;
    for (int j = 0; j + 1 < j_max; ++j) {
        std::size_t first_ok = N + 1;
        for (std::size_t i = N + 1; i-- > 0;) {
            if (table.phi[j + 1][i] <= table.phi[j][i] * (1.0 + 1e-12) + 1e-300)
                first_ok = i;
            else
                break;
        }
        if (first_ok == N + 1) first_ok = N; // holds trivially at T where both vanish
        from = std::max(from, first_ok);
    }
    table.monotone_from = grid.node(from);
    table.monotone_on_window = table.monotone_from <= block.T0 + 1e-12;
    return table;
}

} // namespace sbsvie
