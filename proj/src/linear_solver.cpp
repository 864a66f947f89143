#include "sbsvie/linear_solver.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "sbsvie/product_rule.hpp"
#include "sbsvie/simd_kernels.hpp"
#include "sbsvie/stats.hpp"

namespace sbsvie {

PathValues field_column(const TwoParamField& f, std::size_t i, std::size_t j) {
    PathValues out(f.paths(), f.comps());
    for (std::size_t m = 0; m < f.paths(); ++m) f.value(m, i, j, out.at(m));
    return out;
}

namespace {

void validate(const LinearData& data, const PathEnsemble& ens) {
    if (!data.f.includes_diagonal() || data.g.includes_diagonal())
        throw std::invalid_argument("linear data: f lives on i <= j, g on i < j");
    if (data.xi.paths != ens.paths() || data.f.paths() != ens.paths() ||
        data.g.paths() != ens.paths())
        throw std::invalid_argument("linear data: fields missing path values");
    if (data.f.nodes() != ens.grid().size() || data.g.nodes() != ens.grid().size())
        throw std::invalid_argument("linear data: fields not defined on the full grid");
}

// Integrands K(s_j, u_l) of the driver representations, stored per interval l
// as contiguous rows j = l+1..N of M*nd values each (the y-tilde reduction
// walks j for fixed l).
struct KTable {
    std::size_t M = 0, N = 0, nd = 0, l_begin = 0;
    std::vector<std::vector<double>> blk;

    double* row(std::size_t l, std::size_t j) {
        return &blk[l - l_begin][(j - l - 1) * M * nd];
    }
    const double* row(std::size_t l, std::size_t j) const {
        return &blk[l - l_begin][(j - l - 1) * M * nd];
    }
};

// obs(j) yields the per-path observation at node s_j; integrands are computed
// for intervals l in [l_begin, j-1] (zero beyond by the truncation property).
template <typename Obs>
KTable build_k_table(Obs obs, std::size_t l_begin, const PathEnsemble& ens,
                     const RegressionEngine& engine, std::size_t nd_out, std::size_t n) {
    const std::size_t M = ens.paths();
    const std::size_t N = ens.grid().cells();
    const std::size_t d = ens.spec().d;

    KTable table;
    table.M = M;
    table.N = N;
    table.nd = nd_out;
    table.l_begin = l_begin;
    table.blk.resize(N > l_begin ? N - l_begin : 0);
    for (std::size_t l = l_begin; l < N; ++l)
        table.blk[l - l_begin].assign((N - l) * M * nd_out, 0.0);
    if (!ens.spec().has_noise()) return table;

    PathValues prod(M, nd_out);
    for (std::size_t j = l_begin + 1; j <= N; ++j) {
        PathValues values = obs(j);
        if (values.constant_across_paths()) continue;
        PathValues prev = engine.condexp(values, l_begin);
        for (std::size_t l = l_begin; l < j; ++l) {
            PathValues next = engine.condexp(values, l + 1);
            bool any = false;
            for (std::size_t k = 0; k < d; ++k)
                if (ens.spec().lambda[k] * ens.grid().dt(l) > 0.0) any = true;
            if (any) {
                for (std::size_t m = 0; m < M; ++m) {
                    const double* pn = next.at(m);
                    const double* pp = prev.at(m);
                    double* pr = prod.at(m);
                    for (std::size_t c = 0; c < n; ++c) {
                        const double dm = pn[c] - pp[c];
                        for (std::size_t k = 0; k < d; ++k)
                            pr[c * d + k] = dm * ens.increment(m, l, k);
                    }
                }
                // control variate as in martingale_representation
                std::vector<double> cbar(n * d, 0.0);
                for (std::size_t m = 0; m < M; ++m) {
                    const double* pr = prod.at(m);
                    for (std::size_t q = 0; q < n * d; ++q) cbar[q] += pr[q];
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double denom = ens.spec().lambda[k] * ens.grid().dt(l);
                    for (std::size_t c = 0; c < n; ++c)
                        cbar[c * d + k] =
                            denom > 0.0 ? cbar[c * d + k] / (denom * static_cast<double>(M))
                                        : 0.0;
                }
                for (std::size_t m = 0; m < M; ++m) {
                    double* pr = prod.at(m);
                    for (std::size_t c = 0; c < n; ++c)
                        for (std::size_t k = 0; k < d; ++k) {
                            const double denom = ens.spec().lambda[k] * ens.grid().dt(l);
                            const double dw = ens.increment(m, l, k);
                            pr[c * d + k] -= cbar[c * d + k] * (dw * dw - denom);
                        }
                }
                PathValues fitted = engine.condexp(prod, l);
                double* dst = table.row(l, j);
                for (std::size_t m = 0; m < M; ++m) {
                    const double* pf = fitted.at(m);
                    for (std::size_t c = 0; c < n; ++c)
                        for (std::size_t k = 0; k < d; ++k) {
                            const double denom = ens.spec().lambda[k] * ens.grid().dt(l);
                            dst[m * nd_out + c * d + k] =
                                denom > 0.0 ? pf[c * d + k] / denom : 0.0;
                        }
                }
            }
            prev = std::move(next);
        }
    }
    return table;
}

// y_tilde.dense(m, i, l) -= sum_{j>l} gw_j K(s_j, u_l) for one row i
void reduce_k_row(const KTable& table, const TimeGrid& grid, const FractionalOrder& alpha,
                  std::size_t i, TwoParamField& y_tilde, std::vector<double>& scratch) {
    const std::size_t M = table.M;
    const std::size_t N = table.N;
    const std::size_t nd = table.nd;
    const auto& K = kernels::active();
    for (std::size_t l = i + 1; l < N; ++l) {
        const ProductRule gw = product_weights(grid, alpha, i, l);
        scratch.assign(M * nd, 0.0);
        for (std::size_t j = l + 1; j <= N; ++j) {
            const double w = gw.weight_at_node(j);
            if (w == 0.0) continue;
            K.axpy(scratch.data(), w, table.row(l, j), M * nd);
        }
        for (std::size_t m = 0; m < M; ++m) {
            double* dst = y_tilde.dense_at(m, i, l);
            for (std::size_t c = 0; c < nd; ++c) dst[c] -= scratch[m * nd + c];
        }
    }
}

} // namespace

LinearSolution solve_linear(const LinearData& data, const PathEnsemble& ens,
                            const FractionalOrder& alpha, const RegressionEngine& engine,
                            std::size_t row_begin) {
    validate(data, ens);
    const TimeGrid& grid = ens.grid();
    const std::size_t N = grid.cells();
    const std::size_t M = ens.paths();
    const std::size_t n = data.xi.comps;
    const std::size_t nd = data.g.comps();
    if (row_begin > N) throw std::invalid_argument("solve_linear: row_begin out of range");

    LinearSolution sol;
    sol.x = AdaptedProcess(M, N + 1, n);
    sol.y_tilde = TwoParamField(M, N + 1, nd, false);
    sol.y = TwoParamField(M, N + 1, nd, false);

    // x(T) = xi, exactly
    sol.x.set_slice(N, data.xi);

    // x(t_i) = E{xi|F_i} + sum_j w_j E{f(t_i,s_j)|F_i}
    const bool f_det = !data.f.stochastic();
    for (std::size_t i = row_begin; i < N; ++i) {
        PathValues cx = engine.condexp(data.xi, i);
        const ProductRule rule = product_weights(grid, alpha, i);
        if (f_det) {
            std::vector<double> acc(n, 0.0);
            std::vector<double> val(n);
            for (std::size_t j = i; j <= N; ++j) {
                data.f.value(0, i, j, val.data());
                const double w = rule.weight_at_node(j);
                for (std::size_t c = 0; c < n; ++c) acc[c] += w * val[c];
            }
            for (std::size_t m = 0; m < M; ++m) {
                double* xm = sol.x.at(m, i);
                const double* cm = cx.at(m);
                for (std::size_t c = 0; c < n; ++c) xm[c] = cm[c] + acc[c];
            }
        } else {
            for (std::size_t m = 0; m < M; ++m)
                std::memcpy(sol.x.at(m, i), cx.at(m), n * sizeof(double));
            for (std::size_t j = i; j <= N; ++j) {
                const double w = rule.weight_at_node(j);
                PathValues fj = field_column(data.f, i, j);
                PathValues cf = engine.condexp(fj, i);
                for (std::size_t m = 0; m < M; ++m) {
                    double* xm = sol.x.at(m, i);
                    const double* cm = cf.at(m);
                    for (std::size_t c = 0; c < n; ++c) xm[c] += w * cm[c];
                }
            }
        }
    }

    // y_tilde = -L(u) - int_u^T (s-t)^(a-1) K(s,u) ds
    if (ens.spec().has_noise()) {
        MartingaleRep xirep = martingale_representation(data.xi, ens, engine);
        sol.y_tilde.ensure_second();
        for (std::size_t m = 0; m < M; ++m) {
            for (std::size_t l = 0; l <= N; ++l) {
                const double* L = xirep.integrand.at(m, l < N ? l : N - 1);
                double* dst = sol.y_tilde.second_at(m, l);
                for (std::size_t c = 0; c < nd; ++c) dst[c] = -L[c];
            }
        }
        if (data.f.stochastic()) {
            sol.y_tilde.ensure_dense();
            std::vector<double> scratch;
            const bool shared_k = data.f_t_invariant && !data.f.has_dense();
            if (shared_k) {
                KTable table = build_k_table(
                    [&](std::size_t j) { return field_column(data.f, row_begin, j); },
                    row_begin + 1, ens, engine, nd, n);
                for (std::size_t i = row_begin; i < N; ++i)
                    reduce_k_row(table, grid, alpha, i, sol.y_tilde, scratch);
            } else {
                for (std::size_t i = row_begin; i < N; ++i) {
                    KTable table = build_k_table(
                        [&](std::size_t j) { return field_column(data.f, i, j); },
                        i + 1, ens, engine, nd, n);
                    reduce_k_row(table, grid, alpha, i, sol.y_tilde, scratch);
                }
            }
        }
    }

    // y = (u - t)^(1-a) y_tilde - g
    const double one_minus_a = 1.0 - alpha.value();
    if (sol.y_tilde.has_second()) {
        sol.y.ensure_scaled();
        for (std::size_t i = 0; i <= N; ++i)
            for (std::size_t j = i + 1; j <= N; ++j)
                sol.y.scale_at(i, j) = std::pow(grid.node(j) - grid.node(i), one_minus_a);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t j = 0; j <= N; ++j)
                std::memcpy(sol.y.scaled_base_at(m, j), sol.y_tilde.second_at(m, j),
                            nd * sizeof(double));
    }
    if (sol.y_tilde.has_dense()) {
        sol.y.ensure_dense();
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t i = row_begin; i < N; ++i)
                for (std::size_t j = i + 1; j <= N; ++j) {
                    const double kappa = std::pow(grid.node(j) - grid.node(i), one_minus_a);
                    const double* src = sol.y_tilde.dense_at(m, i, j);
                    double* dst = sol.y.dense_at(m, i, j);
                    for (std::size_t c = 0; c < nd; ++c) dst[c] = kappa * src[c];
                }
    }
    if (data.g.has_det()) {
        sol.y.ensure_det();
        for (std::size_t i = 0; i <= N; ++i)
            for (std::size_t j = i + 1; j <= N; ++j) {
                const double* src = data.g.det_at(i, j);
                double* dst = sol.y.det_at(i, j);
                for (std::size_t c = 0; c < nd; ++c) dst[c] -= src[c];
            }
    }
    if (data.g.has_second()) {
        sol.y.ensure_second();
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t j = 0; j <= N; ++j) {
                const double* src = data.g.second_at(m, j);
                double* dst = sol.y.second_at(m, j);
                for (std::size_t c = 0; c < nd; ++c) dst[c] -= src[c];
            }
    }
    if (data.g.has_scaled())
        throw std::invalid_argument("scaled g fields are not produced by this solver");
    if (data.g.has_dense()) {
        sol.y.ensure_dense();
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = i + 1; j <= N; ++j) {
                    const double* src = data.g.dense_at(m, i, j);
                    double* dst = sol.y.dense_at(m, i, j);
                    for (std::size_t c = 0; c < nd; ++c) dst[c] -= src[c];
                }
    }
    return sol;
}

namespace {

// residual of the discretized equation at every node, tracking the per-path
// max of the norm; shared by residual_check and verify_solution
template <typename FRow, typename GYRow>
double residual_max_impl(const PathValues& xi, const AdaptedProcess& x, FRow f_row,
                         GYRow gy_row, const PathEnsemble& ens,
                         const FractionalOrder& alpha) {
    const TimeGrid& grid = ens.grid();
    const std::size_t N = grid.cells();
    const std::size_t M = ens.paths();
    const std::size_t n = xi.comps;
    const std::size_t d = ens.spec().d;
    const auto& K = kernels::active();

    std::vector<double> maxr(M, 0.0);
    std::vector<double> fbuf((N + 1) * n);
    std::vector<double> ybuf((N + 1) * n * d);
    std::vector<double> wrow(N + 1);
    std::vector<double> kbar(N);

    for (std::size_t i = 0; i <= N; ++i) {
        const ProductRule rule = product_weights(grid, alpha, i);
        for (std::size_t j = i; j <= N; ++j) wrow[j - i] = rule.empty() ? 0.0 : rule.weight_at_node(j);
        // left-point kernel values; the singular first cell takes the cell
        // average (exact mass) against the first stored field value
        for (std::size_t l = i; l < N; ++l)
            kbar[l - i] = l == i ? cell_average_kernel(grid, alpha, i, l)
                                 : kernel_value(alpha, grid.node(i), grid.node(l));

        for (std::size_t m = 0; m < M; ++m) {
            const std::size_t flen = N + 1 - i;
            std::fill(fbuf.begin(), fbuf.begin() + flen * n, 0.0);
            f_row(m, i, fbuf.data());
            const std::size_t ylen = N - i; // values at j = i+1..N
            if (ylen > 0) {
                std::fill(ybuf.begin(), ybuf.begin() + ylen * n * d, 0.0);
                gy_row(m, i, ybuf.data());
            }

            double nrm = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                double r = xi.at(m)[c] - x.at(m, i)[c];
                // deterministic integral, product weights
                if (n == 1) {
                    r += K.dot(wrow.data(), fbuf.data(), flen);
                } else {
                    for (std::size_t jr = 0; jr < flen; ++jr) r += wrow[jr] * fbuf[jr * n + c];
                }
                // stochastic integral: cell-averaged kernel, left values,
                // first cell carried by the first stored node
                if (i < N) {
                    if (n == 1 && d == 1) {
                        r += kbar[0] * ens.increment(m, i, 0) * ybuf[0];
                        if (ylen > 1)
                            r += K.dot3(kbar.data() + 1, ybuf.data(),
                                        ens.increments_row(m) + (i + 1), ylen - 1);
                    } else {
                        for (std::size_t l = i; l < N; ++l) {
                            const std::size_t jstar = (l == i ? i + 1 : l) - (i + 1);
                            const double kb = kbar[l - i];
                            for (std::size_t k = 0; k < d; ++k)
                                r += kb * ybuf[jstar * n * d + c * d + k] *
                                     ens.increment(m, l, k);
                        }
                    }
                }
                nrm += r * r;
            }
            if (nrm > maxr[m]) maxr[m] = nrm;
        }
    }
    double acc = 0.0;
    for (std::size_t m = 0; m < M; ++m) acc += std::sqrt(maxr[m]);
    return acc / static_cast<double>(M);
}

} // namespace

double equation_residual(const PathValues& xi, const AdaptedProcess& x,
                         const TwoParamField& f, const TwoParamField& g,
                         const TwoParamField& y, const PathEnsemble& ens,
                         const FractionalOrder& alpha) {
    return residual_max_impl(
        xi, x,
        [&](std::size_t m, std::size_t i, double* buf) {
            f.row_accumulate(m, i, i, 1.0, buf);
        },
        [&](std::size_t m, std::size_t i, double* buf) {
            g.row_accumulate(m, i, i + 1, 1.0, buf);
            y.row_accumulate(m, i, i + 1, 1.0, buf);
        },
        ens, alpha);
}

double residual_check(const LinearSolution& sol, const LinearData& data,
                      const PathEnsemble& ens, const FractionalOrder& alpha) {
    return equation_residual(data.xi, sol.x, data.f, data.g, sol.y, ens, alpha);
}

BoundAudit apriori_bound_audit(const LinearSolution& sol, const LinearData& data,
                               std::size_t t_index, const PathEnsemble& ens,
                               const FractionalOrder& alpha) {
    const TimeGrid& grid = ens.grid();
    const std::size_t N = grid.cells();
    const std::size_t M = ens.paths();
    const std::size_t n = data.xi.comps;
    const double T = grid.horizon();
    const double kfac = squared_kernel_constant(alpha, T, 0.0).majorant;

    std::vector<double> sup(M), ymass(M), gmass(M);
    m_norm_per_path(sol.x, sol.y, t_index, grid, sup.data(), ymass.data());
    y_mass_per_path(data.g, t_index, grid, gmass.data());

    // trapezoid weights for int_{t}^{T} |f(t, r)|^2 dr over nodes r >= t
    std::vector<double> tw(N + 1 - t_index, 0.0);
    for (std::size_t r = t_index; r < N; ++r) {
        tw[r - t_index] += 0.5 * grid.dt(r);
        tw[r + 1 - t_index] += 0.5 * grid.dt(r);
    }

    std::vector<double> diff(M), lhsv(M), rhsv(M);
    std::vector<double> frow((N + 1) * n);
    for (std::size_t m = 0; m < M; ++m) {
        std::fill(frow.begin(), frow.end(), 0.0);
        data.f.row_accumulate(m, t_index, t_index, 1.0, frow.data());
        double fint = 0.0;
        for (std::size_t r = 0; r < tw.size(); ++r) {
            double nrm = 0.0;
            for (std::size_t c = 0; c < n; ++c) nrm += frow[r * n + c] * frow[r * n + c];
            fint += tw[r] * nrm;
        }
        double xi2 = 0.0;
        for (std::size_t c = 0; c < n; ++c) xi2 += data.xi.at(m)[c] * data.xi.at(m)[c];

        lhsv[m] = sup[m] + ymass[m];
        rhsv[m] = 8.0 * xi2 + 16.0 * T * xi2 + 16.0 * kfac * fint + 2.0 * gmass[m];
        diff[m] = lhsv[m] - rhsv[m];
    }

    BoundAudit audit;
    audit.lhs = stats::mean(lhsv.data(), M);
    audit.rhs = stats::mean(rhsv.data(), M);
    audit.slack = 5.0 * stats::bootstrap_se_mean(diff.data(), M, ens.seed() ^ 0xa11d17ull);
    audit.holds = audit.lhs <= audit.rhs + audit.slack + 1e-12 * (1.0 + audit.rhs);
    return audit;
}

} // namespace sbsvie
