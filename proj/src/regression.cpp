#include "sbsvie/regression.hpp"

#include <functional>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "sbsvie/simd_kernels.hpp"

namespace sbsvie {

namespace {

// in-place lower Cholesky of the leading minor; returns the largest r such
// that the r x r minor factorizes with pivots > tol * largest diagonal
int cholesky_rank(double* G, int k, double tol) {
    double dmax = 0.0;
    for (int i = 0; i < k; ++i) dmax = std::max(dmax, G[i * k + i]);
    const double cut = tol * std::max(dmax, 1e-300);
    for (int j = 0; j < k; ++j) {
        double diag = G[j * k + j];
        for (int p = 0; p < j; ++p) diag -= G[j * k + p] * G[j * k + p];
        if (!(diag > cut)) return j;
        const double l = std::sqrt(diag);
        G[j * k + j] = l;
        for (int i = j + 1; i < k; ++i) {
            double v = G[i * k + j];
            for (int p = 0; p < j; ++p) v -= G[i * k + p] * G[j * k + p];
            G[i * k + j] = v / l;
        }
    }
    return k;
}

void chol_solve(const double* L, int k, double* b) {
    for (int i = 0; i < k; ++i) {
        double v = b[i];
        for (int p = 0; p < i; ++p) v -= L[i * k + p] * b[p];
        b[i] = v / L[i * k + i];
    }
    for (int i = k - 1; i >= 0; --i) {
        double v = b[i];
        for (int p = i + 1; p < k; ++p) v -= L[p * k + i] * b[p];
        b[i] = v / L[i * k + i];
    }
}

void enumerate_monomials(std::size_t d, int degree, std::vector<std::vector<int>>& out,
                         std::vector<std::size_t>& degree_offsets) {
    out.clear();
    degree_offsets.assign(degree + 2, 0);
    std::vector<int> cur(d, 0);
    for (int total = 0; total <= degree; ++total) {
        // all exponent tuples with sum == total, lexicographic
        std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
            if (pos + 1 == d) {
                cur[pos] = left;
                out.push_back(cur);
                return;
            }
            for (int e = left; e >= 0; --e) {
                cur[pos] = e;
                rec(pos + 1, left - e);
            }
        };
        rec(0, total);
        degree_offsets[total + 1] = out.size();
    }
}

} // namespace

RegressionEngine::RegressionEngine(const PathEnsemble& ens, RegressionBasis basis)
    : ens_(&ens), basis_(basis) {
    if (basis_.degree < 0) throw std::invalid_argument("basis degree must be >= 0");
    enumerate_monomials(ens.spec().d, basis_.degree, exps_, degree_offsets_);
    cache_.resize(ens.grid().size());
}

int RegressionEngine::effective_degree(std::size_t i) const { return node(i).degree; }

const RegressionEngine::NodeCache& RegressionEngine::node(std::size_t i) const {
    NodeCache& nc = cache_[i];
    if (nc.ready) return nc;

    const std::size_t M = ens_->paths();
    const std::size_t d = ens_->spec().d;
    const auto& K = kernels::active();

    nc.sigma.assign(d, 0.0);
    bool degenerate = true;
    for (std::size_t k = 0; k < d; ++k) {
        double s2 = 0.0;
        if (d == 1) {
            s2 = K.sumsq(ens_->cumulative_column(i), M) / static_cast<double>(M);
        } else {
            for (std::size_t m = 0; m < M; ++m) {
                const double w = ens_->cumulative(m, i, k);
                s2 += w * w;
            }
            s2 /= static_cast<double>(M);
        }
        nc.sigma[k] = std::sqrt(s2);
        if (nc.sigma[k] > 0.0) degenerate = false;
    }

    if (degenerate || basis_.degree == 0) {
        nc.degree = 0;
        nc.k = 1;
        nc.chol = {std::sqrt(static_cast<double>(M))};
        nc.ready = true;
        return nc;
    }

    // degree fallback: try p = full degree, then smaller
    for (int p = basis_.degree; p >= 0; --p) {
        const std::size_t k = degree_offsets_[p + 1];
        std::vector<double> G(k * k, 0.0);
        if (d == 1) {
            double ps[33];
            K.power_sums(ens_->cumulative_column(i), M, 2 * p, ps);
            const double sig = nc.sigma[0];
            double scale[33];
            scale[0] = 1.0;
            for (int q = 1; q <= 2 * p; ++q) scale[q] = scale[q - 1] / sig;
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c < k; ++c) G[r * k + c] = ps[r + c] * scale[r + c];
        } else {
            // generic: accumulate Z^T Z with scaled coordinates
            std::vector<double> row(k);
            for (std::size_t m = 0; m < M; ++m) {
                for (std::size_t b = 0; b < k; ++b) {
                    double v = 1.0;
                    for (std::size_t kk = 0; kk < d; ++kk) {
                        const int e = exps_[b][kk];
                        if (e == 0) continue;
                        const double z = nc.sigma[kk] > 0.0
                                             ? ens_->cumulative(m, i, kk) / nc.sigma[kk]
                                             : 0.0;
                        for (int q = 0; q < e; ++q) v *= z;
                    }
                    row[b] = v;
                }
                for (std::size_t r = 0; r < k; ++r)
                    for (std::size_t c = r; c < k; ++c) G[r * k + c] += row[r] * row[c];
            }
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c < r; ++c) G[r * k + c] = G[c * k + r];
        }
        std::vector<double> L = G;
        const int rank = cholesky_rank(L.data(), static_cast<int>(k), 1e-10);
        if (rank == static_cast<int>(k)) {
            nc.degree = p;
            nc.k = k;
            nc.chol = std::move(L);
            nc.ready = true;
            return nc;
        }
    }
    nc.degree = 0;
    nc.k = 1;
    nc.chol = {std::sqrt(static_cast<double>(M))};
    nc.ready = true;
    return nc;
}

PathValues RegressionEngine::condexp(const PathValues& values, std::size_t i) const {
    if (values.paths != ens_->paths())
        throw std::invalid_argument("condexp: values not defined for every path");
    if (i >= ens_->grid().size()) throw std::invalid_argument("condexp: node out of range");
    if (i + 1 == ens_->grid().size() || values.constant_across_paths()) return values;
    PathValues out(values.paths, values.comps);
    fit(values, i, out);
    return out;
}

void RegressionEngine::fit(const PathValues& values, std::size_t i, PathValues& out) const {
    const NodeCache& nc = node(i);
    const std::size_t M = values.paths;
    const std::size_t C = values.comps;
    const std::size_t d = ens_->spec().d;
    const auto& K = kernels::active();
    const std::size_t k = nc.k;

    if (k == 1) { // plain ensemble mean
        std::vector<double> mean(C, 0.0);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t c = 0; c < C; ++c) mean[c] += values.at(m)[c];
        for (std::size_t c = 0; c < C; ++c) mean[c] /= static_cast<double>(M);
        for (std::size_t m = 0; m < M; ++m)
            std::memcpy(out.at(m), mean.data(), C * sizeof(double));
        return;
    }

    if (d == 1) {
        const double* w = ens_->cumulative_column(i);
        const double sig = nc.sigma[0];
        std::vector<double> col(C > 1 ? M : 0);
        std::vector<double> fitted(C > 1 ? M : 0);
        for (std::size_t c = 0; c < C; ++c) {
            const double* vc;
            if (C == 1) {
                vc = values.v.data();
            } else {
                for (std::size_t m = 0; m < M; ++m) col[m] = values.at(m)[c];
                vc = col.data();
            }
            double beta[33];
            K.weighted_power_sums(w, vc, M, static_cast<int>(k) - 1, beta);
            double s = 1.0;
            for (std::size_t p = 1; p < k; ++p) {
                s /= sig;
                beta[p] *= s;
            }
            chol_solve(nc.chol.data(), static_cast<int>(k), beta);
            // fold the 1/sigma^p basis scaling into plain-W coefficients
            s = 1.0;
            for (std::size_t p = 1; p < k; ++p) {
                s /= sig;
                beta[p] *= s;
            }
            if (C == 1) {
                K.polyval(w, M, beta, static_cast<int>(k), out.v.data());
            } else {
                K.polyval(w, M, beta, static_cast<int>(k), fitted.data());
                for (std::size_t m = 0; m < M; ++m) out.at(m)[c] = fitted[m];
            }
        }
        return;
    }

    // generic multi-component Wiener state
    std::vector<double> Z(M * k);
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t b = 0; b < k; ++b) {
            double v = 1.0;
            for (std::size_t kk = 0; kk < d; ++kk) {
                const int e = exps_[b][kk];
                if (e == 0) continue;
                const double z =
                    nc.sigma[kk] > 0.0 ? ens_->cumulative(m, i, kk) / nc.sigma[kk] : 0.0;
                for (int q = 0; q < e; ++q) v *= z;
            }
            Z[m * k + b] = v;
        }
    }
    std::vector<double> beta(k);
    for (std::size_t c = 0; c < C; ++c) {
        std::fill(beta.begin(), beta.end(), 0.0);
        for (std::size_t m = 0; m < M; ++m) {
            const double v = values.at(m)[c];
            for (std::size_t b = 0; b < k; ++b) beta[b] += Z[m * k + b] * v;
        }
        chol_solve(nc.chol.data(), static_cast<int>(k), beta.data());
        for (std::size_t m = 0; m < M; ++m) {
            double f = 0.0;
            for (std::size_t b = 0; b < k; ++b) f += Z[m * k + b] * beta[b];
            out.at(m)[c] = f;
        }
    }
}

namespace {

MartingaleRep representation_impl(const PathValues& values, std::size_t chain_end,
                                  const PathEnsemble& ens, const RegressionEngine& engine) {
    const std::size_t M = ens.paths();
    const std::size_t N = ens.grid().cells();
    const std::size_t n = values.comps;
    const std::size_t d = ens.spec().d;

    MartingaleRep rep;
    rep.state_dim = n;
    rep.wiener_dim = d;
    rep.mean.assign(n, 0.0);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t c = 0; c < n; ++c) rep.mean[c] += values.at(m)[c];
    for (std::size_t c = 0; c < n; ++c) rep.mean[c] /= static_cast<double>(M);
    rep.integrand = AdaptedProcess(M, N, n * d);

    if (!ens.spec().has_noise() || chain_end == 0) return rep;

    PathValues prev = engine.condexp(values, 0);
    PathValues prod(M, n * d);
    for (std::size_t i = 0; i < chain_end; ++i) {
        PathValues next = engine.condexp(values, i + 1);
        bool any = false;
        for (std::size_t k = 0; k < d; ++k)
            if (ens.spec().lambda[k] * ens.grid().dt(i) > 0.0) any = true;
        if (any) {
            for (std::size_t m = 0; m < M; ++m) {
                const double* pn = next.at(m);
                const double* pp = prev.at(m);
                double* pr = prod.at(m);
                for (std::size_t c = 0; c < n; ++c) {
                    const double dm = pn[c] - pp[c];
                    for (std::size_t k = 0; k < d; ++k)
                        pr[c * d + k] = dm * ens.increment(m, i, k);
                }
            }
            // control variate: subtract cbar (dW^2 - lambda dt); unbiased for the
            // conditional slope and exact when the integrand is constant
            std::vector<double> cbar(n * d, 0.0);
            for (std::size_t m = 0; m < M; ++m) {
                const double* pr = prod.at(m);
                for (std::size_t q = 0; q < n * d; ++q) cbar[q] += pr[q];
            }
            for (std::size_t k = 0; k < d; ++k) {
                const double denom = ens.spec().lambda[k] * ens.grid().dt(i);
                for (std::size_t c = 0; c < n; ++c)
                    cbar[c * d + k] =
                        denom > 0.0 ? cbar[c * d + k] / (denom * static_cast<double>(M))
                                    : 0.0;
            }
            for (std::size_t m = 0; m < M; ++m) {
                double* pr = prod.at(m);
                for (std::size_t c = 0; c < n; ++c)
                    for (std::size_t k = 0; k < d; ++k) {
                        const double denom = ens.spec().lambda[k] * ens.grid().dt(i);
                        const double dw = ens.increment(m, i, k);
                        pr[c * d + k] -= cbar[c * d + k] * (dw * dw - denom);
                    }
            }
            PathValues fitted = engine.condexp(prod, i);
            for (std::size_t m = 0; m < M; ++m) {
                double* out = rep.integrand.at(m, i);
                const double* pf = fitted.at(m);
                for (std::size_t c = 0; c < n; ++c)
                    for (std::size_t k = 0; k < d; ++k) {
                        const double denom = ens.spec().lambda[k] * ens.grid().dt(i);
                        out[c * d + k] = denom > 0.0 ? pf[c * d + k] / denom : 0.0;
                    }
            }
        }
        prev = std::move(next);
    }
    return rep;
}

} // namespace

MartingaleRep martingale_representation(const PathValues& values, const PathEnsemble& ens,
                                        const RegressionEngine& engine) {
    return representation_impl(values, ens.grid().cells(), ens, engine);
}

MartingaleRep truncated_representation(const PathValues& values, std::size_t observed_at,
                                       const PathEnsemble& ens,
                                       const RegressionEngine& engine) {
    return representation_impl(values, observed_at, ens, engine);
}

double representation_residual(const MartingaleRep& rep, const PathValues& values,
                               const PathEnsemble& ens) {
    const std::size_t M = ens.paths();
    const std::size_t N = ens.grid().cells();
    const std::size_t n = rep.state_dim;
    const std::size_t d = rep.wiener_dim;
    double acc = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
        double nrm = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            double r = values.at(m)[c] - rep.mean[c];
            for (std::size_t i = 0; i < N; ++i) {
                const double* in = rep.integrand.at(m, i);
                for (std::size_t k = 0; k < d; ++k)
                    r -= in[c * d + k] * ens.increment(m, i, k);
            }
            nrm += r * r;
        }
        acc += nrm;
    }
    return std::sqrt(acc / static_cast<double>(M));
}

std::vector<MartingaleRep> driver_representation(const std::vector<PathValues>& driver_at,
                                                 const PathEnsemble& ens,
                                                 const RegressionEngine& engine) {
    std::vector<MartingaleRep> reps;
    reps.reserve(driver_at.size());
    for (std::size_t j = 0; j < driver_at.size(); ++j)
        reps.push_back(truncated_representation(driver_at[j], j, ens, engine));
    return reps;
}

} // namespace sbsvie
