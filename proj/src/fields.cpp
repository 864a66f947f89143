#include "sbsvie/fields.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "sbsvie/simd_kernels.hpp"

namespace sbsvie {

bool PathValues::constant_across_paths() const {
    if (paths <= 1) return true;
    const double* first = at(0);
    for (std::size_t m = 1; m < paths; ++m)
        if (std::memcmp(first, at(m), comps * sizeof(double)) != 0) return false;
    return true;
}

double second_moment(const PathValues& values) {
    if (values.paths == 0) throw std::invalid_argument("second_moment on empty ensemble");
    const auto& K = kernels::active();
    return K.sumsq(values.v.data(), values.v.size()) / static_cast<double>(values.paths);
}

PathValues AdaptedProcess::slice(std::size_t i) const {
    PathValues out(paths_, dim_);
    for (std::size_t m = 0; m < paths_; ++m)
        std::memcpy(out.at(m), at(m, i), dim_ * sizeof(double));
    return out;
}

void AdaptedProcess::set_slice(std::size_t i, const PathValues& vals) {
    for (std::size_t m = 0; m < paths_; ++m)
        std::memcpy(at(m, i), vals.at(m), dim_ * sizeof(double));
}

void AdaptedProcess::sup_sq_per_path(std::size_t t_index, double* out) const {
    for (std::size_t m = 0; m < paths_; ++m) {
        double best = 0.0;
        for (std::size_t i = t_index; i < nodes_; ++i) {
            const double* p = at(m, i);
            double nrm = 0.0;
            for (std::size_t c = 0; c < dim_; ++c) nrm += p[c] * p[c];
            if (nrm > best) best = nrm;
        }
        out[m] = best;
    }
}

void AdaptedProcess::diff_sup_sq_per_path(const AdaptedProcess& a, const AdaptedProcess& b,
                                          std::size_t t_index, double* out) {
    for (std::size_t m = 0; m < a.paths_; ++m) {
        double best = 0.0;
        for (std::size_t i = t_index; i < a.nodes_; ++i) {
            const double* pa = a.at(m, i);
            const double* pb = b.at(m, i);
            double nrm = 0.0;
            for (std::size_t c = 0; c < a.dim_; ++c) {
                const double dv = pa[c] - pb[c];
                nrm += dv * dv;
            }
            if (nrm > best) best = nrm;
        }
        out[m] = best;
    }
}

TwoParamField::TwoParamField(std::size_t paths, std::size_t nodes, std::size_t comps,
                             bool include_diagonal)
    : paths_(paths), nodes_(nodes), comps_(comps), diag_(include_diagonal) {
    offsets_.resize(nodes_);
    std::size_t off = 0;
    for (std::size_t i = 0; i < nodes_; ++i) {
        offsets_[i] = off;
        const std::size_t first = diag_ ? i : i + 1;
        off += (nodes_ > first) ? (nodes_ - first) : 0;
    }
    pairs_ = off;
}

void TwoParamField::ensure_det() {
    if (det_.empty()) det_.assign(pairs_ * comps_, 0.0);
}
void TwoParamField::ensure_second() {
    if (second_.empty()) second_.assign(paths_ * nodes_ * comps_, 0.0);
}
void TwoParamField::ensure_scaled() {
    if (scale_.empty()) {
        scale_.assign(pairs_, 0.0);
        second2_.assign(paths_ * nodes_ * comps_, 0.0);
    }
}
void TwoParamField::ensure_dense() {
    if (dense_.empty()) dense_.assign(paths_ * pairs_ * comps_, 0.0);
}

void TwoParamField::value(std::size_t m, std::size_t i, std::size_t j, double* out) const {
    for (std::size_t c = 0; c < comps_; ++c) out[c] = 0.0;
    const std::size_t pk = has_det() || has_scaled() || has_dense() ? pair_index(i, j) : 0;
    if (has_det()) {
        const double* p = &det_[pk * comps_];
        for (std::size_t c = 0; c < comps_; ++c) out[c] += p[c];
    }
    if (has_second()) {
        const double* p = &second_[(m * nodes_ + j) * comps_];
        for (std::size_t c = 0; c < comps_; ++c) out[c] += p[c];
    }
    if (has_scaled()) {
        const double s = scale_[pk];
        const double* p = &second2_[(m * nodes_ + j) * comps_];
        for (std::size_t c = 0; c < comps_; ++c) out[c] += s * p[c];
    }
    if (has_dense()) {
        const double* p = &dense_[(m * pairs_ + pk) * comps_];
        for (std::size_t c = 0; c < comps_; ++c) out[c] += p[c];
    }
}

double TwoParamField::value1(std::size_t m, std::size_t i, std::size_t j) const {
    double out = 0.0;
    const std::size_t pk = has_det() || has_scaled() || has_dense() ? pair_index(i, j) : 0;
    if (has_det()) out += det_[pk];
    if (has_second()) out += second_[m * nodes_ + j];
    if (has_scaled()) out += scale_[pk] * second2_[m * nodes_ + j];
    if (has_dense()) out += dense_[m * pairs_ + pk];
    return out;
}

void TwoParamField::row_accumulate(std::size_t m, std::size_t i, std::size_t j_begin,
                                   double coeff, double* buf) const {
    if (j_begin >= nodes_) return;
    const std::size_t len = nodes_ - j_begin;
    const auto& K = kernels::active();
    if (has_det() || has_scaled() || has_dense()) {
        const std::size_t pk = pair_index(i, j_begin);
        if (has_det()) K.axpy(buf, coeff, &det_[pk * comps_], len * comps_);
        if (has_dense()) K.axpy(buf, coeff, &dense_[(m * pairs_ + pk) * comps_], len * comps_);
        if (has_scaled()) {
            const double* sc = &scale_[pk];
            const double* base = &second2_[(m * nodes_ + j_begin) * comps_];
            if (comps_ == 1 && coeff == 1.0) {
                K.addmul(buf, sc, base, len);
            } else {
                for (std::size_t r = 0; r < len; ++r)
                    for (std::size_t c = 0; c < comps_; ++c)
                        buf[r * comps_ + c] += coeff * sc[r] * base[r * comps_ + c];
            }
        }
    }
    if (has_second())
        K.axpy(buf, coeff, &second_[(m * nodes_ + j_begin) * comps_], len * comps_);
}

namespace {

// inner-trapezoid node coefficients for row i of the y-mass integral
// (values live at j = i+1..N; the diagonal cell [t_i, t_{i+1}] is a rectangle
// carried by the first stored node)
void inner_weights(const TimeGrid& grid, std::size_t i, std::vector<double>& iw) {
    const std::size_t N = grid.cells();
    iw.assign(N - i, 0.0); // j = i+1 .. N
    iw[0] += grid.dt(i);
    for (std::size_t j = i + 1; j < N; ++j) {
        iw[j - (i + 1)] += 0.5 * grid.dt(j);
        iw[j + 1 - (i + 1)] += 0.5 * grid.dt(j);
    }
}

void outer_weights(const TimeGrid& grid, std::size_t t_index, std::vector<double>& ow) {
    const std::size_t N = grid.cells();
    ow.assign(N + 1 - t_index, 0.0);
    for (std::size_t i = t_index; i < N; ++i) {
        ow[i - t_index] += 0.5 * grid.dt(i);
        ow[i + 1 - t_index] += 0.5 * grid.dt(i);
    }
}

template <typename RowFill>
void y_mass_impl(std::size_t paths, std::size_t nodes, std::size_t comps,
                 const TimeGrid& grid, std::size_t t_index, RowFill fill, double* out) {
    const std::size_t N = grid.cells();
    const auto& K = kernels::active();
    std::vector<std::vector<double>> iw(N >= t_index ? N - t_index : 0);
    for (std::size_t i = t_index; i < N; ++i) inner_weights(grid, i, iw[i - t_index]);
    std::vector<double> ow;
    outer_weights(grid, t_index, ow);
    std::vector<double> buf(comps * (N > t_index ? N - t_index : 0));

    for (std::size_t m = 0; m < paths; ++m) {
        double mass = 0.0;
        for (std::size_t i = t_index; i < N; ++i) {
            const std::size_t len = N - i;
            std::fill(buf.begin(), buf.begin() + len * comps, 0.0);
            fill(m, i, buf.data());
            double inner;
            if (comps == 1) {
                inner = K.wsumsq(iw[i - t_index].data(), buf.data(), len);
            } else {
                inner = 0.0;
                for (std::size_t r = 0; r < len; ++r) {
                    double nrm = 0.0;
                    for (std::size_t c = 0; c < comps; ++c)
                        nrm += buf[r * comps + c] * buf[r * comps + c];
                    inner += iw[i - t_index][r] * nrm;
                }
            }
            mass += ow[i - t_index] * inner;
        }
        out[m] = mass;
    }
    (void)nodes;
}

} // namespace

void m_norm_per_path(const AdaptedProcess& x, const TwoParamField& y, std::size_t t_index,
                     const TimeGrid& grid, double* out_sup, double* out_ymass) {
    if (x.paths() == 0) throw std::invalid_argument("empty ensemble");
    x.sup_sq_per_path(t_index, out_sup);
    y_mass_impl(y.paths(), y.nodes(), y.comps(), grid, t_index,
                [&](std::size_t m, std::size_t i, double* buf) {
                    y.row_accumulate(m, i, i + 1, 1.0, buf);
                },
                out_ymass);
}

void y_mass_per_path(const TwoParamField& y, std::size_t t_index, const TimeGrid& grid,
                     double* out_ymass) {
    y_mass_impl(y.paths(), y.nodes(), y.comps(), grid, t_index,
                [&](std::size_t m, std::size_t i, double* buf) {
                    y.row_accumulate(m, i, i + 1, 1.0, buf);
                },
                out_ymass);
}

void m_norm_diff_per_path(const AdaptedProcess& xa, const AdaptedProcess& xb,
                          const TwoParamField& ya, const TwoParamField& yb,
                          std::size_t t_index, const TimeGrid& grid, double* out_sup,
                          double* out_ymass) {
    AdaptedProcess::diff_sup_sq_per_path(xa, xb, t_index, out_sup);
    y_mass_impl(ya.paths(), ya.nodes(), ya.comps(), grid, t_index,
                [&](std::size_t m, std::size_t i, double* buf) {
                    ya.row_accumulate(m, i, i + 1, 1.0, buf);
                    yb.row_accumulate(m, i, i + 1, -1.0, buf);
                },
                out_ymass);
}

double empirical_m_norm(const AdaptedProcess& x, const TwoParamField& y, std::size_t t_index,
                        const TimeGrid& grid) {
    const std::size_t M = x.paths();
    std::vector<double> sup(M), mass(M);
    m_norm_per_path(x, y, t_index, grid, sup.data(), mass.data());
    const auto& K = kernels::active();
    return (K.sum(sup.data(), M) + K.sum(mass.data(), M)) / static_cast<double>(M);
}

double y_mass_diff(const TwoParamField& ya, const TwoParamField& yb, std::size_t t_index,
                   const TimeGrid& grid) {
    const std::size_t M = ya.paths();
    std::vector<double> mass(M);
    y_mass_impl(ya.paths(), ya.nodes(), ya.comps(), grid, t_index,
                [&](std::size_t m, std::size_t i, double* buf) {
                    ya.row_accumulate(m, i, i + 1, 1.0, buf);
                    yb.row_accumulate(m, i, i + 1, -1.0, buf);
                },
                mass.data());
    const auto& K = kernels::active();
    return K.sum(mass.data(), M) / static_cast<double>(M);
}

} // namespace sbsvie
