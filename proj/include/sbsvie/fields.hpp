#pragma once

#include <cstddef>
#include <vector>

#include "sbsvie/time_grid.hpp"

namespace sbsvie {

// One value in R^comps per path (terminal data, field slices, fitted values).
struct PathValues {
    std::size_t paths = 0;
    std::size_t comps = 0;
    std::vector<double> v;

    PathValues() = default;
    PathValues(std::size_t m, std::size_t c) : paths(m), comps(c), v(m * c, 0.0) {}
    double* at(std::size_t m) { return &v[m * comps]; }
    const double* at(std::size_t m) const { return &v[m * comps]; }
    bool constant_across_paths() const;
};

// mean over paths of the squared Euclidean norm
double second_moment(const PathValues& values);

// One-parameter random field x(t_i) in R^dim, path-major storage.
class AdaptedProcess {
public:
    AdaptedProcess() = default;
    AdaptedProcess(std::size_t paths, std::size_t nodes, std::size_t dim)
        : paths_(paths), nodes_(nodes), dim_(dim), v_(paths * nodes * dim, 0.0) {}

    std::size_t paths() const { return paths_; }
    std::size_t nodes() const { return nodes_; }
    std::size_t dim() const { return dim_; }

    double* at(std::size_t m, std::size_t i) { return &v_[(m * nodes_ + i) * dim_]; }
    const double* at(std::size_t m, std::size_t i) const {
        return &v_[(m * nodes_ + i) * dim_];
    }

    PathValues slice(std::size_t i) const;
    void set_slice(std::size_t i, const PathValues& vals);

    // per-path max over nodes i >= t_index of the squared norm
    void sup_sq_per_path(std::size_t t_index, double* out) const;
    // same for the difference of two processes
    static void diff_sup_sq_per_path(const AdaptedProcess& a, const AdaptedProcess& b,
                                     std::size_t t_index, double* out);

private:
    std::size_t paths_ = 0, nodes_ = 0, dim_ = 0;
    std::vector<double> v_;
};

// Two-parameter random field on the triangle of node pairs (i, j), j >= i
// (or j > i when the diagonal is excluded, as for y and g).
//
// The field is a sum of up to four optional parts, so that the common
// structures of the solver never force dense M x pairs storage:
//   det     — deterministic per pair (shared by all paths),
//   second  — per path, second index only (the martingale-integrand part),
//   scaled  — pair-scale table times a per-(path, second-index) base,
//   dense   — per path per pair.
class TwoParamField {
public:
    TwoParamField() = default;
    TwoParamField(std::size_t paths, std::size_t nodes, std::size_t comps,
                  bool include_diagonal);

    std::size_t paths() const { return paths_; }
    std::size_t nodes() const { return nodes_; }
    std::size_t comps() const { return comps_; }
    bool includes_diagonal() const { return diag_; }
    std::size_t pair_count() const { return pairs_; }
    std::size_t first_col(std::size_t i) const { return diag_ ? i : i + 1; }

    std::size_t pair_index(std::size_t i, std::size_t j) const {
        return offsets_[i] + (j - first_col(i));
    }

    bool has_det() const { return !det_.empty(); }
    bool has_second() const { return !second_.empty(); }
    bool has_scaled() const { return !scale_.empty(); }
    bool has_dense() const { return !dense_.empty(); }
    bool stochastic() const { return has_second() || has_scaled() || has_dense(); }

    void ensure_det();
    void ensure_second();
    void ensure_scaled();
    void ensure_dense();

    double* det_at(std::size_t i, std::size_t j) { return &det_[pair_index(i, j) * comps_]; }
    double* second_at(std::size_t m, std::size_t j) {
        return &second_[(m * (nodes_) + j) * comps_];
    }
    double& scale_at(std::size_t i, std::size_t j) { return scale_[pair_index(i, j)]; }
    double* scaled_base_at(std::size_t m, std::size_t j) {
        return &second2_[(m * (nodes_) + j) * comps_];
    }
    double* dense_at(std::size_t m, std::size_t i, std::size_t j) {
        return &dense_[(m * pairs_ + pair_index(i, j)) * comps_];
    }

    const double* det_at(std::size_t i, std::size_t j) const {
        return &det_[pair_index(i, j) * comps_];
    }
    const double* second_at(std::size_t m, std::size_t j) const {
        return &second_[(m * (nodes_) + j) * comps_];
    }
    const double* dense_at(std::size_t m, std::size_t i, std::size_t j) const {
        return &dense_[(m * pairs_ + pair_index(i, j)) * comps_];
    }

    // value of the field at (m, i, j), summed over parts
    void value(std::size_t m, std::size_t i, std::size_t j, double* out) const;
    double value1(std::size_t m, std::size_t i, std::size_t j) const;

    // buf[(j - j_begin)*comps + c] += coeff * field(m, i, j) for j = j_begin..N
    void row_accumulate(std::size_t m, std::size_t i, std::size_t j_begin, double coeff,
                        double* buf) const;

private:
    std::size_t paths_ = 0, nodes_ = 0, comps_ = 0;
    bool diag_ = false;
    std::size_t pairs_ = 0;
    std::vector<std::size_t> offsets_;
    std::vector<double> det_;
    std::vector<double> second_;
    std::vector<double> scale_;
    std::vector<double> second2_;
    std::vector<double> dense_;
};

// Per-path pieces of the M[t,T] norm: out_sup[m] = max_{i>=t} |x(m,i)|^2 and
// out_ymass[m] = double trapezoid of |y(m,s,u)|^2 over the triangle
// {t <= s <= u <= T}; the diagonal cell of the inner integral takes the value
// at the first stored node.
void m_norm_per_path(const AdaptedProcess& x, const TwoParamField& y, std::size_t t_index,
                     const TimeGrid& grid, double* out_sup, double* out_ymass);

// Same for differences (xa - xb, ya - yb) without materializing them.
void m_norm_diff_per_path(const AdaptedProcess& xa, const AdaptedProcess& xb,
                          const TwoParamField& ya, const TwoParamField& yb,
                          std::size_t t_index, const TimeGrid& grid, double* out_sup,
                          double* out_ymass);

// Per-path double trapezoid of |field|^2 over the triangle alone (used for
// the y part of the norm and for the g-mass terms of the bound audits).
void y_mass_per_path(const TwoParamField& y, std::size_t t_index, const TimeGrid& grid,
                     double* out_ymass);

// Monte Carlo estimate of |(x,y)|_t^2
double empirical_m_norm(const AdaptedProcess& x, const TwoParamField& y, std::size_t t_index,
                        const TimeGrid& grid);

// y-part only, for the inner fixed-point loop
double y_mass_diff(const TwoParamField& ya, const TwoParamField& yb, std::size_t t_index,
                   const TimeGrid& grid);

} // namespace sbsvie
