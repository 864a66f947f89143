#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sbsvie/time_grid.hpp"

namespace sbsvie {

// Finite-dimensional truncation of the Q-Wiener process: d driving components
// with covariance eigenvalues lambda_k (component k has variance lambda_k t).
struct WienerSpec {
    std::size_t d;
    std::vector<double> lambda;

    WienerSpec(std::size_t dim, std::vector<double> eigenvalues);
    double trace() const;
    bool has_noise() const; // any lambda_k > 0
};

// M simulated paths on the grid. Increments dW[m][i][k] ~ N(0, lambda_k dt_i)
// are stored path-major (contiguous over (i,k) within a path); cumulative
// values W(t_i) are stored node-major (contiguous over paths for fixed node)
// to feed the regression kernels.
class PathEnsemble {
public:
    PathEnsemble(TimeGrid grid, WienerSpec spec, std::size_t paths, std::uint64_t seed);

    const TimeGrid& grid() const { return grid_; }
    const WienerSpec& spec() const { return spec_; }
    std::size_t paths() const { return paths_; }
    std::uint64_t seed() const { return seed_; }

    // dW over interval i, component k
    double increment(std::size_t m, std::size_t i, std::size_t k) const {
        return inc_[(m * intervals_ + i) * spec_.d + k];
    }
    const double* increments_row(std::size_t m) const { return &inc_[m * intervals_ * spec_.d]; }

    // W(t_i) component k
    double cumulative(std::size_t m, std::size_t i, std::size_t k) const {
        return cum_[(i * paths_ + m) * spec_.d + k];
    }
    // contiguous over paths, valid for d == 1
    const double* cumulative_column(std::size_t i) const { return &cum_[i * paths_]; }

    // columnar debug export: header + (path, interval, component, increment)
    void write_csv(std::ostream& os) const;

private:
    TimeGrid grid_;
    WienerSpec spec_;
    std::size_t paths_;
    std::size_t intervals_;
    std::uint64_t seed_;
    std::vector<double> inc_;
    std::vector<double> cum_;
};

PathEnsemble generate_paths(const TimeGrid& grid, const WienerSpec& spec, std::size_t paths,
                            std::uint64_t seed);

} // namespace sbsvie
