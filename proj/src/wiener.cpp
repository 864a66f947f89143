#include "sbsvie/wiener.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "sbsvie/counter_rng.hpp"
#include "sbsvie/io_format.hpp"

namespace sbsvie {

WienerSpec::WienerSpec(std::size_t dim, std::vector<double> eigenvalues)
    : d(dim), lambda(std::move(eigenvalues)) {
    if (d < 1) throw std::invalid_argument("Wiener dimension must be >= 1");
    if (lambda.size() != d)
        throw std::invalid_argument("lambda must carry one eigenvalue per component");
    for (double l : lambda)
        if (!(l >= 0.0)) throw std::invalid_argument("covariance eigenvalues must be >= 0");
}

double WienerSpec::trace() const {
    double s = 0.0;
    for (double l : lambda) s += l;
    return s;
}

bool WienerSpec::has_noise() const {
    for (double l : lambda)
        if (l > 0.0) return true;
    return false;
}

PathEnsemble::PathEnsemble(TimeGrid grid, WienerSpec spec, std::size_t paths,
                           std::uint64_t seed)
    : grid_(std::move(grid)),
      spec_(std::move(spec)),
      paths_(paths),
      intervals_(grid_.cells()),
      seed_(seed) {
    if (paths_ == 0) throw std::invalid_argument("path count must be >= 1");
    const std::size_t d = spec_.d;

    std::vector<double> sig(intervals_ * d);
    for (std::size_t i = 0; i < intervals_; ++i)
        for (std::size_t k = 0; k < d; ++k)
            sig[i * d + k] = std::sqrt(spec_.lambda[k] * grid_.dt(i));

    inc_.resize(paths_ * intervals_ * d);
    cum_.resize(paths_ * (intervals_ + 1) * d, 0.0);
    for (std::size_t m = 0; m < paths_; ++m) {
        for (std::size_t i = 0; i < intervals_; ++i) {
            for (std::size_t k = 0; k < d; ++k) {
                const double s = sig[i * d + k];
                const double z = (s == 0.0) ? 0.0 : rng::gaussian(seed_, m, i, k);
                const double dw = s * z;
                inc_[(m * intervals_ + i) * d + k] = dw;
                cum_[((i + 1) * paths_ + m) * d + k] = cum_[(i * paths_ + m) * d + k] + dw;
            }
        }
    }
}

void PathEnsemble::write_csv(std::ostream& os) const {
    os << "path,interval,component,increment\n";
    for (std::size_t m = 0; m < paths_; ++m)
        for (std::size_t i = 0; i < intervals_; ++i)
            for (std::size_t k = 0; k < spec_.d; ++k)
                os << m << ',' << i << ',' << k << ',' << io::num(increment(m, i, k)) << '\n';
}

PathEnsemble generate_paths(const TimeGrid& grid, const WienerSpec& spec, std::size_t paths,
                            std::uint64_t seed) {
    return PathEnsemble(grid, spec, paths, seed);
}

} // namespace sbsvie
