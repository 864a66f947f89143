#include "sbsvie/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sbsvie {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw std::invalid_argument("grid needs at least two nodes");
    if (nodes_.front() != 0.0) throw std::invalid_argument("grid must start at 0");
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i)
        if (!(nodes_[i] < nodes_[i + 1]))
            throw std::invalid_argument("grid nodes must be strictly increasing");
    if (!(nodes_.back() > 0.0)) throw std::invalid_argument("horizon must be positive");
}

TimeGrid TimeGrid::uniform(std::size_t cells, double horizon) {
    if (cells == 0) throw std::invalid_argument("grid needs at least one cell");
    std::vector<double> nodes(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j)
        nodes[j] = horizon * static_cast<double>(j) / static_cast<double>(cells);
    nodes[cells] = horizon;
    return TimeGrid(std::move(nodes));
}

TimeGrid TimeGrid::graded(std::size_t cells, double horizon, double exponent) {
    if (cells == 0) throw std::invalid_argument("grid needs at least one cell");
    if (!(exponent > 0.0)) throw std::invalid_argument("grading exponent must be positive");
    std::vector<double> nodes(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j)
        nodes[j] = horizon * std::pow(static_cast<double>(j) / static_cast<double>(cells),
                                      exponent);
    nodes[cells] = horizon;
    return TimeGrid(std::move(nodes));
}

std::size_t TimeGrid::index_of(double t) const {
    const double tol = std::abs(t) * 1e-12 + 1e-14;
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - tol);
    if (it == nodes_.end() || std::abs(*it - t) > tol) {
        std::ostringstream os;
        os << "time " << t << " is not a grid node";
        throw std::invalid_argument(os.str());
    }
    return static_cast<std::size_t>(it - nodes_.begin());
}

std::size_t TimeGrid::floor_index(double t) const {
    if (t <= nodes_.front()) return 0;
    if (t >= nodes_.back()) return nodes_.size() - 1;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

} // namespace sbsvie
