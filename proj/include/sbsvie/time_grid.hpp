#pragma once

#include <cstddef>
#include <vector>

namespace sbsvie {

// Partition 0 = t_0 < t_1 < ... < t_N = T shared by every field of a run.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> nodes);

    static TimeGrid uniform(std::size_t cells, double horizon);
    // Globally graded nodes T * (j/N)^exponent; exponent = 1 is uniform.
    static TimeGrid graded(std::size_t cells, double horizon, double exponent);

    std::size_t cells() const { return nodes_.size() - 1; } // N
    std::size_t size() const { return nodes_.size(); }      // N + 1
    double node(std::size_t i) const { return nodes_[i]; }
    double dt(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
    double horizon() const { return nodes_.back(); }
    const std::vector<double>& nodes() const { return nodes_; }

    // Index of the node equal to t (within |t| * 1e-12 + 1e-14); throws if t
    // is not a grid node.
    std::size_t index_of(double t) const;
    // Largest index with node <= t.
    std::size_t floor_index(double t) const;

private:
    std::vector<double> nodes_;
};

} // namespace sbsvie
