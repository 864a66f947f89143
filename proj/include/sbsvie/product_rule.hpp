#pragma once

#include <cstddef>
#include <vector>

#include "sbsvie/fractional.hpp"
#include "sbsvie/time_grid.hpp"

namespace sbsvie {

// Product-integration rule for  integral_{t_start}^{T} (s - t_kernel)^(alpha-1) phi(s) ds,
// exact whenever phi is piecewise linear on the grid. One weight per node
// j = start_index .. N; weights are nonnegative and sum to the kernel mass.
struct ProductRule {
    std::size_t kernel_index = 0; // left point of the kernel, t_kernel = t_i
    std::size_t start_index = 0;  // integration starts at t_start >= t_kernel
    std::vector<double> weights;  // weights[j - start_index] multiplies phi(t_j)

    bool empty() const { return weights.empty(); }
    double weight_at_node(std::size_t j) const { return weights[j - start_index]; }
    // total mass = ((T - t_kernel)^alpha - (t_start - t_kernel)^alpha) / alpha
    double mass() const;
    // apply to nodal values with stride (values[0] belongs to node start_index)
    double apply(const double* values, std::size_t stride = 1) const;
};

// Standard rule with integration starting at the kernel's left point.
ProductRule product_weights(const TimeGrid& grid, const FractionalOrder& alpha,
                            std::size_t left_index);

// Generalized rule: kernel anchored at t_{kernel_index}, integration over
// [t_{start_index}, T] with kernel_index <= start_index, as needed by the
// y-tilde assembly where the kernel left point and the integral start differ.
ProductRule product_weights(const TimeGrid& grid, const FractionalOrder& alpha,
                            std::size_t kernel_index, std::size_t start_index);

// Average of the kernel over cell l for left point t_i:
//   integral_{t_l}^{t_{l+1}} (s - t_i)^(alpha-1) ds / dt_l,  l >= i.
double cell_average_kernel(const TimeGrid& grid, const FractionalOrder& alpha,
                           std::size_t left_index, std::size_t cell);

} // namespace sbsvie
