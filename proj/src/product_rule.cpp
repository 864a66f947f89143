#include "sbsvie/product_rule.hpp"

#include <sstream>
#include <stdexcept>

namespace sbsvie {

double ProductRule::mass() const {
    double total = 0.0;
    for (double w : weights) total += w;
    return total;
}

double ProductRule::apply(const double* values, std::size_t stride) const {
    double acc = 0.0;
    for (std::size_t r = 0; r < weights.size(); ++r) acc += weights[r] * values[r * stride];
    return acc;
}

ProductRule product_weights(const TimeGrid& grid, const FractionalOrder& alpha,
                            std::size_t left_index) {
    return product_weights(grid, alpha, left_index, left_index);
}

ProductRule product_weights(const TimeGrid& grid, const FractionalOrder& alpha,
                            std::size_t kernel_index, std::size_t start_index) {
    const std::size_t N = grid.cells();
    if (kernel_index > start_index || start_index > N) {
        std::ostringstream os;
        os << "product_weights requires kernel_index <= start_index <= N, got "
           << kernel_index << ", " << start_index << ", N=" << N;
        throw std::invalid_argument(os.str());
    }
    ProductRule rule;
    rule.kernel_index = kernel_index;
    rule.start_index = start_index;
    if (start_index == N) return rule; // empty interval, empty rule

    rule.weights.assign(N - start_index + 1, 0.0);
    const double t = grid.node(kernel_index);
    for (std::size_t l = start_index; l < N; ++l) {
        const double a = grid.node(l);
        const double b = grid.node(l + 1);
        const double m0 = kernel_moment(alpha, t, a, b, 0);
        const double m1 = kernel_moment(alpha, t, a, b, 1);
        const double right = m1 / (b - a);
        rule.weights[l - start_index] += m0 - right;
        rule.weights[l + 1 - start_index] += right;
    }
    return rule;
}

double cell_average_kernel(const TimeGrid& grid, const FractionalOrder& alpha,
                           std::size_t left_index, std::size_t cell) {
    if (cell < left_index || cell >= grid.cells())
        throw std::invalid_argument("cell_average_kernel: cell out of range");
    const double a = grid.node(cell);
    const double b = grid.node(cell + 1);
    return kernel_moment(alpha, grid.node(left_index), a, b, 0) / (b - a);
}

} // namespace sbsvie
