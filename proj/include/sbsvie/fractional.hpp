#pragma once

namespace sbsvie {

// Order a of the singular kernel (s-t)^(a-1), restricted to (1/2, 1).
// The lower bound carries a guard of 1e-6 so 1/(2a-1) stays bounded.
class FractionalOrder {
public:
    explicit FractionalOrder(double alpha);

    double value() const { return alpha_; }
    // 1/(2 alpha - 1), finite and positive by construction
    double singular_reciprocal() const;

private:
    double alpha_;
};

// (s - t)^(alpha - 1); throws std::domain_error for s <= t.
double kernel_value(const FractionalOrder& alpha, double t, double s);

// Closed form of the cell moment  integral_a^b (s-t)^(alpha-1) (s-a)^p ds,
// p in {0, 1}; requires t <= a < b.
double kernel_moment(const FractionalOrder& alpha, double t, double a, double b, int p);

struct SquaredKernelBound {
    double tight;    // (T-t)^(2a-1) / (2a-1)
    double majorant; // (2T)^(2a) / (2a-1)
};

// Bounds for integral_t^T (r-t)^(2a-2) dr as used in the sup-x estimate.
SquaredKernelBound squared_kernel_constant(const FractionalOrder& alpha, double T, double t);

} // namespace sbsvie
