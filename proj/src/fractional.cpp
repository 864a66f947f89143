#include "sbsvie/fractional.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sbsvie {

namespace {
constexpr double kAlphaGuard = 0.5 + 1e-6;
}

FractionalOrder::FractionalOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > kAlphaGuard) || !(alpha < 1.0)) {
        std::ostringstream os;
        os << "fractional order must satisfy 0.5 + 1e-6 < alpha < 1, got " << alpha;
        throw std::domain_error(os.str());
    }
}

double FractionalOrder::singular_reciprocal() const { return 1.0 / (2.0 * alpha_ - 1.0); }

double kernel_value(const FractionalOrder& alpha, double t, double s) {
    if (!(s > t)) {
        std::ostringstream os;
        os << "kernel (s-t)^(alpha-1) requires s > t, got t=" << t << ", s=" << s;
        throw std::domain_error(os.str());
    }
    return std::pow(s - t, alpha.value() - 1.0);
}

double kernel_moment(const FractionalOrder& alpha, double t, double a, double b, int p) {
    if (!(t <= a) || !(a < b)) {
        std::ostringstream os;
        os << "kernel_moment requires t <= a < b, got t=" << t << ", a=" << a << ", b=" << b;
        throw std::domain_error(os.str());
    }
    if (p != 0 && p != 1) throw std::domain_error("kernel_moment supports p in {0,1}");

    const double al = alpha.value();
    const double ub = b - t;
    const double ua = a - t;
    const double m0 = (std::pow(ub, al) - std::pow(ua, al)) / al;
    if (p == 0) return m0;
    // substitute u = s - t:  integral u^(a-1) (u - (a-t)) du
    const double m1 = (std::pow(ub, al + 1.0) - std::pow(ua, al + 1.0)) / (al + 1.0) - ua * m0;
    return m1;
}

SquaredKernelBound squared_kernel_constant(const FractionalOrder& alpha, double T, double t) {
    if (!(t >= 0.0) || !(t <= T)) throw std::domain_error("require 0 <= t <= T");
    const double al = alpha.value();
    const double rec = alpha.singular_reciprocal();
    SquaredKernelBound out;
    out.tight = std::pow(T - t, 2.0 * al - 1.0) * rec;
    out.majorant = std::pow(2.0 * T, 2.0 * al) * rec;
    return out;
}

} // namespace sbsvie
