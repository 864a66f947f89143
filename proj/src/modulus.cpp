#include "sbsvie/modulus.hpp"

#include <cmath>
#include <stdexcept>

namespace sbsvie {

ModulusRho ModulusRho::affine(double a, double b) {
    if (!(a >= 0.0) || !(b >= 0.0)) throw std::invalid_argument("modulus needs a, b >= 0");
    return ModulusRho(Kind::Affine, a, b);
}

ModulusRho ModulusRho::linear(double b) {
    if (!(b >= 0.0)) throw std::invalid_argument("modulus needs b >= 0");
    return ModulusRho(Kind::Linear, 0.0, b);
}

ModulusRho ModulusRho::log_modulus() { return ModulusRho(Kind::Log, 1.0, 0.0); }

double ModulusRho::operator()(double u) const {
    if (!(u > 0.0)) return 0.0;
    switch (kind_) {
        case Kind::Affine: return a_ + b_ * u;
        case Kind::Linear: return b_ * u;
        case Kind::Log: return u < 1.0 ? u * (1.0 - std::log(u)) : 1.0;
    }
    return 0.0;
}

} // namespace sbsvie
