#pragma once

namespace sbsvie {

// Concavity modulus rho of Assumption H3: concave, nondecreasing, rho(0) = 0,
// with an affine majorant rho(u) <= a + b u. Three shipped kinds:
//   linear  rho(u) = b u                     (a = 0)
//   affine  rho(u) = a + b u for u > 0       (the majorant itself)
//   log     rho(u) = u (1 - ln u) on (0,1], continued by 1 past u = 1
//           (the non-Lipschitz stress modulus; majorant pair (1, 0))
class ModulusRho {
public:
    enum class Kind { Affine, Linear, Log };

    static ModulusRho affine(double a, double b);
    static ModulusRho linear(double b);
    static ModulusRho log_modulus();

    double operator()(double u) const;
    Kind kind() const { return kind_; }
    double a() const { return a_; }
    double b() const { return b_; }

private:
    ModulusRho(Kind k, double a, double b) : kind_(k), a_(a), b_(b) {}
    Kind kind_;
    double a_;
    double b_;
};

} // namespace sbsvie
