#pragma once

#include <cstddef>
#include <vector>

#include "sbsvie/fields.hpp"
#include "sbsvie/wiener.hpp"

namespace sbsvie {

// Polynomial-in-current-state basis: all monomials of the components of
// W(t_i) up to total degree `degree` (including the constant).
struct RegressionBasis {
    int degree = 3;
};

// Least-squares estimator of E{ . | F_{t_i}} on a fixed ensemble. Gram
// factorizations are cached per node; on rank deficiency the degree falls
// back until the factorization succeeds (degree 0 always does).
class RegressionEngine {
public:
    RegressionEngine(const PathEnsemble& ens, RegressionBasis basis);

    const PathEnsemble& ensemble() const { return *ens_; }
    const RegressionBasis& basis() const { return basis_; }
    std::size_t full_basis_size() const { return exps_.size(); }
    int effective_degree(std::size_t i) const;

    // fitted values of the projection of `values` onto the basis at node i;
    // returns `values` unchanged at i = N and for path-constant inputs
    PathValues condexp(const PathValues& values, std::size_t i) const;

private:
    struct NodeCache {
        bool ready = false;
        int degree = 0;        // effective degree after fallback
        std::size_t k = 0;     // basis size in use
        std::vector<double> chol;   // k x k lower factor of the scaled Gram
        std::vector<double> sigma;  // per-component scale of W(t_i)
    };

    const NodeCache& node(std::size_t i) const;
    void fit(const PathValues& values, std::size_t i, PathValues& out) const;

    const PathEnsemble* ens_;
    RegressionBasis basis_;
    std::vector<std::vector<int>> exps_; // monomial exponents, ordered by total degree
    std::vector<std::size_t> degree_offsets_; // basis size for degree 0..p
    mutable std::vector<NodeCache> cache_;
};

// Decomposition  V = mean + sum_i integrand(t_i) dW_i  extracted by increment
// regression; integrand is stored per (path, interval) as an n x d matrix
// (row-major), the column for component k estimating L_k(t_i).
struct MartingaleRep {
    std::vector<double> mean;                      // n
    AdaptedProcess integrand;                      // paths x intervals x (n*d)
    std::size_t state_dim = 0;
    std::size_t wiener_dim = 0;
};

MartingaleRep martingale_representation(const PathValues& values, const PathEnsemble& ens,
                                        const RegressionEngine& engine);

// Representation of a time-s_j observation, integrand forced to zero on
// intervals i >= j (the K(s,u) = 0 for u >= s property).
MartingaleRep truncated_representation(const PathValues& values, std::size_t observed_at,
                                       const PathEnsemble& ens,
                                       const RegressionEngine& engine);

// RMSE over paths of | V - mean - sum_i integrand dW_i |
double representation_residual(const MartingaleRep& rep, const PathValues& values,
                               const PathEnsemble& ens);

// One representation per observation node s_j.
std::vector<MartingaleRep> driver_representation(const std::vector<PathValues>& driver_at,
                                                 const PathEnsemble& ens,
                                                 const RegressionEngine& engine);

} // namespace sbsvie
