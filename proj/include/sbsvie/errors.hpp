#pragma once

#include <stdexcept>
#include <string>

namespace sbsvie {

// Raised when an assumption check (H1, H11, H3) fails before or during a solve.
class AssumptionError : public std::runtime_error {
public:
    explicit AssumptionError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when the implicit y-loop stops contracting. Carries the smallness
// factor 32 c (2T)^{2a}/(2a-1) whose violation explains the divergence.
class DivergedError : public std::runtime_error {
public:
    DivergedError(const std::string& what, double gate_factor)
        : std::runtime_error(what), gate_factor(gate_factor) {}
    double gate_factor;
};

} // namespace sbsvie
