#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace sbsvie {

struct RunConfig {
    double alpha = 0.75;
    double T = 1.0;
    std::size_t n = 1;
    std::size_t d = 1;
    std::vector<double> lambda = {1.0};
    std::size_t paths = 10000; // M
    std::size_t cells = 32;    // N
    double grading = 1.0;      // grid exponent, 1 = uniform
    std::uint64_t seed = 12345;
    int degree = 3;
    int max_iter = 25;
    double tol = 1e-6;
    int inner_max = 20;
    double inner_tol = 1e-7;
    std::size_t export_paths = 100; // solution.csv path cap (0 = all)
    std::string out_dir = "out";
    std::string scenario;
    std::string sweep;
    std::string tag;
    bool stepped = false;
};

} // namespace sbsvie
