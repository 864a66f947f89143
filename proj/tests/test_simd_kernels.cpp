#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sbsvie/simd_kernels.hpp"

using namespace sbsvie;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    std::vector<double> v(n);
    for (double& x : v) x = u(gen);
    return v;
}

const std::size_t sizes[] = {0, 1, 2, 3, 4, 5, 7, 8, 15, 16, 17, 63, 64, 65, 1000, 1001};

} // namespace

TEST_CASE("reduction kernels agree across backends") {
    const auto& S = kernels::scalar_table();
    const auto& A = kernels::active();
    INFO("active backend: ", A.name);
    for (std::size_t n : sizes) {
        auto x = random_vec(n, 11 * n + 1);
        auto y = random_vec(n, 13 * n + 2);
        auto z = random_vec(n, 17 * n + 3);
        const double tol = 1e-13 * (static_cast<double>(n) + 1.0);
        CHECK(std::abs(S.sum(x.data(), n) - A.sum(x.data(), n)) <= tol);
        CHECK(std::abs(S.dot(x.data(), y.data(), n) - A.dot(x.data(), y.data(), n)) <= tol);
        CHECK(std::abs(S.dot3(x.data(), y.data(), z.data(), n) -
                       A.dot3(x.data(), y.data(), z.data(), n)) <= tol);
        CHECK(std::abs(S.sumsq(x.data(), n) - A.sumsq(x.data(), n)) <= tol);
        CHECK(std::abs(S.wsumsq(y.data(), x.data(), n) - A.wsumsq(y.data(), x.data(), n)) <=
              tol);

        double ps[9], pa[9];
        S.power_sums(x.data(), n, 8, ps);
        A.power_sums(x.data(), n, 8, pa);
        for (int p = 0; p <= 8; ++p) CHECK(std::abs(ps[p] - pa[p]) <= tol);
        S.weighted_power_sums(x.data(), y.data(), n, 8, ps);
        A.weighted_power_sums(x.data(), y.data(), n, 8, pa);
        for (int p = 0; p <= 8; ++p) CHECK(std::abs(ps[p] - pa[p]) <= tol);
    }
}

TEST_CASE("element-wise kernels are bit-identical across backends") {
    const auto& S = kernels::scalar_table();
    const auto& A = kernels::active();
    for (std::size_t n : sizes) {
        auto x = random_vec(n, 3 * n + 7);
        auto b = random_vec(n, 5 * n + 9);
        const double c[4] = {0.3, -1.25, 0.07, 2.0};

        auto y1 = random_vec(n, n + 4), y2 = y1;
        S.axpy(y1.data(), 1.7, x.data(), n);
        A.axpy(y2.data(), 1.7, x.data(), n);
        CHECK(y1 == y2);

        y1 = random_vec(n, n + 5), y2 = y1;
        S.addmul(y1.data(), x.data(), b.data(), n);
        A.addmul(y2.data(), x.data(), b.data(), n);
        CHECK(y1 == y2);

        y1 = random_vec(n, n + 6), y2 = y1;
        S.scale(y1.data(), -0.75, n);
        A.scale(y2.data(), -0.75, n);
        CHECK(y1 == y2);

        std::vector<double> o1(n), o2(n);
        S.polyval(x.data(), n, c, 4, o1.data());
        A.polyval(x.data(), n, c, 4, o2.data());
        CHECK(o1 == o2);

        o1 = random_vec(n, n + 8), o2 = o1;
        S.polyval_add(x.data(), n, c, 4, o1.data());
        A.polyval_add(x.data(), n, c, 4, o2.data());
        CHECK(o1 == o2);
    }
}

TEST_CASE("kernel identities") {
    const auto& A = kernels::active();
    std::vector<double> ones(257, 1.0);
    CHECK(A.sum(ones.data(), ones.size()) == 257.0);
    CHECK(A.sumsq(ones.data(), ones.size()) == 257.0);

    auto x = random_vec(129, 99);
    CHECK(A.dot(x.data(), x.data(), x.size()) ==
          doctest::Approx(A.sumsq(x.data(), x.size())).epsilon(1e-14));
    double ps[3];
    A.power_sums(x.data(), x.size(), 2, ps);
    CHECK(ps[0] == 129.0);
    CHECK(ps[1] == doctest::Approx(A.sum(x.data(), x.size())).epsilon(1e-13));
    CHECK(ps[2] == doctest::Approx(A.sumsq(x.data(), x.size())).epsilon(1e-13));
}

TEST_CASE("forced scalar backend round-trip") {
    const std::string active_name = kernels::active().name;
    kernels::force_backend("scalar");
    CHECK(std::string(kernels::active().name) == "scalar");
    CHECK_THROWS_AS(kernels::force_backend("not-a-backend"), std::invalid_argument);
    kernels::force_backend(active_name);
    CHECK(std::string(kernels::active().name) == active_name);
}
