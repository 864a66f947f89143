#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sbsvie/linear_solver.hpp"
#include "sbsvie/stats.hpp"

using namespace sbsvie;

namespace {

struct Setup {
    TimeGrid grid;
    PathEnsemble ens;
    RegressionEngine eng;
    Setup(std::size_t N, std::size_t M, std::uint64_t seed, int degree = 3)
        : grid(TimeGrid::uniform(N, 1.0)),
          ens(grid, WienerSpec(1, {1.0}), M, seed),
          eng(ens, RegressionBasis{degree}) {}
};

LinearData zero_data(const Setup& s) {
    LinearData d;
    d.xi = PathValues(s.ens.paths(), 1);
    d.f = TwoParamField(s.ens.paths(), s.grid.size(), 1, true);
    d.g = TwoParamField(s.ens.paths(), s.grid.size(), 1, false);
    return d;
}

LinearData martingale_data(const Setup& s) {
    LinearData d = zero_data(s);
    for (std::size_t m = 0; m < s.ens.paths(); ++m)
        d.xi.at(m)[0] = s.ens.cumulative(m, s.grid.cells(), 0);
    return d;
}

} // namespace

TEST_CASE("closed form: f = g = 0, xi = W_T gives x = W, y = -(s-t)^{1-a}") {
    Setup s(16, 40000, 404);
    const FractionalOrder alpha(0.75);
    LinearData data = martingale_data(s);
    LinearSolution sol = solve_linear(data, s.ens, alpha, s.eng);

    double xe = 0;
    for (std::size_t m = 0; m < s.ens.paths(); ++m)
        for (std::size_t i = 0; i <= 16; ++i) {
            const double dv = sol.x.at(m, i)[0] - s.ens.cumulative(m, i, 0);
            xe += dv * dv;
        }
    CHECK(std::sqrt(xe / (s.ens.paths() * 17.0)) < 0.05);

    double ye = 0;
    std::size_t cnt = 0;
    const double dt = s.grid.dt(0);
    for (std::size_t m = 0; m < s.ens.paths(); ++m)
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = i + 1; j <= 16; ++j) {
                const double gap = s.grid.node(j) - s.grid.node(i);
                if (gap < 2.0 * dt - 1e-12) continue;
                const double dv = sol.y.value1(m, i, j) + std::pow(gap, 0.25);
                ye += dv * dv;
                ++cnt;
            }
    CHECK(std::sqrt(ye / cnt) < 0.1);

    // y_tilde is the raw representation integrand: close to -1 everywhere
    double yte = 0;
    for (std::size_t m = 0; m < s.ens.paths(); ++m)
        for (std::size_t j = 1; j <= 16; ++j)
            yte += std::pow(sol.y_tilde.second_at(m, j)[0] + 1.0, 2);
    CHECK(std::sqrt(yte / (s.ens.paths() * 16.0)) < 0.06);
}

TEST_CASE("closed form: deterministic f = 1 gives x(t) = (T-t)^a/a, y = 0") {
    Setup s(16, 5000, 405);
    const FractionalOrder alpha(0.75);
    LinearData data = zero_data(s);
    data.f.ensure_det();
    for (std::size_t i = 0; i <= 16; ++i)
        for (std::size_t j = i; j <= 16; ++j) data.f.det_at(i, j)[0] = 1.0;
    LinearSolution sol = solve_linear(data, s.ens, alpha, s.eng);
    for (std::size_t i = 0; i <= 16; ++i) {
        const double target = std::pow(1.0 - s.grid.node(i), 0.75) / 0.75;
        for (std::size_t m = 0; m < 16; ++m)
            CHECK(sol.x.at(m, i)[0] == doctest::Approx(target).epsilon(1e-10));
    }
    for (std::size_t m = 0; m < 16; ++m)
        for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t j = i + 1; j <= 16; ++j)
                CHECK(std::abs(sol.y.value1(m, i, j)) < 0.01);
    CHECK(residual_check(sol, data, s.ens, alpha) < 1e-10);
}

TEST_CASE("closed form: constant xi with deterministic g gives x = c, y = -g") {
    Setup s(12, 3000, 406);
    const FractionalOrder alpha(0.8);
    LinearData data = zero_data(s);
    for (std::size_t m = 0; m < s.ens.paths(); ++m) data.xi.at(m)[0] = 2.5;
    data.g.ensure_det();
    for (std::size_t i = 0; i < 12; ++i)
        for (std::size_t j = i + 1; j <= 12; ++j)
            data.g.det_at(i, j)[0] = std::cos(s.grid.node(i)) + s.grid.node(j);
    LinearSolution sol = solve_linear(data, s.ens, alpha, s.eng);
    for (std::size_t m = 0; m < 8; ++m) {
        for (std::size_t i = 0; i <= 12; ++i)
            CHECK(sol.x.at(m, i)[0] == doctest::Approx(2.5).epsilon(1e-12));
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = i + 1; j <= 12; ++j) {
                CHECK(std::abs(sol.y_tilde.value1(m, i, j)) < 1e-12);
                CHECK(sol.y.value1(m, i, j) ==
                      doctest::Approx(-(std::cos(s.grid.node(i)) + s.grid.node(j)))
                          .epsilon(1e-12));
            }
    }
    CHECK(residual_check(sol, data, s.ens, alpha) < 1e-8);
}

TEST_CASE("residual: zero data gives exactly zero") {
    Setup s(8, 500, 407);
    LinearData data = zero_data(s);
    LinearSolution sol = solve_linear(data, s.ens, FractionalOrder(0.75), s.eng);
    CHECK(residual_check(sol, data, s.ens, FractionalOrder(0.75)) == 0.0);
}

TEST_CASE("linearity: doubling the data doubles the solution exactly") {
    Setup s(10, 4000, 408);
    const FractionalOrder alpha(0.7);
    LinearData data = martingale_data(s);
    data.f.ensure_det();
    for (std::size_t i = 0; i <= 10; ++i)
        for (std::size_t j = i; j <= 10; ++j) data.f.det_at(i, j)[0] = 0.3 * s.grid.node(j);
    LinearData data2 = zero_data(s);
    data2.f.ensure_det();
    for (std::size_t m = 0; m < s.ens.paths(); ++m)
        data2.xi.at(m)[0] = 2.0 * data.xi.at(m)[0];
    for (std::size_t i = 0; i <= 10; ++i)
        for (std::size_t j = i; j <= 10; ++j)
            data2.f.det_at(i, j)[0] = 2.0 * data.f.det_at(i, j)[0];

    LinearSolution a = solve_linear(data, s.ens, alpha, s.eng);
    LinearSolution b = solve_linear(data2, s.ens, alpha, s.eng);
    for (std::size_t m = 0; m < s.ens.paths(); m += 97)
        for (std::size_t i = 0; i <= 10; ++i) {
            CHECK(b.x.at(m, i)[0] == 2.0 * a.x.at(m, i)[0]);
            for (std::size_t j = i + 1; j <= 10; ++j)
                CHECK(b.y.value1(m, i, j) == 2.0 * a.y.value1(m, i, j));
        }
}

TEST_CASE("terminal condition holds exactly per path") {
    Setup s(8, 3000, 409);
    LinearData data = martingale_data(s);
    LinearSolution sol = solve_linear(data, s.ens, FractionalOrder(0.75), s.eng);
    for (std::size_t m = 0; m < s.ens.paths(); ++m)
        CHECK(sol.x.at(m, 8)[0] == data.xi.at(m)[0]);
}

TEST_CASE("uniqueness surrogate: regression degrees 3 and 4 agree on the closed form") {
    Setup s3(12, 20000, 410, 3);
    RegressionEngine eng4(s3.ens, RegressionBasis{4});
    LinearData data = martingale_data(s3);
    const FractionalOrder alpha(0.75);
    LinearSolution a = solve_linear(data, s3.ens, alpha, s3.eng);
    LinearSolution b = solve_linear(data, s3.ens, alpha, eng4);
    double acc = 0;
    for (std::size_t m = 0; m < s3.ens.paths(); ++m)
        for (std::size_t i = 0; i <= 12; ++i) {
            const double dv = a.x.at(m, i)[0] - b.x.at(m, i)[0];
            acc += dv * dv;
        }
    CHECK(std::sqrt(acc / (s3.ens.paths() * 13.0)) < 0.05);
}

TEST_CASE("representation consistency against the residual-regression oracle") {
    Setup s(8, 50000, 411);
    const FractionalOrder alpha(0.75);
    LinearData data = martingale_data(s);
    LinearSolution sol = solve_linear(data, s.ens, alpha, s.eng);

    // R(t_i) = x(t_i) - xi; regress R * dW_l on the basis at u_l and divide by
    // lambda dt to recover y_tilde(t_i, u_l), independently of the L/K route
    RegressionEngine eng1(s.ens, RegressionBasis{1});
    for (std::size_t i : {0ul, 3ul}) {
        PathValues r(s.ens.paths(), 1);
        for (std::size_t m = 0; m < s.ens.paths(); ++m)
            r.at(m)[0] = sol.x.at(m, i)[0] - data.xi.at(m)[0];
        for (std::size_t l = i + 1; l < 8; ++l) {
            PathValues prod(s.ens.paths(), 1);
            for (std::size_t m = 0; m < s.ens.paths(); ++m)
                prod.at(m)[0] = r.at(m)[0] * s.ens.increment(m, l, 0);
            PathValues fitted = eng1.condexp(prod, l);
            double diff = 0;
            for (std::size_t m = 0; m < s.ens.paths(); ++m) {
                const double oracle = fitted.at(m)[0] / s.grid.dt(l);
                diff += oracle - sol.y_tilde.value1(m, i, l);
            }
            CHECK(std::abs(diff / s.ens.paths()) < 0.1);
        }
    }
}

TEST_CASE("intermediate bounds (sup-x and y-tilde mass)") {
    Setup s(16, 20000, 412);
    const FractionalOrder alpha(0.75);
    const double kfac = squared_kernel_constant(alpha, 1.0, 0.0).majorant;

    LinearData data = martingale_data(s);
    data.f.ensure_det();
    for (std::size_t i = 0; i <= 16; ++i)
        for (std::size_t j = i; j <= 16; ++j)
            data.f.det_at(i, j)[0] = 0.5 * std::sin(2.0 * s.grid.node(j));
    LinearSolution sol = solve_linear(data, s.ens, alpha, s.eng);

    const std::size_t M = s.ens.paths();
    std::vector<double> sup(M), mass(M);
    sol.x.sup_sq_per_path(0, sup.data());
    const double xi2 = second_moment(data.xi);

    double fint = 0; // int_0^T |f(0,r)|^2 dr, f deterministic here
    for (std::size_t r = 0; r < 16; ++r) {
        const double fa = data.f.det_at(0, r)[0];
        const double fb = data.f.det_at(0, r + 1)[0];
        fint += 0.5 * s.grid.dt(r) * (fa * fa + fb * fb);
    }
    const double sup_se = stats::se_of_mean(sup.data(), M);
    CHECK(stats::mean(sup.data(), M) <=
          8.0 * xi2 + 8.0 * kfac * fint + 5.0 * sup_se);

    y_mass_per_path(sol.y_tilde, 0, s.grid, mass.data());
    const double mass_se = stats::se_of_mean(mass.data(), M);
    CHECK(stats::mean(mass.data(), M) <=
          8.0 * 1.0 * xi2 + 4.0 * kfac * fint + 5.0 * mass_se);
}

TEST_CASE("a-priori bound audit: xi = W_T example (rhs = 24 E|xi|^2)") {
    Setup s(16, 20000, 413);
    const FractionalOrder alpha(0.75);
    LinearData data = martingale_data(s);
    LinearSolution sol = solve_linear(data, s.ens, alpha, s.eng);
    BoundAudit audit = apriori_bound_audit(sol, data, 0, s.ens, alpha);
    CHECK(audit.holds);
    CHECK(audit.rhs == doctest::Approx(24.0 * second_moment(data.xi)).epsilon(1e-12));
    // lhs ~ E sup W^2 + 4/15: sanity corridor
    CHECK(audit.lhs > 1.0);
    CHECK(audit.lhs < 4.0);
}

TEST_CASE("a-priori bound audit: all-zero data") {
    Setup s(8, 200, 414);
    LinearData data = zero_data(s);
    LinearSolution sol = solve_linear(data, s.ens, FractionalOrder(0.75), s.eng);
    BoundAudit audit = apriori_bound_audit(sol, data, 0, s.ens, FractionalOrder(0.75));
    CHECK(audit.lhs == 0.0);
    CHECK(audit.rhs == 0.0);
    CHECK(audit.holds);
}

TEST_CASE("a-priori bound audit: randomized deterministic-coefficient problems") {
    std::mt19937_64 gen(415);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const double al = 0.55 + 0.4 * u(gen);
        Setup s(12, 2000, 500 + trial);
        const FractionalOrder alpha(al);
        LinearData data = zero_data(s);
        const double c0 = 2.0 * u(gen) - 1.0, c1 = 2.0 * u(gen) - 1.0;
        for (std::size_t m = 0; m < s.ens.paths(); ++m)
            data.xi.at(m)[0] = c0 + c1 * s.ens.cumulative(m, 12, 0);
        data.f.ensure_det();
        data.g.ensure_det();
        const double a0 = 2.0 * u(gen) - 1.0, w0 = 6.0 * u(gen), p0 = 6.0 * u(gen);
        const double b0 = 2.0 * u(gen) - 1.0;
        for (std::size_t i = 0; i <= 12; ++i)
            for (std::size_t j = i; j <= 12; ++j)
                data.f.det_at(i, j)[0] = a0 * std::cos(w0 * s.grid.node(j) + p0);
        for (std::size_t i = 0; i < 12; ++i)
            for (std::size_t j = i + 1; j <= 12; ++j)
                data.g.det_at(i, j)[0] = b0 * (1.0 + s.grid.node(i)) * s.grid.node(j);
        LinearSolution sol = solve_linear(data, s.ens, alpha, s.eng);
        for (std::size_t t : {0ul, 6ul}) {
            BoundAudit audit = apriori_bound_audit(sol, data, t, s.ens, alpha);
            REQUIRE(audit.holds);
        }
    }
}

TEST_CASE("future-leak: solver x is adapted") {
    Setup s(12, 30000, 416);
    LinearData data = martingale_data(s);
    LinearSolution sol = solve_linear(data, s.ens, FractionalOrder(0.75), s.eng);
    const std::size_t M = s.ens.paths();
    for (auto [i, fut] : {std::pair<std::size_t, std::size_t>{2, 5}, {4, 10}, {0, 0}}) {
        double su = 0, sv = 0, suu = 0, suv = 0;
        std::vector<double> uu(M), vv(M);
        for (std::size_t m = 0; m < M; ++m) {
            uu[m] = s.ens.increment(m, fut, 0);
            vv[m] = sol.x.at(m, i)[0];
            su += uu[m];
            sv += vv[m];
        }
        const double mu = su / M, mv = sv / M;
        for (std::size_t m = 0; m < M; ++m) {
            suu += (uu[m] - mu) * (uu[m] - mu);
            suv += (uu[m] - mu) * (vv[m] - mv);
        }
        const double slope = suv / suu;
        double ss = 0;
        for (std::size_t m = 0; m < M; ++m) {
            const double r = vv[m] - mv - slope * (uu[m] - mu);
            ss += r * r;
        }
        const double se = std::sqrt(ss / (M - 2) / suu);
        CHECK(std::abs(slope) < 5.0 * se);
    }
}

TEST_CASE("future-leak: the y field is adapted in its second argument") {
    Setup s(10, 30000, 418);
    LinearData data = martingale_data(s);
    LinearSolution sol = solve_linear(data, s.ens, FractionalOrder(0.75), s.eng);
    const std::size_t M = s.ens.paths();
    // y(t_i, u_l) must not load on the increment over [u_l, u_{l+1}]
    for (auto [i, l] : {std::pair<std::size_t, std::size_t>{0, 3}, {2, 7}, {1, 5}}) {
        std::vector<double> uu(M), vv(M);
        for (std::size_t m = 0; m < M; ++m) {
            uu[m] = s.ens.increment(m, l, 0);
            vv[m] = sol.y.value1(m, i, l);
        }
        double su = 0, sv = 0;
        for (std::size_t m = 0; m < M; ++m) {
            su += uu[m];
            sv += vv[m];
        }
        const double mu = su / M, mv = sv / M;
        double suu = 0, suv = 0;
        for (std::size_t m = 0; m < M; ++m) {
            suu += (uu[m] - mu) * (uu[m] - mu);
            suv += (uu[m] - mu) * (vv[m] - mv);
        }
        const double slope = suv / suu;
        double ss = 0;
        for (std::size_t m = 0; m < M; ++m) {
            const double r = vv[m] - mv - slope * (uu[m] - mu);
            ss += r * r;
        }
        const double se = std::sqrt(ss / (M - 2) / suu);
        CHECK(std::abs(slope) < 5.0 * se);
    }
}

TEST_CASE("data validation") {
    Setup s(8, 100, 417);
    LinearData data = zero_data(s);
    data.f = TwoParamField(100, 9, 1, false); // wrong: f must include the diagonal
    CHECK_THROWS_AS(solve_linear(data, s.ens, FractionalOrder(0.75), s.eng),
                    std::invalid_argument);
    LinearData data2 = zero_data(s);
    data2.xi = PathValues(50, 1); // wrong path count
    CHECK_THROWS_AS(solve_linear(data2, s.ens, FractionalOrder(0.75), s.eng),
                    std::invalid_argument);
}
