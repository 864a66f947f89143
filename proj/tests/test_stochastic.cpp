#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "sbsvie/fields.hpp"
#include "sbsvie/stats.hpp"
#include "sbsvie/wiener.hpp"

using namespace sbsvie;

TEST_CASE("wiener spec validation") {
    CHECK_THROWS_AS(WienerSpec(0, {}), std::invalid_argument);
    CHECK_THROWS_AS(WienerSpec(2, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(WienerSpec(1, {-0.5}), std::invalid_argument);
    WienerSpec s(3, {1.0, 0.5, 0.0});
    CHECK(s.trace() == doctest::Approx(1.5));
    CHECK(s.has_noise());
    CHECK_FALSE(WienerSpec(1, {0.0}).has_noise());
}

TEST_CASE("increment variance matches lambda dt (5 SE window)") {
    TimeGrid grid = TimeGrid::uniform(4, 1.0);
    PathEnsemble ens(grid, WienerSpec(1, {1.0}), 100000, 1234);
    for (std::size_t i = 0; i < 4; ++i) {
        double s = 0, s2 = 0;
        for (std::size_t m = 0; m < ens.paths(); ++m) {
            const double d = ens.increment(m, i, 0);
            s += d;
            s2 += d * d;
        }
        const double mean = s / ens.paths();
        const double var = s2 / ens.paths() - mean * mean;
        CHECK(var > 0.2375);
        CHECK(var < 0.2625);
        // mean within 5 SE of 0
        CHECK(std::abs(mean) < 5.0 * std::sqrt(0.25 / ens.paths()));
    }
}

TEST_CASE("disjoint increments are uncorrelated") {
    TimeGrid grid = TimeGrid::uniform(8, 1.0);
    PathEnsemble ens(grid, WienerSpec(1, {1.0}), 50000, 777);
    const std::size_t M = ens.paths();
    for (auto [i, j] : {std::pair<std::size_t, std::size_t>{0, 3}, {1, 7}, {2, 6}}) {
        double sxy = 0, sx2 = 0, sy2 = 0;
        for (std::size_t m = 0; m < M; ++m) {
            const double a = ens.increment(m, i, 0);
            const double b = ens.increment(m, j, 0);
            sxy += a * b;
            sx2 += a * a;
            sy2 += b * b;
        }
        const double corr = sxy / std::sqrt(sx2 * sy2);
        CHECK(std::abs(corr) < 5.0 / std::sqrt(static_cast<double>(M)));
    }
}

TEST_CASE("zero eigenvalue gives exactly zero increments") {
    TimeGrid grid = TimeGrid::uniform(6, 1.0);
    PathEnsemble ens(grid, WienerSpec(2, {1.0, 0.0}), 100, 9);
    for (std::size_t m = 0; m < ens.paths(); ++m)
        for (std::size_t i = 0; i < 6; ++i) CHECK(ens.increment(m, i, 1) == 0.0);
}

TEST_CASE("same seed reproduces the ensemble bitwise") {
    TimeGrid grid = TimeGrid::uniform(5, 2.0);
    PathEnsemble a(grid, WienerSpec(2, {1.0, 0.3}), 500, 42);
    PathEnsemble b(grid, WienerSpec(2, {1.0, 0.3}), 500, 42);
    PathEnsemble c(grid, WienerSpec(2, {1.0, 0.3}), 500, 43);
    bool identical = true, differs = false;
    for (std::size_t m = 0; m < 500; ++m)
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t k = 0; k < 2; ++k) {
                identical &= a.increment(m, i, k) == b.increment(m, i, k);
                differs |= a.increment(m, i, k) != c.increment(m, i, k);
            }
    CHECK(identical);
    CHECK(differs);
}

TEST_CASE("cumulative path telescopes the increments") {
    TimeGrid grid = TimeGrid::uniform(2, 1.0);
    PathEnsemble ens(grid, WienerSpec(1, {1.0}), 3, 5);
    for (std::size_t m = 0; m < 3; ++m) {
        CHECK(ens.cumulative(m, 0, 0) == 0.0);
        CHECK(ens.cumulative(m, 2, 0) ==
              doctest::Approx(ens.increment(m, 0, 0) + ens.increment(m, 1, 0))
                  .epsilon(1e-15));
    }
    // explicit arithmetic example: increments (0.1, -0.2) end at -0.1
    double w = 0.0;
    for (double d : {0.1, -0.2}) w += d;
    CHECK(w == doctest::Approx(-0.1));
}

TEST_CASE("second_moment examples") {
    PathValues v(4, 2);
    for (std::size_t m = 0; m < 4; ++m) {
        v.at(m)[0] = 3.0;
        v.at(m)[1] = 4.0;
    }
    CHECK(second_moment(v) == doctest::Approx(25.0).epsilon(1e-15));

    PathValues zero(10, 1);
    CHECK(second_moment(zero) == 0.0);

    TimeGrid grid = TimeGrid::uniform(8, 1.0);
    PathEnsemble ens(grid, WienerSpec(1, {1.0}), 100000, 21);
    PathValues wt(ens.paths(), 1);
    for (std::size_t m = 0; m < ens.paths(); ++m) wt.at(m)[0] = ens.cumulative(m, 8, 0);
    // E W_T^2 = 1 within 5 SE (SE of the second moment of N(0,1) ~ sqrt(2/M))
    CHECK(std::abs(second_moment(wt) - 1.0) < 5.0 * std::sqrt(2.0 / ens.paths()));
}

TEST_CASE("empirical m-norm: constant x") {
    TimeGrid grid = TimeGrid::uniform(8, 1.0);
    const std::size_t M = 50;
    AdaptedProcess x(M, grid.size(), 2);
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t i = 0; i < grid.size(); ++i) {
            x.at(m, i)[0] = 0.6;
            x.at(m, i)[1] = 0.8;
        }
    TwoParamField y(M, grid.size(), 2, false);
    CHECK(empirical_m_norm(x, y, 0, grid) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("empirical m-norm: y = 1 integrates to T^2/2") {
    TimeGrid grid = TimeGrid::uniform(64, 1.0);
    const std::size_t M = 3;
    AdaptedProcess x(M, grid.size(), 1);
    TwoParamField y(M, grid.size(), 1, false);
    y.ensure_det();
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = i + 1; j < grid.size(); ++j) y.det_at(i, j)[0] = 1.0;
    CHECK(std::abs(empirical_m_norm(x, y, 0, grid) - 0.5) < 1e-3);
}

TEST_CASE("empirical m-norm: x = W against the brute-force sup oracle") {
    const std::size_t N = 64;
    TimeGrid grid = TimeGrid::uniform(N, 1.0);
    PathEnsemble ens(grid, WienerSpec(1, {1.0}), 100000, 314);
    AdaptedProcess x(ens.paths(), grid.size(), 1);
    for (std::size_t m = 0; m < ens.paths(); ++m)
        for (std::size_t i = 0; i <= N; ++i) x.at(m, i)[0] = ens.cumulative(m, i, 0);
    TwoParamField y(ens.paths(), grid.size(), 1, false);

    std::vector<double> sup(ens.paths()), mass(ens.paths());
    m_norm_per_path(x, y, 0, grid, sup.data(), mass.data());
    const double est = stats::mean(sup.data(), ens.paths());
    const double se_est = stats::se_of_mean(sup.data(), ens.paths());

    double se_oracle = 0.0;
    const double oracle = oracles::sup_w_squared(1000000, N, 1.0, 2718, &se_oracle);
    const double combined = std::sqrt(se_est * se_est + se_oracle * se_oracle);
    CHECK(std::abs(est - oracle) < 3.0 * combined);
}

TEST_CASE("m-norm homogeneity is exact for power-of-two scaling") {
    TimeGrid grid = TimeGrid::uniform(6, 1.0);
    PathEnsemble ens(grid, WienerSpec(1, {1.0}), 64, 11);
    AdaptedProcess x(64, grid.size(), 1), x2(64, grid.size(), 1);
    TwoParamField y(64, grid.size(), 1, false), y2(64, grid.size(), 1, false);
    y.ensure_dense();
    y2.ensure_dense();
    for (std::size_t m = 0; m < 64; ++m) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            x.at(m, i)[0] = ens.cumulative(m, i, 0);
            x2.at(m, i)[0] = 2.0 * ens.cumulative(m, i, 0);
            for (std::size_t j = i + 1; j < grid.size(); ++j) {
                const double v = ens.cumulative(m, i, 0) - 0.3 * grid.node(j);
                y.dense_at(m, i, j)[0] = v;
                y2.dense_at(m, i, j)[0] = 2.0 * v;
            }
        }
    }
    for (std::size_t t = 0; t < grid.size(); ++t)
        CHECK(empirical_m_norm(x2, y2, t, grid) == 4.0 * empirical_m_norm(x, y, t, grid));
}

TEST_CASE("m-norm is non-increasing in t for non-increasing deterministic x") {
    TimeGrid grid = TimeGrid::uniform(10, 1.0);
    AdaptedProcess x(5, grid.size(), 1);
    for (std::size_t m = 0; m < 5; ++m)
        for (std::size_t i = 0; i < grid.size(); ++i)
            x.at(m, i)[0] = 2.0 - grid.node(i); // running sup attained at t
    TwoParamField y(5, grid.size(), 1, false);
    double prev = empirical_m_norm(x, y, 0, grid);
    for (std::size_t t = 1; t < grid.size(); ++t) {
        const double cur = empirical_m_norm(x, y, t, grid);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("columnar export format") {
    TimeGrid grid = TimeGrid::uniform(2, 1.0);
    PathEnsemble ens(grid, WienerSpec(1, {1.0}), 2, 3);
    std::ostringstream os;
    ens.write_csv(os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "path,interval,component,increment");
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 4); // 2 paths x 2 intervals x 1 component
}

TEST_CASE("error paths") {
    TimeGrid grid = TimeGrid::uniform(4, 1.0);
    CHECK_THROWS_AS(PathEnsemble(grid, WienerSpec(1, {1.0}), 0, 1), std::invalid_argument);
    PathValues empty;
    CHECK_THROWS_AS(second_moment(empty), std::invalid_argument);
}
