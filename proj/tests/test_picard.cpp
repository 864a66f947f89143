#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sbsvie/picard.hpp"
#include "sbsvie/scenario.hpp"

using namespace sbsvie;

namespace {

RunConfig det_config(std::size_t cells) {
    RunConfig cfg;
    cfg.lambda = {0.0};
    cfg.paths = 1;
    cfg.cells = cells;
    cfg.tol = 1e-10;
    return cfg;
}

PathEnsemble ensemble_for(const RunConfig& cfg) {
    return PathEnsemble(TimeGrid::uniform(cfg.cells, cfg.T), WienerSpec(cfg.d, cfg.lambda),
                        cfg.paths, cfg.seed);
}

// xi = 0 Lipschitz problem with deterministic zero-argument coefficients; the
// iterate-bound audits are mathematically guaranteed for this family
ProblemSpec random_lipschitz_problem(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double a0 = 0.2 + 0.8 * u(gen);
    const double w0 = 1.0 + 5.0 * u(gen);
    const double b0 = 0.2 + 0.8 * u(gen);
    const double mu = 0.3 * u(gen);
    const double nu = 0.03 * u(gen);
    const double ga = 0.3 * u(gen);

    ProblemSpec p{FractionalOrder(0.6 + 0.3 * u(gen)), 1.0, 1, WienerSpec(1, {1.0})};
    p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 0.0; };
    p.driver = [a0, w0, mu, nu](double, double s, const double* x, const double* y,
                                double* out) {
        out[0] = a0 * std::cos(w0 * s) + mu * x[0] + nu * y[0];
    };
    p.diffusion = [b0, ga](double, double s, const double* x, double* out) {
        out[0] = b0 * std::sin(s) + ga * x[0];
    };
    p.modulus = ModulusRho::linear(std::max(2.0 * mu * mu, ga * ga) + 1e-6);
    p.y_lipschitz = 2.0 * nu * nu;
    p.driver_uses_x = true;
    p.driver_uses_y = nu > 0.0;
    p.diffusion_uses_x = true;
    return p;
}

} // namespace

TEST_CASE("modulus: shape properties on a lattice") {
    for (const ModulusRho& rho :
         {ModulusRho::linear(0.7), ModulusRho::affine(0.2, 1.3), ModulusRho::log_modulus()}) {
        CHECK(rho(0.0) == 0.0);
        CHECK(rho(-1.0) == 0.0);
        double prev = 0.0;
        double prev_diff = 1e300;
        for (int k = 1; k <= 400; ++k) {
            const double U = 4.0 * k / 400.0;
            const double v = rho(U);
            CHECK(v >= prev - 1e-15);               // nondecreasing
            CHECK(v <= rho.a() + rho.b() * U + 1e-12); // affine majorant
            const double diff = v - prev;           // concave: slopes shrink
            CHECK(diff <= prev_diff + 1e-12);
            prev_diff = diff;
            prev = v;
        }
    }
    CHECK(ModulusRho::log_modulus()(1.0) == doctest::Approx(1.0));
    CHECK(ModulusRho::log_modulus()(4.0) == 1.0);
    CHECK(ModulusRho::linear(0.5)(2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(ModulusRho::linear(-1.0), std::invalid_argument);
}

TEST_CASE("check_assumptions: Lipschitz pass, H11 failure, H3 witness") {
    RunConfig cfg;
    cfg.paths = 200;
    cfg.cells = 8;
    PathEnsemble ens = ensemble_for(cfg);

    const Scenario* lip = find_scenario("lipschitz_random");
    REQUIRE(lip);
    AssumptionReport ok = check_assumptions(lip->make(cfg), ens, 500);
    CHECK(ok.ok());
    CHECK(ok.varpi > 0.0);

    const Scenario* h11 = find_scenario("h11_violation");
    REQUIRE(h11);
    AssumptionReport bad = check_assumptions(h11->make(cfg), ens, 100);
    CHECK_FALSE(bad.h11_ok);
    CHECK(bad.varpi <= 0.0);

    const Scenario* h3 = find_scenario("h3_violation");
    REQUIRE(h3);
    AssumptionReport wit = check_assumptions(h3->make(cfg), ens, 500);
    CHECK_FALSE(wit.h3_ok);
    REQUIRE_FALSE(wit.witnesses.empty());
    CHECK(wit.witnesses.front().lhs > wit.witnesses.front().rhs);

    const Scenario* logm = find_scenario("log_modulus");
    REQUIRE(logm);
    CHECK(check_assumptions(logm->make(cfg), ens, 2000).ok());
}

TEST_CASE("compute_constants: pinned values at T=1, t=0, alpha=0.75, b=1") {
    RunConfig cfg = det_config(64);
    PathEnsemble ens = ensemble_for(cfg);
    ProblemSpec p{FractionalOrder(0.75), 1.0, 1, WienerSpec(1, {0.0})};
    p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 1.0; };
    p.driver = [](double, double, const double* x, const double*, double* out) {
        out[0] = x[0];
    };
    p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
    p.modulus = ModulusRho::linear(1.0);
    p.driver_uses_x = true;

    ConstantsBlock block = compute_constants(p, 0.0, ens);
    // independent formula evaluations
    const double kfac = std::pow(2.0, 1.5) / 0.5;
    CHECK(std::abs(block.C2 - 292.0) <= 1e-9 * 292.0);
    CHECK(std::abs(block.C3 - (16.0 * kfac + 2.0)) <= 1e-9 * block.C3);
    CHECK(block.C3 == doctest::Approx(92.50966799187808).epsilon(1e-9));
    CHECK(block.varpi == 1.0);
    CHECK(block.C1 == doctest::Approx(24.0).epsilon(1e-12)); // (8 + 16T) E|xi|^2
}

TEST_CASE("compute_constants: zero data gives C1 = C4 = 0") {
    RunConfig cfg = det_config(32);
    PathEnsemble ens = ensemble_for(cfg);
    ProblemSpec p{FractionalOrder(0.75), 1.0, 1, WienerSpec(1, {0.0})};
    p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 0.0; };
    p.driver = [](double, double, const double*, const double*, double* out) { out[0] = 0.0; };
    p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
    p.modulus = ModulusRho::linear(1.0); // a = 0
    ConstantsBlock block = compute_constants(p, 0.0, ens);
    CHECK(block.C1 == 0.0);
    CHECK(block.C4 == 0.0);
    CHECK(block.u_star == 0.0);
    // zero-data convention
    CHECK(block.T0 == 0.0);
    CHECK(block.steps == 1);
}

TEST_CASE("compute_constants: H11 violation raises") {
    RunConfig cfg;
    cfg.paths = 10;
    cfg.cells = 8;
    PathEnsemble ens = ensemble_for(cfg);
    const Scenario* h11 = find_scenario("h11_violation");
    CHECK_THROWS_AS(compute_constants(h11->make(cfg), 0.0, ens), AssumptionError);
}

TEST_CASE("compute_T0 examples") {
    ConstantsBlock block;
    block.T = 1.0;
    block.C3 = 92.50966799187808;
    block.u_star = 24.0 * std::exp(292.0);

    StepRule r = compute_T0(block, 0.0, 1.0);
    CHECK(r.step == doctest::Approx(1.0 / block.C3).epsilon(1e-12));
    CHECK(r.T0 == doctest::Approx(1.0 - 1.0 / block.C3).epsilon(1e-9));
    CHECK(r.steps == 93);

    StepRule r2 = compute_T0(block, 0.0, 0.0); // b -> 0: no constraint
    CHECK(std::isinf(r2.step));
    CHECK(r2.T0 == 0.0);
    CHECK(r2.steps == 1);

    ConstantsBlock zero = block;
    zero.u_star = 0.0; // C1 = 0 with a > 0: zero-data convention
    StepRule r3 = compute_T0(zero, 0.5, 0.0);
    CHECK(r3.T0 == 0.0);
    CHECK(r3.steps == 1);
}

TEST_CASE("picard: zero coefficients are stationary after one step") {
    RunConfig cfg;
    cfg.paths = 4000;
    cfg.cells = 12;
    cfg.tol = 1e-12; // force a second iteration so the trace shows the zero diff
    cfg.max_iter = 3;
    PathEnsemble ens = ensemble_for(cfg);
    const Scenario* sc = find_scenario("martingale_xi");
    PicardConfig pc;
    pc.tol = cfg.tol;
    pc.max_iter = cfg.max_iter;
    pc.trace_residual = false;
    PicardResult res = picard_iterate(sc->make(cfg), ens, pc);
    REQUIRE(res.trace.size() >= 2);
    CHECK(res.trace[1].m_norm_diff <= 5.0 * res.trace[1].diff_se + 1e-15);
    CHECK(res.trace[1].m_norm_diff == 0.0); // bitwise stationary for frozen data
}

TEST_CASE("picard: Mittag-Leffler oracle at N = 256") {
    RunConfig cfg = det_config(256);
    PathEnsemble ens = ensemble_for(cfg);
    const Scenario* sc = find_scenario("mittag_leffler_lambda0.1");
    PicardConfig pc;
    pc.tol = 1e-10;
    pc.max_iter = 25;
    PicardResult res = picard_iterate(sc->make(cfg), ens, pc);
    CHECK(res.converged);
    CHECK(res.trace.size() <= 25);
    const double target = oracles::resolvent_series(0.1, 0.75, 1.0);
    CHECK(std::abs(res.x.at(0, 0)[0] - target) < 1e-3);
    // spec reference value of the series
    CHECK(std::abs(target - 1.14535) < 1e-3);
    // geometric decay of the iterate differences (deterministic: no noise floor)
    for (std::size_t j = 2; j < res.trace.size(); ++j)
        CHECK(res.trace[j].m_norm_diff < res.trace[j - 1].m_norm_diff);
    // the recorded residual shrinks to the discretization level
    CHECK(res.trace.back().residual < 1e-3);
    for (const TraceRow& r : res.trace) CHECK(std::isfinite(r.m_norm_diff));
}

TEST_CASE("picard: H11 violation raises the assumption error") {
    RunConfig cfg;
    cfg.paths = 100;
    cfg.cells = 8;
    PathEnsemble ens = ensemble_for(cfg);
    const Scenario* sc = find_scenario("h11_violation");
    CHECK_THROWS_AS(picard_iterate(sc->make(cfg), ens, PicardConfig{}), AssumptionError);
}

TEST_CASE("picard: 32-coefficient gate raises the diverged error") {
    RunConfig cfg;
    cfg.paths = 100;
    cfg.cells = 8;
    PathEnsemble ens = ensemble_for(cfg);
    // varpi > 0 but 32 c (2T)^{2a}/(2a-1) > 1: rejected before the inner loop
    ProblemSpec p{FractionalOrder(0.75), 1.0, 1, WienerSpec(1, {1.0})};
    p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 1.0; };
    p.driver = [](double, double, const double*, const double* y, double* out) {
        out[0] = 0.05 * y[0];
    };
    p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
    p.modulus = ModulusRho::linear(0.0);
    p.y_lipschitz = 0.01; // 8kc = 0.45 ok, 32kc = 1.81 > 1
    p.driver_uses_y = true;
    try {
        picard_iterate(p, ens, PicardConfig{});
        FAIL("expected DivergedError");
    } catch (const DivergedError& e) {
        CHECK(e.gate_factor < 0.0);
    }
}

TEST_CASE("verify_solution: exact pair, zero residual; perturbation is detected") {
    RunConfig cfg = det_config(32);
    PathEnsemble ens = ensemble_for(cfg);
    ProblemSpec p{FractionalOrder(0.75), 1.0, 1, WienerSpec(1, {0.0})};
    p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 3.0; };
    p.driver = [](double, double, const double*, const double*, double* out) { out[0] = 0.0; };
    p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
    AdaptedProcess x(1, 33, 1);
    for (std::size_t i = 0; i <= 32; ++i) x.at(0, i)[0] = 3.0;
    TwoParamField y(1, 33, 1, false);
    CHECK(verify_solution(p, x, y, ens) == 0.0);
    x.at(0, 7)[0] += 1.0;
    CHECK(verify_solution(p, x, y, ens) >= 1.0 - 1e-12);
}

TEST_CASE("phi sequences") {
    TimeGrid grid = TimeGrid::uniform(256, 1.0);
    ConstantsBlock block;
    block.T = 1.0;
    block.C3 = 92.50966799187808;
    block.T0 = 0.0;

    // rho = 0: phi_j = 0 for j >= 2 (and phi_1, since C4 = C3 rho(...) = 0)
    block.C4 = 0.0;
    PhiTable z = phi_sequences(block, ModulusRho::linear(0.0), grid, 4);
    for (int j = 1; j < 4; ++j)
        for (double v : z.phi[j]) CHECK(v == 0.0);

    // linear modulus: phi_j(T) = 0 for all j, and the stepping window makes
    // the sequence monotone with phi_j(T0) -> 0
    const double b = 1.0;
    block.C4 = 10.0;
    StepRule rule;
    rule.step = 2.0 / (block.C3 * 2.0 * b);
    block.T0 = 1.0 - rule.step;
    PhiTable t = phi_sequences(block, ModulusRho::linear(b), grid, 8);
    const std::size_t t0i = grid.floor_index(block.T0) + 1;
    for (int j = 0; j < 8; ++j) CHECK(t.phi[j][256] == 0.0);
    for (int j = 0; j + 1 < 8; ++j)
        CHECK(t.phi[j + 1][t0i] <= t.phi[j][t0i] * (1.0 + 1e-12));
    CHECK(t.phi[7][t0i] < 1e-3 * t.phi[0][t0i]);
    CHECK(t.monotone_on_window);
    CHECK_THROWS_AS(phi_sequences(block, ModulusRho::linear(b), grid, 0),
                    std::invalid_argument);
}

TEST_CASE("audit_iterate_bounds: randomized Lipschitz problems have no violations") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        ProblemSpec p = random_lipschitz_problem(seed);
        RunConfig cfg;
        cfg.paths = 1500;
        cfg.cells = 12;
        cfg.seed = 900 + seed;
        PathEnsemble ens = ensemble_for(cfg);
        PicardConfig pc;
        pc.keep_iterates = true;
        pc.max_iter = 6;
        pc.trace_residual = false;
        ConstantsBlock block = compute_constants(p, 0.0, ens);
        PicardResult res = picard_iterate(p, ens, pc);
        BoundAuditReport rep = audit_iterate_bounds(res, block, 0, p, ens);
        CHECK(rep.violations == 0);
        CHECK_FALSE(rep.iterate_rows.empty());
        CHECK_FALSE(rep.pair_rows.empty());
        CHECK_FALSE(rep.contraction_rows.empty());
        CHECK_FALSE(rep.phi_domination.empty());
    }
}

TEST_CASE("audit_iterate_bounds: zero problem and the resolvent scenario") {
    // zero data: every bound holds with lhs = 0
    RunConfig zcfg = det_config(16);
    PathEnsemble zens = ensemble_for(zcfg);
    ProblemSpec zp{FractionalOrder(0.75), 1.0, 1, WienerSpec(1, {0.0})};
    zp.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 0.0; };
    zp.driver = [](double, double, const double*, const double*, double* out) {
        out[0] = 0.0;
    };
    zp.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
    zp.modulus = ModulusRho::linear(1.0);
    PicardConfig zpc;
    zpc.keep_iterates = true;
    zpc.max_iter = 4;
    zpc.tol = 1e-14;
    zpc.trace_residual = false;
    ConstantsBlock zblock = compute_constants(zp, 0.0, zens);
    PicardResult zres = picard_iterate(zp, zens, zpc);
    BoundAuditReport zrep = audit_iterate_bounds(zres, zblock, 0, zp, zens);
    CHECK(zrep.violations == 0);
    for (const IterateBoundRow& r : zrep.iterate_rows) {
        CHECK(r.sup_lhs == 0.0);
        CHECK(r.y_lhs == 0.0);
    }

    // the deterministic resolvent scenario: bounds hold with large headroom
    RunConfig cfg = det_config(64);
    PathEnsemble ens = ensemble_for(cfg);
    const Scenario* sc = find_scenario("mittag_leffler_lambda0.1");
    ProblemSpec p = sc->make(cfg);
    PicardConfig pc;
    pc.keep_iterates = true;
    pc.tol = 1e-10;
    pc.trace_residual = false;
    ConstantsBlock block = compute_constants(p, 0.0, ens);
    CHECK(block.C1 == doctest::Approx(24.0).epsilon(1e-12));
    PicardResult res = picard_iterate(p, ens, pc);
    BoundAuditReport rep = audit_iterate_bounds(res, block, 0, p, ens);
    CHECK(rep.violations == 0);
    for (const IterateBoundRow& r : rep.iterate_rows) CHECK(r.sup_rhs > 100.0 * r.sup_lhs);
}

TEST_CASE("uniqueness: inner initialization does not change the limit") {
    RunConfig cfg;
    cfg.paths = 2000;
    cfg.cells = 12;
    PathEnsemble ens = ensemble_for(cfg);
    const Scenario* sc = find_scenario("lipschitz_random");
    ProblemSpec p = sc->make(cfg);
    PicardConfig a;
    a.inner_init = InnerInit::Previous;
    a.trace_residual = false;
    PicardConfig b;
    b.inner_init = InnerInit::Zero;
    b.trace_residual = false;
    PicardResult ra = picard_iterate(p, ens, a);
    PicardResult rb = picard_iterate(p, ens, b);
    const std::size_t M = ens.paths();
    std::vector<double> sup(M), mass(M);
    m_norm_diff_per_path(ra.x, rb.x, ra.y, rb.y, 0, ens.grid(), sup.data(), mass.data());
    double dist = 0;
    for (std::size_t m = 0; m < M; ++m) dist += sup[m] + mass[m];
    CHECK(dist / M < 1e-4);
}

TEST_CASE("geometric decay on a Lipschitz scenario") {
    RunConfig cfg;
    cfg.paths = 2000;
    cfg.cells = 12;
    cfg.tol = 1e-9;
    PathEnsemble ens = ensemble_for(cfg);
    const Scenario* sc = find_scenario("lipschitz_random");
    PicardConfig pc;
    pc.tol = cfg.tol;
    pc.max_iter = 8;
    pc.trace_residual = false;
    PicardResult res = picard_iterate(sc->make(cfg), ens, pc);
    for (std::size_t j = 2; j < res.trace.size(); ++j) {
        const TraceRow& prev = res.trace[j - 1];
        const TraceRow& cur = res.trace[j];
        if (cur.m_norm_diff < 5.0 * cur.diff_se) break; // noise floor reached
        CHECK(cur.m_norm_diff < prev.m_norm_diff);
    }
}

TEST_CASE("stepped solve covers the horizon window by window") {
    RunConfig cfg = det_config(256);
    PathEnsemble ens = ensemble_for(cfg);
    const Scenario* sc = find_scenario("stepped_lambda1");
    ProblemSpec p = sc->make(cfg);
    PicardConfig pc;
    pc.tol = 1e-10;
    PicardResult res = stepped_solve(p, ens, pc);
    CHECK(res.converged);
    CHECK(res.windows == 93);
    const double target = oracles::resolvent_series(1.0, 0.75, 1.0);
    CHECK(std::abs(res.x.at(0, 0)[0] - target) < 5e-3);
    CHECK(verify_solution(p, res.x, res.y, ens) < 5e-3);
}

TEST_CASE("scenario registry contains the shipped set") {
    for (const char* name :
         {"zero_coefficients", "martingale_xi", "deterministic_driver",
          "mittag_leffler_lambda0.1", "lipschitz_random", "log_modulus", "h11_violation"})
        CHECK(find_scenario(name) != nullptr);
    CHECK(find_scenario("no_such_thing") == nullptr);
    auto nl = scenarios_by_tag("non_lipschitz");
    REQUIRE(nl.size() == 1);
    CHECK(nl[0]->name == "log_modulus");
    CHECK(scenarios_by_tag("unknown_tag").empty());
    // every scenario passes the assumption checks or is an intended failure
    RunConfig cfg;
    cfg.paths = 100;
    cfg.cells = 8;
    for (const Scenario& sc : scenario_registry()) {
        PathEnsemble ens = ensemble_for(cfg);
        AssumptionReport rep = check_assumptions(sc.make(cfg), ens, 300);
        if (!sc.intended_failure) CHECK(rep.ok());
        if (sc.intended_failure) CHECK_FALSE(rep.ok());
    }
}
