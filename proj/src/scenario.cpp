#include "sbsvie/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbsvie {

namespace {

void require_scalar(const RunConfig& cfg) {
    if (cfg.n != 1 || cfg.d != 1)
        throw std::invalid_argument("shipped scenarios are scalar (n = d = 1)");
}

FractionalOrder order_of(const RunConfig& cfg) { return FractionalOrder(cfg.alpha); }

WienerSpec wiener_of(const RunConfig& cfg) { return WienerSpec(cfg.d, cfg.lambda); }

// Mittag-Leffler style series sum_k (lam Gamma(a))^k tau^{k a} / Gamma(k a + 1)
double resolvent_series(double lam, double a, double tau) {
    const double base = lam * std::tgamma(a);
    double acc = 0.0;
    double pw = 1.0;
    for (int k = 0; k < 80; ++k) {
        const double term = pw * std::pow(tau, k * a) / std::tgamma(k * a + 1.0);
        acc += term;
        if (k > 2 && std::abs(term) < 1e-16 * std::abs(acc)) break;
        pw *= base;
    }
    return acc;
}

// sign(v) sqrt(rho_log(v^2)): bounded, non-Lipschitz near 0
double log_modulus_link(double v) {
    const ModulusRho rho = ModulusRho::log_modulus();
    const double w = rho(v * v);
    const double r = std::sqrt(w);
    return v < 0.0 ? -r : r;
}

double x_rmse_vs(const PicardResult& res, const PathEnsemble& ens,
                 const std::function<double(const PathEnsemble&, std::size_t, std::size_t)>&
                     target) {
    const std::size_t M = ens.paths();
    const std::size_t I = ens.grid().size();
    double acc = 0.0;
    for (std::size_t m = 0; m < M; ++m)
        for (std::size_t i = 0; i < I; ++i) {
            const double dv = res.x.at(m, i)[0] - target(ens, m, i);
            acc += dv * dv;
        }
    return std::sqrt(acc / static_cast<double>(M * I));
}

std::vector<Scenario> build_registry() {
    std::vector<Scenario> reg;

    {
        Scenario s;
        s.name = "zero_coefficients";
        s.description = "f = g = 0, deterministic terminal value; stationary after one step";
        s.tags = {"trivial", "stochastic"};
        s.make = [](const RunConfig& cfg) {
            require_scalar(cfg);
            ProblemSpec p{order_of(cfg), cfg.T, cfg.n, wiener_of(cfg)};
            p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 1.0; };
            p.driver = [](double, double, const double*, const double*, double* out) {
                out[0] = 0.0;
            };
            p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
            p.modulus = ModulusRho::linear(0.0);
            return p;
        };
        s.x_closed = [](const RunConfig&, double) { return 1.0; };
        s.error = [](const PicardResult& res, const PathEnsemble& ens, const RunConfig&) {
            return x_rmse_vs(res, ens,
                             [](const PathEnsemble&, std::size_t, std::size_t) { return 1.0; });
        };
        reg.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "martingale_xi";
        s.description = "terminal value W(T), f = g = 0; x = W(t), y = -(s-t)^{1-a}";
        s.tags = {"trivial", "stochastic"};
        s.pair_closed = true;
        s.make = [](const RunConfig& cfg) {
            require_scalar(cfg);
            ProblemSpec p{order_of(cfg), cfg.T, cfg.n, wiener_of(cfg)};
            p.terminal = [](const PathEnsemble& ens, std::size_t m, double* out) {
                out[0] = ens.cumulative(m, ens.grid().cells(), 0);
            };
            p.driver = [](double, double, const double*, const double*, double* out) {
                out[0] = 0.0;
            };
            p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
            p.modulus = ModulusRho::linear(0.0);
            return p;
        };
        s.error = [](const PicardResult& res, const PathEnsemble& ens, const RunConfig&) {
            return x_rmse_vs(res, ens,
                             [](const PathEnsemble& e, std::size_t m, std::size_t i) {
                                 return e.cumulative(m, i, 0);
                             });
        };
        reg.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "deterministic_driver";
        s.description = "f = 1, g = 0, xi = 0; x(t) = (T-t)^a / a, y = 0";
        s.tags = {"trivial", "stochastic"};
        s.make = [](const RunConfig& cfg) {
            require_scalar(cfg);
            ProblemSpec p{order_of(cfg), cfg.T, cfg.n, wiener_of(cfg)};
            p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 0.0; };
            p.driver = [](double, double, const double*, const double*, double* out) {
                out[0] = 1.0;
            };
            p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
            p.modulus = ModulusRho::linear(0.0);
            return p;
        };
        s.x_closed = [](const RunConfig& cfg, double t) {
            return std::pow(cfg.T - t, cfg.alpha) / cfg.alpha;
        };
        s.error = [](const PicardResult& res, const PathEnsemble& ens, const RunConfig& cfg) {
            double worst = 0.0;
            for (std::size_t i = 0; i < ens.grid().size(); ++i) {
                const double target =
                    std::pow(cfg.T - ens.grid().node(i), cfg.alpha) / cfg.alpha;
                for (std::size_t m = 0; m < ens.paths(); ++m)
                    worst = std::max(worst, std::abs(res.x.at(m, i)[0] - target));
            }
            return worst;
        };
        reg.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "mittag_leffler_lambda0.1";
        s.description = "deterministic f = 0.1 x; x(t) matches the fractional resolvent series";
        s.tags = {"lipschitz", "deterministic"};
        s.preferred = [](RunConfig& cfg) {
            cfg.lambda = {0.0};
            cfg.paths = 1;
            cfg.cells = 256;
            cfg.tol = 1e-10;
            cfg.max_iter = 25;
        };
        s.make = [](const RunConfig& cfg) {
            require_scalar(cfg);
            ProblemSpec p{order_of(cfg), cfg.T, cfg.n, wiener_of(cfg)};
            p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 1.0; };
            p.driver = [](double, double, const double* x, const double*, double* out) {
                out[0] = 0.1 * x[0];
            };
            p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
            p.modulus = ModulusRho::linear(0.01);
            p.driver_uses_x = true;
            return p;
        };
        s.x_closed = [](const RunConfig& cfg, double t) {
            return resolvent_series(0.1, cfg.alpha, cfg.T - t);
        };
        s.error = [](const PicardResult& res, const PathEnsemble& ens, const RunConfig& cfg) {
            const double target = resolvent_series(0.1, cfg.alpha, ens.grid().horizon());
            return std::abs(res.x.at(0, 0)[0] - target);
        };
        reg.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "stepped_lambda1";
        s.description = "deterministic f = x with b = 1; exercises the T0 horizon stepping";
        s.tags = {"lipschitz", "deterministic"};
        s.preferred = [](RunConfig& cfg) {
            cfg.lambda = {0.0};
            cfg.paths = 1;
            cfg.cells = 256;
            cfg.tol = 1e-10;
            cfg.stepped = true;
        };
        s.make = [](const RunConfig& cfg) {
            require_scalar(cfg);
            ProblemSpec p{order_of(cfg), cfg.T, cfg.n, wiener_of(cfg)};
            p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 1.0; };
            p.driver = [](double, double, const double* x, const double*, double* out) {
                out[0] = x[0];
            };
            p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
            p.modulus = ModulusRho::linear(1.0);
            p.driver_uses_x = true;
            return p;
        };
        s.x_closed = [](const RunConfig& cfg, double t) {
            return resolvent_series(1.0, cfg.alpha, cfg.T - t);
        };
        s.error = [](const PicardResult& res, const PathEnsemble& ens, const RunConfig& cfg) {
            const double target = resolvent_series(1.0, cfg.alpha, ens.grid().horizon());
            return std::abs(res.x.at(0, 0)[0] - target);
        };
        reg.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "lipschitz_random";
        s.description = "Lipschitz driver with x- and y-dependence and a stochastic terminal";
        s.tags = {"lipschitz", "stochastic"};
        s.make = [](const RunConfig& cfg) {
            require_scalar(cfg);
            ProblemSpec p{order_of(cfg), cfg.T, cfg.n, wiener_of(cfg)};
            p.terminal = [](const PathEnsemble& ens, std::size_t m, double* out) {
                out[0] = 0.5 * ens.cumulative(m, ens.grid().cells(), 0);
            };
            p.driver = [](double, double s, const double* x, const double* y, double* out) {
                out[0] = 0.25 * x[0] + 0.04 * y[0] + 0.5 * std::cos(3.0 * s);
            };
            p.diffusion = [](double, double, const double* x, double* out) {
                out[0] = 0.3 * x[0];
            };
            // |df|^2 <= 2(0.25)^2 |dx|^2 + 2(0.04)^2 |dy|^2, |dg|^2 = 0.09 |dx|^2
            p.modulus = ModulusRho::linear(0.125);
            p.y_lipschitz = 2.0 * 0.04 * 0.04;
            p.driver_uses_x = true;
            p.driver_uses_y = true;
            p.diffusion_uses_x = true;
            return p;
        };
        reg.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "log_modulus";
        s.description = "Caratheodory-type driver with the u(1 - ln u) modulus";
        s.tags = {"non_lipschitz", "stochastic"};
        s.make = [](const RunConfig& cfg) {
            require_scalar(cfg);
            ProblemSpec p{order_of(cfg), cfg.T, cfg.n, wiener_of(cfg)};
            p.terminal = [](const PathEnsemble& ens, std::size_t m, double* out) {
                out[0] = 0.15 * ens.cumulative(m, ens.grid().cells(), 0);
            };
            p.driver = [](double, double s, const double* x, const double*, double* out) {
                out[0] = 0.4 * log_modulus_link(x[0]) + 0.2 * std::sin(2.0 * s);
            };
            p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
            p.modulus = ModulusRho::log_modulus();
            p.driver_uses_x = true;
            return p;
        };
        reg.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "h11_violation";
        s.description = "y-Lipschitz constant too large: varpi <= 0, must be rejected";
        s.tags = {"lipschitz"};
        s.intended_failure = true;
        s.make = [](const RunConfig& cfg) {
            require_scalar(cfg);
            ProblemSpec p{order_of(cfg), cfg.T, cfg.n, wiener_of(cfg)};
            p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 1.0; };
            p.driver = [](double, double, const double*, const double* y, double* out) {
                out[0] = 0.3 * y[0];
            };
            p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
            p.modulus = ModulusRho::linear(0.0);
            p.y_lipschitz = 0.09;
            p.driver_uses_y = true;
            return p;
        };
        reg.push_back(std::move(s));
    }

    {
        Scenario s;
        s.name = "h3_violation";
        s.description = "driver grows twice as fast as the declared modulus; H3 witness expected";
        s.tags = {"lipschitz"};
        s.intended_failure = true;
        s.make = [](const RunConfig& cfg) {
            require_scalar(cfg);
            ProblemSpec p{order_of(cfg), cfg.T, cfg.n, wiener_of(cfg)};
            p.terminal = [](const PathEnsemble&, std::size_t, double* out) { out[0] = 0.0; };
            p.driver = [](double, double, const double* x, const double*, double* out) {
                out[0] = x[0]; // |df|^2 = |dx|^2 = 2 b |dx|^2 for b = 0.5
            };
            p.diffusion = [](double, double, const double*, double* out) { out[0] = 0.0; };
            p.modulus = ModulusRho::linear(0.5);
            p.driver_uses_x = true;
            return p;
        };
        reg.push_back(std::move(s));
    }

    return reg;
}

} // namespace

bool Scenario::has_tag(const std::string& t) const {
    return std::find(tags.begin(), tags.end(), t) != tags.end();
}

const std::vector<Scenario>& scenario_registry() {
    static const std::vector<Scenario> reg = build_registry();
    return reg;
}

const Scenario* find_scenario(const std::string& name) {
    for (const Scenario& s : scenario_registry())
        if (s.name == name) return &s;
    return nullptr;
}

std::vector<const Scenario*> scenarios_by_tag(const std::string& tag) {
    std::vector<const Scenario*> out;
    for (const Scenario& s : scenario_registry())
        if (tag.empty() || s.has_tag(tag)) out.push_back(&s);
    return out;
}

} // namespace sbsvie
