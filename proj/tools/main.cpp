#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbsvie/harness.hpp"

namespace {

struct LambdaList {
    std::vector<double> values{1.0};
};

// --lambda accepts a comma-separated eigenvalue list
bool parse_lambda(const std::string& arg, std::vector<double>& out) {
    out.clear();
    std::string tok;
    std::stringstream ss(arg);
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return !out.empty();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sbsvie - singular backward stochastic Volterra integral equation solver"};
    app.require_subcommand(1);

    sbsvie::RunConfig cfg;
    std::string lambda_arg;

    std::string config_path;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key = value configuration file");
        sub->add_option("--alpha", cfg.alpha, "fractional order in (1/2, 1)");
        sub->add_option("--T", cfg.T, "horizon");
        sub->add_option("--n", cfg.n, "state dimension");
        sub->add_option("--d", cfg.d, "Wiener dimension");
        sub->add_option("--lambda", lambda_arg, "covariance eigenvalues, comma separated");
        sub->add_option("--paths", cfg.paths, "Monte Carlo path count M");
        sub->add_option("--grid", cfg.cells, "number of grid cells N");
        sub->add_option("--grading", cfg.grading, "grid grading exponent (1 = uniform)");
        sub->add_option("--seed", cfg.seed, "RNG seed")->envname("SBSVIE_SEED");
        sub->add_option("--degree", cfg.degree, "regression basis degree");
        sub->add_option("--max-iter", cfg.max_iter, "outer Picard iteration cap");
        sub->add_option("--tol", cfg.tol, "outer convergence tolerance");
        sub->add_option("--inner-max", cfg.inner_max, "inner y-loop iteration cap");
        sub->add_option("--inner-tol", cfg.inner_tol, "inner y-loop tolerance");
        sub->add_option("--export-paths", cfg.export_paths,
                        "paths written to solution.csv (0 = all)");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--scenario", cfg.scenario, "scenario name (see `list`)");
        sub->add_flag("--stepped", cfg.stepped, "solve by T0 horizon stepping");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve a scenario and write artifacts");
    add_common(solve);
    CLI::App* study = app.add_subcommand("study", "convergence study over N, M or alpha");
    add_common(study);
    study->add_option("--sweep", cfg.sweep, "sweep spec, e.g. N=16,32,64");
    CLI::App* audit = app.add_subcommand("audit", "assumption checks and bound audits");
    add_common(audit);
    CLI::App* paths = app.add_subcommand("paths", "export the Wiener ensemble as CSV");
    add_common(paths);
    CLI::App* list = app.add_subcommand("list", "list shipped scenarios");
    list->add_option("--config", config_path, "flat key = value configuration file");
    list->add_option("--tag", cfg.tag, "filter by tag");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return sbsvie::exit_usage;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::vector<std::string> provided;
    for (const CLI::Option* opt : sub->get_options())
        if (opt->count() > 0 && opt->get_name().size() > 2)
            provided.push_back(opt->get_name().substr(2));

    try {
        if (!lambda_arg.empty() && !parse_lambda(lambda_arg, cfg.lambda)) {
            std::cerr << "error: bad --lambda list\n";
            return sbsvie::exit_usage;
        }
        cfg = sbsvie::resolve_config(cfg, provided, config_path);
        const std::string name = sub->get_name();
        if (name == "solve") return sbsvie::run_solve(cfg);
        if (name == "study") return sbsvie::run_study(cfg);
        if (name == "audit") return sbsvie::run_audit(cfg);
        if (name == "paths") return sbsvie::run_paths(cfg);
        if (name == "list") return sbsvie::run_list(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return sbsvie::exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return sbsvie::exit_usage;
}
