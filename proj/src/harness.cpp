#include "sbsvie/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "sbsvie/io_format.hpp"
#include "sbsvie/picard.hpp"
#include "sbsvie/scenario.hpp"

namespace sbsvie {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// artifacts are never partially visible: write to a temp name, then rename
void write_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        os << content;
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

PathEnsemble make_ensemble(const RunConfig& cfg) {
    TimeGrid grid = cfg.grading == 1.0 ? TimeGrid::uniform(cfg.cells, cfg.T)
                                       : TimeGrid::graded(cfg.cells, cfg.T, cfg.grading);
    std::vector<double> lambda = cfg.lambda;
    if (lambda.size() == 1 && cfg.d > 1) lambda.assign(cfg.d, lambda[0]);
    WienerSpec spec(cfg.d, lambda);
    return PathEnsemble(std::move(grid), std::move(spec), cfg.paths, cfg.seed);
}

PicardConfig picard_config(const RunConfig& cfg, bool keep_iterates = false) {
    PicardConfig pc;
    pc.max_iter = cfg.max_iter;
    pc.tol = cfg.tol;
    pc.inner_max = cfg.inner_max;
    pc.inner_tol = cfg.inner_tol;
    pc.basis = RegressionBasis{cfg.degree};
    pc.keep_iterates = keep_iterates;
    return pc;
}

std::string solution_csv(const PicardResult& res, const PathEnsemble& ens,
                         std::size_t path_cap) {
    const std::size_t limit =
        path_cap == 0 ? ens.paths() : std::min(path_cap, ens.paths());
    const std::size_t n = res.x.dim();
    const std::size_t nd = res.y.comps();
    std::ostringstream os;
    os << "path,i,j";
    for (std::size_t c = 0; c < n; ++c) os << ",x" << c;
    for (std::size_t c = 0; c < nd; ++c) os << ",y" << c;
    os << '\n';
    std::vector<double> yv(nd);
    const std::size_t N = ens.grid().cells();
    for (std::size_t m = 0; m < limit; ++m) {
        for (std::size_t i = 0; i <= N; ++i) {
            os << m << ',' << i << ',' << i;
            for (std::size_t c = 0; c < n; ++c) os << ',' << io::num(res.x.at(m, i)[c]);
            for (std::size_t c = 0; c < nd; ++c) os << ',';
            os << '\n';
            for (std::size_t j = i + 1; j <= N; ++j) {
                res.y.value(m, i, j, yv.data());
                os << m << ',' << i << ',' << j;
                for (std::size_t c = 0; c < n; ++c) os << ',' << io::num(res.x.at(m, i)[c]);
                for (std::size_t c = 0; c < nd; ++c) os << ',' << io::num(yv[c]);
                os << '\n';
            }
        }
    }
    return os.str();
}

std::string trace_csv(const PicardResult& res) {
    std::ostringstream os;
    os << "window,j,m_norm_diff,sup_x_sq,y_mass,inner_iterations,residual\n";
    for (const TraceRow& r : res.trace)
        os << r.window << ',' << r.iteration << ',' << io::num(r.m_norm_diff) << ','
           << io::num(r.sup_x_sq) << ',' << io::num(r.y_mass) << ',' << r.inner_iterations
           << ',' << io::num(r.residual) << '\n';
    return os.str();
}

json trace_json(const PicardResult& res) {
    json rows = json::array();
    for (const TraceRow& r : res.trace)
        rows.push_back({{"window", r.window},
                        {"j", r.iteration},
                        {"m_norm_diff", r.m_norm_diff},
                        {"diff_se", r.diff_se},
                        {"sup_x_sq", r.sup_x_sq},
                        {"y_mass", r.y_mass},
                        {"inner_iterations", r.inner_iterations},
                        {"residual", r.residual}});
    return {{"converged", res.converged}, {"windows", res.windows}, {"rows", rows}};
}

json bound_json(const BoundAudit& a) {
    return {{"lhs", a.lhs}, {"rhs", a.rhs}, {"slack", a.slack}, {"holds", a.holds}};
}

json config_json(const RunConfig& cfg) {
    return {{"scenario", cfg.scenario}, {"alpha", cfg.alpha},   {"T", cfg.T},
            {"n", cfg.n},               {"d", cfg.d},           {"lambda", cfg.lambda},
            {"paths", cfg.paths},       {"grid", cfg.cells},    {"seed", cfg.seed},
            {"degree", cfg.degree},     {"max_iter", cfg.max_iter}, {"tol", cfg.tol},
            {"inner_max", cfg.inner_max}, {"inner_tol", cfg.inner_tol},
            {"grading", cfg.grading},   {"stepped", cfg.stepped},   {"workers", 1}};
}

json assumption_json(const AssumptionReport& rep) {
    json wit = json::array();
    for (const H3Witness& w : rep.witnesses)
        wit.push_back({{"coefficient", w.driver ? "f" : "g"},
                       {"t", w.t},
                       {"s", w.s},
                       {"x", w.x},
                       {"xbar", w.xbar},
                       {"y", w.y},
                       {"ybar", w.ybar},
                       {"lhs", w.lhs},
                       {"rhs", w.rhs}});
    return {{"h1", rep.h1_ok},         {"h11", rep.h11_ok}, {"h3", rep.h3_ok},
            {"varpi", rep.varpi},      {"f0_mass", rep.f0_mass},
            {"g0_mass", rep.g0_mass},  {"witnesses", wit}};
}

json constants_json(const ConstantsBlock& b) {
    return {{"C1", b.C1},     {"C2", b.C2},   {"C3", b.C3},       {"C4", b.C4},
            {"varpi", b.varpi}, {"factor32", b.factor32}, {"u_star", b.u_star},
            {"step", std::isfinite(b.step) ? json(b.step) : json()},
            {"T0", b.T0},     {"steps", b.steps}};
}

} // namespace

namespace {

std::vector<double> parse_lambda_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) out.push_back(std::stod(tok));
    if (out.empty()) throw std::invalid_argument("empty lambda list");
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("bad boolean value: " + v);
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "alpha") cfg.alpha = std::stod(value);
    else if (key == "T") cfg.T = std::stod(value);
    else if (key == "n") cfg.n = std::stoul(value);
    else if (key == "d") cfg.d = std::stoul(value);
    else if (key == "lambda") cfg.lambda = parse_lambda_list(value);
    else if (key == "paths") cfg.paths = std::stoul(value);
    else if (key == "grid") cfg.cells = std::stoul(value);
    else if (key == "grading") cfg.grading = std::stod(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "degree") cfg.degree = std::stoi(value);
    else if (key == "max-iter") cfg.max_iter = std::stoi(value);
    else if (key == "tol") cfg.tol = std::stod(value);
    else if (key == "inner-max") cfg.inner_max = std::stoi(value);
    else if (key == "inner-tol") cfg.inner_tol = std::stod(value);
    else if (key == "export-paths") cfg.export_paths = std::stoul(value);
    else if (key == "out") cfg.out_dir = value;
    else if (key == "scenario") cfg.scenario = value;
    else if (key == "sweep") cfg.sweep = value;
    else if (key == "tag") cfg.tag = value;
    else if (key == "stepped") cfg.stepped = parse_bool(value);
    else throw std::invalid_argument("unknown config key: " + key);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// flat "key = value" lines, # comments
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("unreadable config file: " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("bad config line " + std::to_string(lineno) + ": " +
                                        line);
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

} // namespace

RunConfig resolve_config(const RunConfig& flags, const std::vector<std::string>& provided,
                         const std::string& config_path) {
    auto user_set = [&](const char* key) {
        return std::find(provided.begin(), provided.end(), key) != provided.end();
    };
    std::vector<std::pair<std::string, std::string>> file_kv;
    if (!config_path.empty()) file_kv = read_config_file(config_path);

    // the scenario may come from a flag or from the file
    std::string scenario = flags.scenario;
    if (!user_set("scenario"))
        for (const auto& [k, v] : file_kv)
            if (k == "scenario") scenario = v;

    RunConfig out;
    out.scenario = scenario;
    if (const Scenario* sc = find_scenario(scenario); sc && sc->preferred) sc->preferred(out);
    out.scenario = scenario;

    for (const auto& [k, v] : file_kv) apply_key(out, k, v);

    if (user_set("alpha")) out.alpha = flags.alpha;
    if (user_set("T")) out.T = flags.T;
    if (user_set("n")) out.n = flags.n;
    if (user_set("d")) out.d = flags.d;
    if (user_set("lambda")) out.lambda = flags.lambda;
    if (user_set("paths")) out.paths = flags.paths;
    if (user_set("grid")) out.cells = flags.cells;
    if (user_set("grading")) out.grading = flags.grading;
    if (user_set("seed")) out.seed = flags.seed;
    if (user_set("degree")) out.degree = flags.degree;
    if (user_set("max-iter")) out.max_iter = flags.max_iter;
    if (user_set("tol")) out.tol = flags.tol;
    if (user_set("inner-max")) out.inner_max = flags.inner_max;
    if (user_set("inner-tol")) out.inner_tol = flags.inner_tol;
    if (user_set("export-paths")) out.export_paths = flags.export_paths;
    if (user_set("out")) out.out_dir = flags.out_dir;
    if (user_set("sweep")) out.sweep = flags.sweep;
    if (user_set("tag")) out.tag = flags.tag;
    if (user_set("stepped")) out.stepped = flags.stepped;
    return out;
}

int run_solve(const RunConfig& cfg) {
    const Scenario* sc = find_scenario(cfg.scenario);
    if (!sc) {
        std::cerr << "error: unknown scenario: '" << cfg.scenario << "'\n";
        return exit_usage;
    }
    const fs::path out(cfg.out_dir);
    PathEnsemble ens = make_ensemble(cfg);
    ProblemSpec problem = sc->make(cfg);
    PicardConfig pc = picard_config(cfg);

    try {
        PicardResult res =
            cfg.stepped ? stepped_solve(problem, ens, pc) : picard_iterate(problem, ens, pc);

        write_atomic(out / "solution.csv", solution_csv(res, ens, cfg.export_paths));
        write_atomic(out / "trace.csv", trace_csv(res));
        write_atomic(out / "trace.json", trace_json(res).dump(2) + "\n");

        // bound audit of the converged pair, plus constants and assumptions
        const LinearData data = linearize_at(problem, ens, res.x, res.y);
        const RegressionEngine engine(ens, pc.basis);
        const LinearSolution lin = solve_linear(data, ens, problem.alpha, engine);
        const BoundAudit audit = apriori_bound_audit(lin, data, 0, ens, problem.alpha);
        json j;
        j["apriori"] = bound_json(audit);
        j["constants"] = constants_json(compute_constants(problem, 0.0, ens));
        j["assumptions"] =
            assumption_json(check_assumptions(problem, ens, pc.h3_samples, pc.h3_box));
        j["config"] = config_json(cfg);
        write_atomic(out / "audit.json", j.dump(2) + "\n");
        write_atomic(out / "run_meta.json", config_json(cfg).dump(2) + "\n");

        if (!res.converged) {
            std::cerr << "did not converge within " << cfg.max_iter << " iterations\n";
            return exit_diverged;
        }
        std::cout << "converged in " << res.trace.size() << " iterations ("
                  << res.windows << " window" << (res.windows == 1 ? "" : "s") << ")\n";
        return exit_ok;
    } catch (const AssumptionError& e) {
        std::cerr << "assumption failure: " << e.what() << '\n';
        try {
            json j;
            j["assumptions"] =
                assumption_json(check_assumptions(problem, ens, pc.h3_samples, pc.h3_box));
            j["config"] = config_json(cfg);
            write_atomic(out / "audit.json", j.dump(2) + "\n");
        } catch (...) {
        }
        return exit_assumption;
    } catch (const DivergedError& e) {
        std::cerr << "diverged: " << e.what() << '\n';
        return exit_diverged;
    }
}

int run_study(const RunConfig& cfg) {
    const auto eq = cfg.sweep.find('=');
    if (cfg.sweep.empty() || eq == std::string::npos) {
        std::cerr << "error: --sweep must look like N=16,32,64 (or M=..., alpha=...)\n";
        return exit_usage;
    }
    const std::string param = cfg.sweep.substr(0, eq);
    if (param != "N" && param != "M" && param != "alpha") {
        std::cerr << "error: sweep parameter must be one of N, M, alpha\n";
        return exit_usage;
    }
    std::vector<double> values;
    std::stringstream ss(cfg.sweep.substr(eq + 1));
    for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) values.push_back(std::stod(tok));
    if (values.empty()) {
        std::cerr << "error: empty sweep\n";
        return exit_usage;
    }
    const Scenario* sc = find_scenario(cfg.scenario);
    if (!sc) {
        std::cerr << "error: unknown scenario: '" << cfg.scenario << "'\n";
        return exit_usage;
    }

    std::ostringstream os;
    os << "param,value,error,residual,runtime_sec,iterations\n";
    for (double v : values) {
        RunConfig c = cfg;
        if (param == "N") c.cells = static_cast<std::size_t>(v);
        if (param == "M") c.paths = static_cast<std::size_t>(v);
        if (param == "alpha") c.alpha = v;
        PathEnsemble ens = make_ensemble(c);
        ProblemSpec problem = sc->make(c);
        PicardConfig pc = picard_config(c);
        const auto start = std::chrono::steady_clock::now();
        PicardResult res =
            c.stepped ? stepped_solve(problem, ens, pc) : picard_iterate(problem, ens, pc);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const double residual = verify_solution(problem, res.x, res.y, ens);
        const double err = sc->error ? sc->error(res, ens, c) : residual;
        os << param << ',' << io::num(v) << ',' << io::num(err) << ',' << io::num(residual)
           << ',' << io::num(secs) << ',' << res.trace.size() << '\n';
    }
    write_atomic(fs::path(cfg.out_dir) / "study.csv", os.str());
    std::cout << "study written to " << (fs::path(cfg.out_dir) / "study.csv").string() << '\n';
    return exit_ok;
}

int run_audit(const RunConfig& cfg) {
    const Scenario* sc = find_scenario(cfg.scenario);
    if (!sc) {
        std::cerr << "error: unknown scenario: '" << cfg.scenario << "'\n";
        return exit_usage;
    }
    const fs::path out(cfg.out_dir);
    PathEnsemble ens = make_ensemble(cfg);
    ProblemSpec problem = sc->make(cfg);
    PicardConfig pc = picard_config(cfg, /*keep_iterates=*/true);
    try {
        const ConstantsBlock block = compute_constants(problem, 0.0, ens);
        PicardResult res = picard_iterate(problem, ens, pc);
        const BoundAuditReport rep = audit_iterate_bounds(res, block, 0, problem, ens);

        const LinearData data = linearize_at(problem, ens, res.x, res.y);
        const RegressionEngine engine(ens, pc.basis);
        const LinearSolution lin = solve_linear(data, ens, problem.alpha, engine);
        const BoundAudit apriori = apriori_bound_audit(lin, data, 0, ens, problem.alpha);

        const PhiTable phi = phi_sequences(block, problem.modulus, ens.grid(), 8);

        json rows = json::array();
        for (const IterateBoundRow& r : rep.iterate_rows)
            rows.push_back({{"j", r.j},
                            {"sup", {{"lhs", r.sup_lhs}, {"rhs", r.sup_rhs}, {"holds", r.sup_ok}}},
                            {"y", {{"lhs", r.y_lhs}, {"rhs", r.y_rhs}, {"holds", r.y_ok}}}});
        json pairs = json::array();
        for (const PairBoundRow& r : rep.pair_rows)
            pairs.push_back(
                {{"j", r.j}, {"k", r.k}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"holds", r.ok}});
        json l3 = json::array();
        for (const PairBoundRow& r : rep.contraction_rows)
            l3.push_back(
                {{"j", r.j}, {"k", r.k}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"holds", r.ok}});

        json j;
        j["constants"] = constants_json(block);
        j["assumptions"] =
            assumption_json(check_assumptions(problem, ens, pc.h3_samples, pc.h3_box));
        j["apriori"] = bound_json(apriori);
        j["iterate_bounds"] = rows;
        j["pair_bounds"] = pairs;
        j["contraction_bounds"] = l3;
        j["phi_monotone_from"] = phi.monotone_from;
        j["phi_monotone_on_window"] = phi.monotone_on_window;
        j["violations"] = rep.violations + (apriori.holds ? 0 : 1);
        j["config"] = config_json(cfg);
        write_atomic(out / "audits.json", j.dump(2) + "\n");
        std::cout << "audit violations: " << j["violations"] << '\n';
        return j["violations"].get<int>() == 0 ? exit_ok : 1;
    } catch (const AssumptionError& e) {
        std::cerr << "assumption failure: " << e.what() << '\n';
        json j;
        j["assumptions"] =
            assumption_json(check_assumptions(problem, ens, pc.h3_samples, pc.h3_box));
        j["config"] = config_json(cfg);
        write_atomic(out / "audits.json", j.dump(2) + "\n");
        return exit_assumption;
    } catch (const DivergedError& e) {
        std::cerr << "diverged: " << e.what() << '\n';
        return exit_diverged;
    }
}

int run_paths(const RunConfig& cfg) {
    PathEnsemble ens = make_ensemble(cfg);
    std::ostringstream os;
    ens.write_csv(os);
    write_atomic(fs::path(cfg.out_dir) / "paths.csv", os.str());
    std::cout << "ensemble written to " << (fs::path(cfg.out_dir) / "paths.csv").string()
              << '\n';
    return exit_ok;
}

int run_list(const RunConfig& cfg) {
    for (const Scenario* sc : scenarios_by_tag(cfg.tag)) {
        std::cout << sc->name;
        std::cout << "  [";
        for (std::size_t i = 0; i < sc->tags.size(); ++i)
            std::cout << (i ? "," : "") << sc->tags[i];
        std::cout << "]";
        if (sc->intended_failure) std::cout << "  (intended failure)";
        std::cout << "  " << sc->description << '\n';
    }
    return exit_ok;
}

} // namespace sbsvie
