#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sbsvie/picard.hpp"
#include "sbsvie/problem.hpp"
#include "sbsvie/run_config.hpp"

namespace sbsvie {

struct Scenario {
    std::string name;
    std::string description;
    std::vector<std::string> tags;
    bool intended_failure = false;

    // defaults the scenario pins (applied before explicit user overrides)
    std::function<void(RunConfig&)> preferred;
    std::function<ProblemSpec(const RunConfig&)> make;

    // closed-form reference x(t) given the run config, when one exists
    std::function<double(const RunConfig&, double)> x_closed;
    bool pair_closed = false; // x = W_t, y = -(s-t)^{1-a}
    // error against the closed form (absent: studies fall back to the residual)
    std::function<double(const PicardResult&, const PathEnsemble&, const RunConfig&)> error;

    bool has_tag(const std::string& t) const;
};

const std::vector<Scenario>& scenario_registry();
const Scenario* find_scenario(const std::string& name);
std::vector<const Scenario*> scenarios_by_tag(const std::string& tag);

} // namespace sbsvie
