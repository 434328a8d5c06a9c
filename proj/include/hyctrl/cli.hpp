#pragma once

#include <optional>
#include <string>
#include <vector>

namespace hyctrl {

// Exit conventions: 0 = Controllable / success, 1 = NotControllable /
// verification failure, 2 = Inconclusive, 3 and up = usage or input error.
struct RunConfig {
    std::string subcommand;
    std::string input;
    std::string output;
    std::string initial;       // simulate: state file
    std::string control;       // simulate: control file
    std::string final_state;   // simulate: optional state dump
    std::optional<double> horizon;
    std::vector<double> snapshots;  // simulate: PDE slice times
    double q = 2.0;
    std::optional<double> sigma_min;
    std::optional<double> sigma_max;
    std::optional<double> im_max;
    int grid = 0;  // frequency grid override (0 = auto)
    double pass_tol = 1e-6;
    double fail_tol = 1e-10;
    int resolution = 200;
    unsigned long long seed = 20240801ull;
    bool inject_xi_fault = false;  // verify: flips one sign in the table recursion
};

int cmd_analyze(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_network(const RunConfig& config);
int cmd_verify(const RunConfig& config);

// Parses argv-style arguments (without the program name) and dispatches.
int run_cli(const std::vector<std::string>& args);

}  // namespace hyctrl
