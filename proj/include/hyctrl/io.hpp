#pragma once

#include <json.hpp>
#include <string>

#include "hyctrl/controllability.hpp"
#include "hyctrl/network.hpp"
#include "hyctrl/solution.hpp"
#include "hyctrl/system.hpp"

namespace hyctrl {

using json = nlohmann::json;

// Piecewise-constant functions serialize as {"breakpoints": [...],
// "values": [...]}; a bare number is accepted as a constant profile on the
// given default domain.
PiecewiseConstantFn pcw_from_json(const json& j, double lo = 0.0, double hi = 1.0);
json pcw_to_json(const PiecewiseConstantFn& f);

// System spec: n, n_plus, speeds[i], dampings[i], M (row-major nested
// arrays), B, optional q (default 2).
HyperbolicSystem hyperbolic_from_json(const json& j);
json hyperbolic_to_json(const HyperbolicSystem& sys);

// State file: components[i] on [-tau_i, 0].
BoundaryState state_from_json(const json& j);
json state_to_json(const BoundaryState& s);

// Control file: horizon plus channels[r] on [0, horizon].
ControlSignal control_from_json(const json& j);
json control_to_json(const ControlSignal& u);

// Graph spec: vertices, edges = [{tail, head, speed, damping}], weights as
// sparse [i, j, w] triples (defaulting to uniform rows where omitted), gamma.
FlowGraph graph_from_json(const json& j);
json graph_to_json(const FlowGraph& g);

json report_to_json(const ControllabilityReport& rep);
json network_report_to_json(const NetworkReport& rep);

json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

// CSV exports: one row per sample, headers included.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, int resolution);
void write_state_csv(const std::string& path, const BoundaryState& s, int resolution);
void write_profile_csv(const std::string& path, const PdeProfile& profile, int resolution,
                       double t);

}  // namespace hyctrl
