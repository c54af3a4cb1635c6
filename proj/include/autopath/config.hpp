#pragma once

#include <string>

#include "autopath/collision.hpp"
#include "autopath/mpc.hpp"
#include "autopath/planner.hpp"
#include "autopath/sim.hpp"

namespace autopath {

// Everything a run needs besides the map and scenario. Loaded from
// "autopath-config/1" JSON; absent keys keep their defaults.
struct ToolkitConfig {
    PlannerConfig planner;
    MpcParams mpc;
    VehicleFootprint footprint;
    VehicleLimits limits;
    SimConfig sim;
};

ToolkitConfig load_config(const std::string& json_text);
std::string serialize_config(const ToolkitConfig& config);

}  // namespace autopath
