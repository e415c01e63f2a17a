#pragma once

// Internal JSON helpers shared by the telemetry, scenario and gateway
// sources. Not installed: public headers stay free of the JSON library.

#include "oow/control.hpp"
#include "oow/kinematics.hpp"
#include "oow/mission.hpp"
#include "oow/telemetry.hpp"

#include <json.hpp>

namespace oow::codec {

using nlohmann::json;

json vec3(const Eigen::Vector3d& v);
Eigen::Vector3d vec3(const json& j);
json quat(const Eigen::Quaterniond& q);  // [w, x, y, z]
Eigen::Quaterniond quat(const json& j);
json pose(const kinematics::Pose& p);    // {"p": [...], "q": [...]}
kinematics::Pose pose(const json& j);

json trial_config(const mission::TrialConfig& c);
mission::TrialConfig trial_config(const json& j);

/// Gateway input message body (without the "t" tag check).
json input_command(const control::InputCommand& c);
control::InputCommand input_command(const json& j);

json event(const telemetry::SessionEvent& e);
telemetry::SessionEvent event(const json& j);

}  // namespace oow::codec
