#include "oow/control.hpp"

#include "oow/error.hpp"

#include <algorithm>
#include <cmath>

namespace oow::control {

namespace {

constexpr std::array<std::string_view, 12> kButtonNames = {
    "L1", "R1", "L2", "R2", "Cross", "Triangle", "Square", "Circle", "DpadU", "DpadD", "DpadL", "DpadR"};

// Clock comparisons run on tick times k / rate; this absorbs the last-bit
// rounding of ts + latency.
constexpr double kClockSlack = 1e-9;

double held(ButtonSet s, Button b) { return s.has(b) ? 1.0 : 0.0; }

}  // namespace

std::string_view button_name(Button b) {
  for (std::size_t i = 0; i < kAllButtons.size(); ++i) {
    if (kAllButtons[i] == b) return kButtonNames[i];
  }
  return "?";
}

std::optional<Button> button_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kAllButtons.size(); ++i) {
    if (kButtonNames[i] == name) return kAllButtons[i];
  }
  return std::nullopt;
}

void update_rig(CameraRig& rig, const std::vector<Eigen::Isometry3d>& arm_frames) {
  for (auto& cam : rig.cameras) {
    Eigen::Isometry3d mount = Eigen::Isometry3d::Identity();
    if (cam.mount != Camera::kFixed) {
      if (cam.mount < 0 || static_cast<std::size_t>(cam.mount) >= arm_frames.size()) {
        throw ParameterError("camera mount frame " + std::to_string(cam.mount) + " out of range");
      }
      mount = arm_frames[static_cast<std::size_t>(cam.mount)];
    }
    Eigen::Isometry3d t = mount * cam.mount_offset.isometry();
    t.rotate(Eigen::AngleAxisd(cam.pan, Eigen::Vector3d::UnitY()));
    t.rotate(Eigen::AngleAxisd(cam.tilt, Eigen::Vector3d::UnitX()));
    cam.pose = kinematics::Pose::from_isometry(t);
  }
}

bool ControlDelta::is_zero() const {
  return target_delta.isZero(0.0) && wrist.roll == 0.0 && wrist.pitch == 0.0 &&
         wrist.yaw == 0.0 && pan_delta == 0.0 && tilt_delta == 0.0 && camera_cycle == 0 &&
         latch == Latch::None;
}

double apply_deadzone(double axis, double deadzone) {
  const double a = std::clamp(axis, -1.0, 1.0);
  return std::abs(a) < deadzone ? 0.0 : a;
}

ControlDelta map_input(const InputCommand& cmd, const CameraRig& rig, double dt,
                       const ControlGains& gains, ButtonSet held_before) {
  if (rig.selected < 0 || rig.selected >= 4) throw ParameterError("camera selection out of range");
  ControlDelta out;
  const ButtonSet b = cmd.buttons;
  const double lx = apply_deadzone(cmd.axes.lx, gains.deadzone);
  const double ly = apply_deadzone(cmd.axes.ly, gains.deadzone);
  const double rx = apply_deadzone(cmd.axes.rx, gains.deadzone);
  const double ry = apply_deadzone(cmd.axes.ry, gains.deadzone);

  // Stick up reads negative, hence -ly. R2 pushes out of the screen.
  const Eigen::Vector3d local(lx, -ly, held(b, Button::R2) - held(b, Button::L2));
  if (!local.isZero(0.0)) {
    out.target_delta = rig.active().pose.orientation * local * (gains.speed * dt);
  }

  out.wrist.yaw = rx;
  out.wrist.pitch = -ry;
  out.wrist.roll = held(b, Button::Circle) - held(b, Button::Square);

  out.pan_delta = (held(b, Button::DpadR) - held(b, Button::DpadL)) * gains.pan_rate * dt;
  out.tilt_delta = (held(b, Button::DpadU) - held(b, Button::DpadD)) * gains.pan_rate * dt;

  const ButtonSet pressed = b.pressed_since(held_before);
  out.camera_cycle = static_cast<int>(pressed.has(Button::R1)) - static_cast<int>(pressed.has(Button::L1));
  if (pressed.has(Button::Cross)) {
    out.latch = Latch::Grapple;
  } else if (pressed.has(Button::Triangle)) {
    out.latch = Latch::Release;
  }
  return out;
}

void apply_camera(CameraRig& rig, const ControlDelta& delta) {
  rig.selected = ((rig.selected + delta.camera_cycle) % 4 + 4) % 4;
  Camera& cam = rig.cameras[static_cast<std::size_t>(rig.selected)];
  cam.pan += delta.pan_delta;
  cam.tilt += delta.tilt_delta;
}

DelayQueue::DelayQueue(double latency) : latency_(latency) {
  if (!(latency >= 0.0) || !std::isfinite(latency)) throw ParameterError("latency must be >= 0");
}

void DelayQueue::push(const InputCommand& cmd) {
  if (last_seq_ && cmd.seq <= *last_seq_) {
    throw OrderingError("input seq " + std::to_string(cmd.seq) + " not after " +
                        std::to_string(*last_seq_));
  }
  last_seq_ = cmd.seq;
  entries_.push_back(cmd);
}

std::vector<InputCommand> DelayQueue::pop_ready(double now) {
  std::vector<InputCommand> ready;
  while (!entries_.empty() && now - entries_.front().timestamp >= latency_ - kClockSlack) {
    ready.push_back(entries_.front());
    entries_.pop_front();
  }
  return ready;
}

}  // namespace oow::control
