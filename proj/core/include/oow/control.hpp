#pragma once

#include "oow/kinematics.hpp"

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oow::control {

enum class Button : std::uint16_t {
  L1 = 1u << 0,
  R1 = 1u << 1,
  L2 = 1u << 2,
  R2 = 1u << 3,
  Cross = 1u << 4,
  Triangle = 1u << 5,
  Square = 1u << 6,
  Circle = 1u << 7,
  DpadU = 1u << 8,
  DpadD = 1u << 9,
  DpadL = 1u << 10,
  DpadR = 1u << 11,
};

inline constexpr std::array<Button, 12> kAllButtons = {
    Button::L1,     Button::R1,     Button::L2,    Button::R2,    Button::Cross, Button::Triangle,
    Button::Square, Button::Circle, Button::DpadU, Button::DpadD, Button::DpadL, Button::DpadR};

std::string_view button_name(Button b);
std::optional<Button> button_from_name(std::string_view name);

class ButtonSet {
 public:
  constexpr ButtonSet() = default;
  constexpr ButtonSet(std::initializer_list<Button> buttons) {
    for (Button b : buttons) set(b);
  }

  constexpr bool has(Button b) const { return (bits_ & static_cast<std::uint16_t>(b)) != 0; }
  constexpr void set(Button b) { bits_ |= static_cast<std::uint16_t>(b); }
  constexpr void clear(Button b) { bits_ &= static_cast<std::uint16_t>(~static_cast<std::uint16_t>(b)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint16_t bits() const { return bits_; }
  /// Buttons held here but not in `before`.
  constexpr ButtonSet pressed_since(ButtonSet before) const {
    ButtonSet out;
    out.bits_ = static_cast<std::uint16_t>(bits_ & ~before.bits_);
    return out;
  }

  friend constexpr bool operator==(ButtonSet, ButtonSet) = default;

 private:
  std::uint16_t bits_ = 0;
};

struct Axes {
  double lx = 0.0;
  double ly = 0.0;
  double rx = 0.0;
  double ry = 0.0;

  friend bool operator==(const Axes&, const Axes&) = default;
};

struct InputCommand {
  double timestamp = 0.0;  // client issue time, s
  std::uint64_t seq = 0;
  Axes axes;
  ButtonSet buttons;

  friend bool operator==(const InputCommand&, const InputCommand&) = default;
};

/// Camera basis convention (OpenGL style): local x is screen-right, local y
/// is screen-up, local z points out of the screen toward the operator. The
/// camera looks along its local -z.
struct Camera {
  static constexpr int kFixed = -1;

  kinematics::Pose mount_offset;  // relative to the mount frame (or world when fixed)
  int mount = kFixed;             // arm frame index, or kFixed
  double pan = 0.0;               // rad, about local y
  double tilt = 0.0;              // rad, about local x
  kinematics::Pose pose;          // world pose, refreshed by update_rig
};

struct CameraRig {
  std::array<Camera, 4> cameras;
  int selected = 0;

  const Camera& active() const { return cameras.at(static_cast<std::size_t>(selected)); }
};

/// Recompute world poses of arm-mounted and fixed cameras.
void update_rig(CameraRig& rig, const std::vector<Eigen::Isometry3d>& arm_frames);

struct ControlGains {
  double speed = 0.5;      // m/s at full deflection
  double pan_rate = 0.8;   // rad/s
  double deadzone = 0.08;  // axis magnitude below this reads as zero
};

enum class Latch { None, Grapple, Release };

struct ControlDelta {
  Eigen::Vector3d target_delta = Eigen::Vector3d::Zero();  // world frame, m
  kinematics::WristCommand wrist;                          // normalized rates in [-1, 1]
  double pan_delta = 0.0;
  double tilt_delta = 0.0;
  int camera_cycle = 0;  // +1 (R1) / -1 (L1) on press
  Latch latch = Latch::None;

  bool is_zero() const;
};

double apply_deadzone(double axis, double deadzone);

/// Translate one controller sample into motion in the selected camera's
/// frame. Selection cycling and latching react to press edges relative to
/// `held_before`; continuous actions use the held state.
ControlDelta map_input(const InputCommand& cmd, const CameraRig& rig, double dt,
                       const ControlGains& gains = {}, ButtonSet held_before = {});

/// Applies selection/pan/tilt changes from a delta to the rig.
void apply_camera(CameraRig& rig, const ControlDelta& delta);

/// FIFO that withholds each command until its timestamp lags the
/// processing clock by at least the configured latency.
class DelayQueue {
 public:
  explicit DelayQueue(double latency = 0.0);

  double latency() const { return latency_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Throws OrderingError unless cmd.seq exceeds every seq seen so far.
  void push(const InputCommand& cmd);
  std::vector<InputCommand> pop_ready(double now);

 private:
  double latency_;
  std::deque<InputCommand> entries_;
  std::optional<std::uint64_t> last_seq_;
};

}  // namespace oow::control
