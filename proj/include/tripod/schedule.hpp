#pragma once

#include <complex>
#include <vector>

#include "tripod/angles.hpp"

namespace tripod {

enum class RampShape { Cos2, Square };

struct ControlPair {
  std::complex<double> omega2{0.0, 0.0};
  std::complex<double> omega3{0.0, 0.0};

  bool operator==(const ControlPair&) const = default;
};

/// Control pair realizing a set at amplitude omega:
/// Omega2 = omega cos(phi) e^{i chi2}, Omega3 = omega sin(phi) e^{i chi3}.
ControlPair control_pair(const ControlSet& set, double omega);

// One time window of the control history.  Cos2 segments blend from the value
// at t0 to the value at t1 with a cos^2-shaped easing (zero slope at both
// ends); Square segments hold the target value over the whole window, jumping
// at t0.
struct Segment {
  double t0 = 0, t1 = 0;
  ControlPair a, b;
  RampShape shape = RampShape::Cos2;

  ControlPair value_at(double t) const;
  // Omega3/Omega2 constant in magnitude and phase over the segment and the
  // individual phases not drifting -- what the analytic transport requires.
  bool proportional() const;
};

// Piecewise history of the two Rabi frequencies.  Built in time order with
// hold_until / blend_to, so segments are contiguous and non-overlapping by
// construction.
class ControlSchedule {
 public:
  explicit ControlSchedule(double t_start = 0.0, ControlPair initial = {});

  // Square segment holding `value` up to time t (jump at the segment start).
  ControlSchedule& hold_until(double t, ControlPair value);
  // Smooth (or square) blend from the current value to `target` ending at t.
  ControlSchedule& blend_to(double t, ControlPair target,
                            RampShape shape = RampShape::Cos2);

  // Closed-left lookup: a boundary time belongs to the later segment.
  // Throws std::out_of_range outside [t_begin, t_end].
  ControlPair rabi_at(double t) const;

  double t_begin() const { return t_start_; }
  double t_end() const;
  ControlPair end_value() const;
  const std::vector<Segment>& segments() const { return segments_; }

  // True when every segment overlapping [w0, w1) keeps the two controls
  // proportional and all live segments share one (phi, chi2, chi3).
  bool proportional_over(double w0, double w1) const;

 private:
  double t_start_;
  ControlPair start_value_;
  std::vector<Segment> segments_;
};

}  // namespace tripod
