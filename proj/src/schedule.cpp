#include "tripod/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tripod {

ControlPair control_pair(const ControlSet& set, double omega) {
  ControlPair p;
  p.omega2 = std::polar(omega * std::cos(set.phi), set.chi2);
  p.omega3 = std::polar(omega * std::sin(set.phi), set.chi3);
  return p;
}

ControlPair Segment::value_at(double t) const {
  if (shape == RampShape::Square) return b;
  const double x = (t - t0) / (t1 - t0);
  const double s = std::sin(0.5 * kPi * x);
  const double r = s * s;
  return {a.omega2 + (b.omega2 - a.omega2) * r,
          a.omega3 + (b.omega3 - a.omega3) * r};
}

namespace {

// arg stays constant along a linear blend from a to b iff b = mu*a, mu >= 0
bool phase_locked(std::complex<double> a, std::complex<double> b) {
  if (std::abs(a) == 0.0 || std::abs(b) == 0.0) return true;
  const auto cross = std::conj(a) * b;
  return std::abs(cross.imag()) <= 1e-12 * std::abs(cross) &&
         cross.real() >= 0.0;
}

double pair_amp(const ControlPair& p) {
  return std::hypot(std::abs(p.omega2), std::abs(p.omega3));
}

}  // namespace

bool Segment::proportional() const {
  if (shape == RampShape::Square) return true;  // constant over the window
  if (!phase_locked(a.omega2, b.omega2) || !phase_locked(a.omega3, b.omega3))
    return false;
  const auto cross = a.omega2 * b.omega3 - a.omega3 * b.omega2;
  const double scale =
      std::abs(a.omega2 * b.omega3) + std::abs(a.omega3 * b.omega2);
  return std::abs(cross) <= 1e-12 * std::max(scale, 1e-300);
}

ControlSchedule::ControlSchedule(double t_start, ControlPair initial)
    : t_start_(t_start), start_value_(initial) {}

ControlSchedule& ControlSchedule::hold_until(double t, ControlPair value) {
  const double t0 = t_end();
  if (!(t > t0)) throw std::invalid_argument("segment end must advance time");
  segments_.push_back({t0, t, end_value(), value, RampShape::Square});
  return *this;
}

ControlSchedule& ControlSchedule::blend_to(double t, ControlPair target,
                                           RampShape shape) {
  const double t0 = t_end();
  if (!(t > t0)) throw std::invalid_argument("segment end must advance time");
  segments_.push_back({t0, t, end_value(), target, shape});
  return *this;
}

double ControlSchedule::t_end() const {
  return segments_.empty() ? t_start_ : segments_.back().t1;
}

ControlPair ControlSchedule::end_value() const {
  return segments_.empty() ? start_value_ : segments_.back().b;
}

ControlPair ControlSchedule::rabi_at(double t) const {
  if (!std::isfinite(t) || t < t_start_ || t > t_end())
    throw std::out_of_range("time outside the schedule span");
  if (segments_.empty()) return start_value_;
  // last segment whose t0 <= t (closed-left convention)
  auto it = std::upper_bound(
      segments_.begin(), segments_.end(), t,
      [](double v, const Segment& s) { return v < s.t0; });
  if (it == segments_.begin()) return start_value_;
  --it;
  return it->value_at(std::min(t, it->t1));
}

bool ControlSchedule::proportional_over(double w0, double w1) const {
  bool have_sig = false;
  AngleState sig;
  for (const auto& seg : segments_) {
    if (seg.t1 <= w0 || seg.t0 >= w1) continue;
    if (!seg.proportional()) return false;
    const ControlPair p = pair_amp(seg.a) > pair_amp(seg.b) ? seg.a : seg.b;
    if (pair_amp(p) == 0.0) continue;  // dark window, basis frozen
    const AngleState s = mixing_angles(p.omega2, p.omega3, 1.0);
    if (!have_sig) {
      sig = s;
      have_sig = true;
      continue;
    }
    if (std::abs(s.phi - sig.phi) > 1e-9) return false;
    if (std::cos(sig.phi) > 1e-9 && !same_angle(s.chi2, sig.chi2)) return false;
    if (std::sin(sig.phi) > 1e-9 && !same_angle(s.chi3, sig.chi3)) return false;
  }
  return true;
}

}  // namespace tripod
