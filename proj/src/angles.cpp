#include "tripod/angles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tripod {

double wrap_angle(double a) {
  double r = std::fmod(a, 2 * kPi);
  if (r < 0) r += 2 * kPi;
  return r;
}

bool same_angle(double a, double b, double tol) {
  return std::abs(std::remainder(a - b, 2 * kPi)) <= tol;
}

ControlSet::ControlSet(double phi_, double chi2_, double chi3_)
    : phi(std::clamp(phi_, 0.0, kPi / 2)), chi2(chi2_), chi3(chi3_) {
  if (!std::isfinite(phi_) || !std::isfinite(chi2_) || !std::isfinite(chi3_))
    throw std::invalid_argument("control set angles must be finite");
}

ControlSet complementary(const ControlSet& set) {
  return ControlSet(kPi / 2 - set.phi, wrap_angle(set.chi2 + kPi), set.chi3);
}

bool same_set(const ControlSet& a, const ControlSet& b, double tol) {
  return std::abs(a.phi - b.phi) <= tol && same_angle(a.chi2, b.chi2, tol) &&
         same_angle(a.chi3, b.chi3, tol);
}

AngleState mixing_angles(std::complex<double> omega2,
                         std::complex<double> omega3, double kappa,
                         const AngleState* prev) {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  if (!std::isfinite(omega2.real()) || !std::isfinite(omega2.imag()) ||
      !std::isfinite(omega3.real()) || !std::isfinite(omega3.imag()))
    throw std::invalid_argument("rabi frequencies must be finite");

  const double m2 = std::abs(omega2);
  const double m3 = std::abs(omega3);
  const double omega = std::hypot(m2, m3);

  AngleState out;
  out.theta = std::atan2(kappa, omega);  // pi/2 exactly when omega == 0
  out.phi = (omega == 0) ? (prev ? prev->phi : 0.0) : std::atan2(m3, m2);
  out.chi2 = (m2 == 0) ? (prev ? prev->chi2 : 0.0) : std::arg(omega2);
  out.chi3 = (m3 == 0) ? (prev ? prev->chi3 : 0.0) : std::arg(omega3);
  out.chi = prev ? prev->chi : 0.0;
  return out;
}

double chi_integrate(std::span<const AngleSample> trace) {
  double chi = 0.0;
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    if (!(trace[i + 1].t > trace[i].t))
      throw std::invalid_argument("trace samples must increase strictly in time");
    const double sm = std::sin(0.5 * (trace[i].theta + trace[i + 1].theta));
    chi += sm * sm * (trace[i + 1].chi2 - trace[i].chi2);
  }
  return chi;
}

}  // namespace tripod
