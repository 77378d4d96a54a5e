#pragma once

#include <complex>
#include <span>

namespace tripod {

inline constexpr double kPi = 3.14159265358979323846;

/// Reduce an angle into [0, 2*pi).
double wrap_angle(double a);

/// True when a and b denote the same angle modulo 2*pi.
bool same_angle(double a, double b, double tol = 1e-9);

// One control-field configuration (phi, chi2, chi3) applied at a storage or
// release stage.  phi is clamped to [0, pi/2]; all angles must be finite.
struct ControlSet {
  double phi = 0.0;
  double chi2 = 0.0;
  double chi3 = 0.0;

  ControlSet() = default;
  ControlSet(double phi_, double chi2_, double chi3_);
};

// The paired set (pi/2 - phi, chi2 + pi, chi3), chi2 reduced mod 2*pi.
// Applying a set and then its complement releases the stored excitation
// completely.
ControlSet complementary(const ControlSet& set);

bool same_set(const ControlSet& a, const ControlSet& b, double tol = 1e-9);

// Mixing angles and accumulated phase of the instantaneous polariton basis:
// tan(theta) = kappa/|Omega|, tan(phi) = |Omega3/Omega2|, chi2/chi3 the
// control phases, chi the running integral of sin^2(theta) * dchi2/dt.
struct AngleState {
  double theta = kPi / 2;
  double phi = 0.0;
  double chi2 = 0.0;
  double chi3 = 0.0;
  double chi = 0.0;
};

// Instantaneous mixing angles for a control pair.  Angles that are undefined
// at the given amplitudes (phi when Omega = 0, chi2/chi3 when the respective
// control vanishes) are carried over from prev so the basis stays fixed
// through dark storage.  chi is copied from prev unchanged; accumulating it
// is the caller's job (see chi_integrate).  Throws on kappa <= 0.
AngleState mixing_angles(std::complex<double> omega2,
                         std::complex<double> omega3, double kappa,
                         const AngleState* prev = nullptr);

struct AngleSample {
  double t = 0;
  double theta = 0;
  double chi2 = 0;
};

// Accumulated chi over a sampled trace: sum of sin^2(theta_mid) * dchi2 per
// interval.  Samples must be strictly increasing in t.
double chi_integrate(std::span<const AngleSample> trace);

}  // namespace tripod
