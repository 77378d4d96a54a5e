#pragma once

#include <span>
#include <vector>

#include "tripod/angles.hpp"
#include "tripod/field.hpp"
#include "tripod/schedule.hpp"

namespace tripod {

// Instantaneous basis of the polariton pair: control set, mixing angle theta
// and the accumulated phase chi.
struct PolaritonBasis {
  ControlSet set;
  double theta = kPi / 2;
  double chi = 0.0;
};

// Dark (psi) and trapped (z_pol) polariton mode functions plus the bright
// orthogonal complement.  s_a is carried through verbatim so the change of
// variables inverts exactly; its norm belongs to the bright accounting.
struct PolaritonField {
  Grid grid;
  std::vector<cxd> psi, z_pol, bright, s_a;
};

// Pointwise unitary map from (u, s_c, s_d) to (psi, z_pol, bright):
//   psi    = e^{-i chi} [u cos(th) - sin(th)(e^{i chi2} cos(phi) s_c
//                                          + e^{i chi3} sin(phi) s_d)]
//   z_pol  = e^{i chi2} sin(phi) s_c - e^{i chi3} cos(phi) s_d
PolaritonField to_polaritons(const FieldState& state,
                             const PolaritonBasis& basis);

// Exact inverse of to_polaritons (s_a restored verbatim, t reset to 0).
FieldState from_polaritons(const PolaritonField& pol,
                           const PolaritonBasis& basis);

enum class Interp { Spectral, Linear };

// Profile shifted by `distance` on its own grid.  Spectral (band-limited)
// interpolation needs a power-of-two grid; anything else falls back to
// linear interpolation with zero fill at the boundaries.
std::vector<cxd> shift_profile(std::span<const cxd> profile, double dz,
                               double distance,
                               Interp method = Interp::Spectral);

struct ThetaSample {
  double t = 0;
  double theta = 0;
};

/// c * \int cos^2(theta) dt over the trace (trapezoid quadrature).
double transport_shift(std::span<const ThetaSample> trace, double c);

// Shape-preserving transport of the dark polariton: the input profile shifted
// by c * \int cos^2(theta) dt.  The trapped polariton is untouched by
// construction and has no transport law to apply.
std::vector<cxd> transport(std::span<const cxd> psi0, double dz,
                           std::span<const ThetaSample> theta_trace, double c,
                           Interp method = Interp::Spectral);

// Same, validated against the schedule: throws unless [t0, t1) keeps the
// controls proportional (phi and the control phases constant).
std::vector<cxd> transport(std::span<const cxd> psi0, double dz,
                           const ControlSchedule& schedule, double kappa,
                           double t0, double t1, double c, int samples = 512,
                           Interp method = Interp::Spectral);

// Pointwise 2x2 change between two stored bases (equal theta in both).  The
// matrix entries match bs_matrix(basis0.set, basis1.set) and pick up the
// accumulated-chi phases of the two bases.
PolaritonField basis_change(const PolaritonField& pol,
                            const PolaritonBasis& basis0,
                            const PolaritonBasis& basis1);

}  // namespace tripod
