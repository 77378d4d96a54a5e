#pragma once

#include <complex>
#include <vector>

#include "tripod/angles.hpp"
#include "tripod/field.hpp"

namespace tripod {

// Normalized spatial wave packet: an analytic Gaussian (center, width) or a
// sampled complex profile on a uniform grid.
class WavePacket {
 public:
  enum class Kind { Gaussian, Sampled };

  static WavePacket gaussian(double center, double width);
  // Sampled profile; renormalized to unit L2 norm unless renormalize = false.
  static WavePacket sampled(double z0, double dz, std::vector<cxd> values,
                            bool renormalize = true);

  Kind kind() const { return kind_; }
  double center() const;
  double width() const;
  double z0() const { return z0_; }
  double dz() const { return dz_; }
  const std::vector<cxd>& samples() const;

  double norm_sq() const;
  /// Profile evaluated/copied onto an n-point grid starting at z0.
  std::vector<cxd> sample_on(double z0, double dz, int n) const;

 private:
  WavePacket() = default;
  Kind kind_ = Kind::Gaussian;
  double center_ = 0, width_ = 1;
  double z0_ = 0, dz_ = 0;
  std::vector<cxd> values_;
};

// s = \int f1*(z) f2(z) dz.  Closed form for Gaussian pairs, composite
// Simpson quadrature otherwise.  Both packets must be normalized.
cxd overlap(const WavePacket& f1, const WavePacket& f2);

// The 2x2 unitary mapping the two stored photons (input ports) onto the two
// release stages (output ports).
struct BeamSplitterMatrix {
  cxd r31, r32, r41, r42;
  double unitarity_residual() const;  // max-entry norm of R^dag R - I
};

BeamSplitterMatrix bs_matrix(const ControlSet& set0, const ControlSet& set1);

struct TwoPhotonStats {
  cxd s;                 // packet overlap
  cxd amp_coal1;         // coalescence amplitude at the first release stage
  double p_coal1 = 0;    // both photons out at stage 1
  double p_coal2 = 0;    // both photons out at stage 2
  double p_noncoal = 0;  // one photon per stage
};

// sqrt(1+|s|^2) conj(R31) conj(R32); |amp|^2 is the stage-1 coalescence
// probability.
cxd coalescence_amplitude(const ControlSet& set0, const ControlSet& set1,
                          cxd s);

// Closed-form statistics for one photon stored per input port.
TwoPhotonStats coalescence_probs(const ControlSet& set0,
                                 const ControlSet& set1, cxd s);

// Noncoalescence probability for Gaussian packets of widths delta1, delta2
// separated by a, released with phi0 = 0, phi1 = pi/4.
double noncoal_gaussian(double a, double delta1, double delta2);

enum class ScanAxis { Separation, WidthRatio };

struct ScanPoint {
  double x, p_noncoal, p_coal1, p_coal2, abs_s;
};

struct HomScanParams {
  double delta1 = 1.0;
  double delta2 = 1.0;
  double a = 0.0;  // separation, fixed when scanning the width ratio
  ControlSet set0{};
  ControlSet set1{kPi / 4, 0.0, 0.0};
};

// Mandel-dip curve over packet separation or width ratio.
std::vector<ScanPoint> hom_scan(ScanAxis axis, double lo, double hi,
                                int points, const HomScanParams& params);

// Brute-force check: orthonormalize {f1, f2}, expand the two stored photons
// over the stage x spatial-mode basis, apply the single-particle map and sum
// symmetrized two-photon output amplitudes by stage pattern.
TwoPhotonStats fock_oracle(const BeamSplitterMatrix& r, const WavePacket& f1,
                           const WavePacket& f2);

}  // namespace tripod
