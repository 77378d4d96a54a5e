#pragma once

#include <complex>
#include <vector>

namespace tripod {

using cxd = std::complex<double>;

/// Uniform cell-centered 1-D grid.
struct Grid {
  double z_min = 0.0;
  double dz = 1.0;
  int n = 0;

  double z(int i) const { return z_min + (i + 0.5) * dz; }
  double z_max() const { return z_min + n * dz; }
  bool operator==(const Grid&) const = default;
};

// Scaled mode functions: signal envelope u and the three coherences
// (sigma_ba, sigma_bc, sigma_bd in units of d_ab / (hbar kappa)).
struct FieldState {
  Grid grid;
  std::vector<cxd> u, s_a, s_c, s_d;
  double t = 0.0;

  static FieldState zero(const Grid& g);
  bool finite() const;
};

// \int (|u|^2 + |s_a|^2 + |s_c|^2 + |s_d|^2) dz over the grid; conserved up
// to boundary outflow.
double excitation_norm(const FieldState& s);

// Gaussian signal packet normalized to unit excitation norm on the grid.
// `width` is the standard deviation of the intensity profile |u|^2.
FieldState gaussian_packet(const Grid& g, double center, double width);

}  // namespace tripod
