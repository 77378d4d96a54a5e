#include "tripod/polariton.hpp"

#include <cmath>
#include <stdexcept>

namespace tripod {

namespace {

void check_arrays(std::size_t n, std::initializer_list<std::size_t> sizes) {
  for (auto s : sizes)
    if (s != n) throw std::invalid_argument("grid size mismatch");
}

bool power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

// in-place iterative radix-2 FFT (sign = -1 forward, +1 inverse, unscaled)
void fft_radix2(std::vector<cxd>& a, int sign) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2 * kPi / static_cast<double>(len);
    const cxd wl = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      cxd w = 1.0;
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cxd x = a[i + k];
        const cxd y = a[i + k + len / 2] * w;
        a[i + k] = x + y;
        a[i + k + len / 2] = x - y;
        w *= wl;
      }
    }
  }
}

}  // namespace

PolaritonField to_polaritons(const FieldState& state,
                             const PolaritonBasis& basis) {
  const std::size_t n = static_cast<std::size_t>(state.grid.n);
  check_arrays(n, {state.u.size(), state.s_a.size(), state.s_c.size(),
                   state.s_d.size()});
  if (!std::isfinite(basis.theta) || !std::isfinite(basis.chi))
    throw std::invalid_argument("basis angles must be finite");

  const double ct = std::cos(basis.theta), st = std::sin(basis.theta);
  const double cp = std::cos(basis.set.phi), sp = std::sin(basis.set.phi);
  const cxd e2 = std::polar(1.0, basis.set.chi2);
  const cxd e3 = std::polar(1.0, basis.set.chi3);
  const cxd g = std::polar(1.0, -basis.chi);

  PolaritonField out;
  out.grid = state.grid;
  out.psi.resize(n);
  out.z_pol.resize(n);
  out.bright.resize(n);
  out.s_a = state.s_a;
  for (std::size_t i = 0; i < n; ++i) {
    const cxd mix = e2 * cp * state.s_c[i] + e3 * sp * state.s_d[i];
    out.psi[i] = g * (state.u[i] * ct - st * mix);
    out.z_pol[i] = e2 * sp * state.s_c[i] - e3 * cp * state.s_d[i];
    out.bright[i] = g * (state.u[i] * st + ct * mix);
  }
  return out;
}

FieldState from_polaritons(const PolaritonField& pol,
                           const PolaritonBasis& basis) {
  const std::size_t n = static_cast<std::size_t>(pol.grid.n);
  check_arrays(n, {pol.psi.size(), pol.z_pol.size(), pol.bright.size(),
                   pol.s_a.size()});

  const double ct = std::cos(basis.theta), st = std::sin(basis.theta);
  const double cp = std::cos(basis.set.phi), sp = std::sin(basis.set.phi);
  const cxd e2c = std::polar(1.0, -basis.set.chi2);
  const cxd e3c = std::polar(1.0, -basis.set.chi3);
  const cxd g = std::polar(1.0, basis.chi);

  FieldState out = FieldState::zero(pol.grid);
  out.s_a = pol.s_a;
  for (std::size_t i = 0; i < n; ++i) {
    out.u[i] = g * (pol.psi[i] * ct + pol.bright[i] * st);
    const cxd mix = g * (pol.bright[i] * ct - pol.psi[i] * st);
    out.s_c[i] = e2c * (cp * mix + sp * pol.z_pol[i]);
    out.s_d[i] = e3c * (sp * mix - cp * pol.z_pol[i]);
  }
  return out;
}

std::vector<cxd> shift_profile(std::span<const cxd> profile, double dz,
                               double distance, Interp method) {
  if (!(dz > 0)) throw std::invalid_argument("dz must be positive");
  const std::size_t n = profile.size();
  std::vector<cxd> out(profile.begin(), profile.end());
  if (n == 0 || distance == 0.0) return out;

  if (method == Interp::Spectral && power_of_two(n)) {
    fft_radix2(out, -1);
    for (std::size_t k = 0; k < n; ++k) {
      const double kk = (k <= n / 2) ? static_cast<double>(k)
                                     : static_cast<double>(k) - static_cast<double>(n);
      const double freq = 2 * kPi * kk / (static_cast<double>(n) * dz);
      out[k] *= std::polar(1.0, -freq * distance);
    }
    fft_radix2(out, +1);
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= inv;
    return out;
  }

  // linear interpolation, zero outside the grid
  const double shift_cells = distance / dz;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) - shift_cells;
    const double fl = std::floor(x);
    const long j = static_cast<long>(fl);
    const double frac = x - fl;
    cxd lo{}, hi{};
    if (j >= 0 && j < static_cast<long>(n)) lo = profile[static_cast<std::size_t>(j)];
    if (j + 1 >= 0 && j + 1 < static_cast<long>(n))
      hi = profile[static_cast<std::size_t>(j + 1)];
    out[i] = (1.0 - frac) * lo + frac * hi;
  }
  return out;
}

double transport_shift(std::span<const ThetaSample> trace, double c) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    if (!(trace[i + 1].t > trace[i].t))
      throw std::invalid_argument("theta trace must increase strictly in time");
    const double ca = std::cos(trace[i].theta);
    const double cb = std::cos(trace[i + 1].theta);
    acc += 0.5 * (ca * ca + cb * cb) * (trace[i + 1].t - trace[i].t);
  }
  return c * acc;
}

std::vector<cxd> transport(std::span<const cxd> psi0, double dz,
                           std::span<const ThetaSample> theta_trace, double c,
                           Interp method) {
  return shift_profile(psi0, dz, transport_shift(theta_trace, c), method);
}

std::vector<cxd> transport(std::span<const cxd> psi0, double dz,
                           const ControlSchedule& schedule, double kappa,
                           double t0, double t1, double c, int samples,
                           Interp method) {
  if (!(t1 > t0)) throw std::invalid_argument("empty transport window");
  if (!schedule.proportional_over(t0, t1))
    throw std::invalid_argument(
        "transport needs proportional controls over the window "
        "(phi and control phases constant)");
  std::vector<ThetaSample> trace(samples + 1);
  AngleState ang;
  for (int i = 0; i <= samples; ++i) {
    const double t = t0 + (t1 - t0) * static_cast<double>(i) / samples;
    const auto om = schedule.rabi_at(t);
    ang = mixing_angles(om.omega2, om.omega3, kappa, &ang);
    trace[i] = {t, ang.theta};
  }
  return transport(psi0, dz, trace, c, method);
}

PolaritonField basis_change(const PolaritonField& pol,
                            const PolaritonBasis& basis0,
                            const PolaritonBasis& basis1) {
  const std::size_t n = static_cast<std::size_t>(pol.grid.n);
  check_arrays(n, {pol.psi.size(), pol.z_pol.size()});
  if (std::abs(basis0.theta - basis1.theta) > 1e-9)
    throw std::invalid_argument("basis change requires equal mixing angles");

  // Release transformation written out against the two sets; kept separate
  // from bs_matrix on purpose so the two routes cross-check each other.
  const cxd e2 = std::polar(1.0, basis1.set.chi2 - basis0.set.chi2);
  const cxd e3 = std::polar(1.0, basis1.set.chi3 - basis0.set.chi3);
  const double c0 = std::cos(basis0.set.phi), s0 = std::sin(basis0.set.phi);
  const double c1 = std::cos(basis1.set.phi), s1 = std::sin(basis1.set.phi);
  const cxd m11 = c1 * c0 * e2 + s1 * s0 * e3;
  const cxd m12 = c1 * s0 * e2 - s1 * c0 * e3;
  const cxd m21 = s1 * c0 * e2 - c1 * s0 * e3;
  const cxd m22 = s1 * s0 * e2 + c1 * c0 * e3;

  // accumulated-phase gauge factors (trivial for chi0 = chi1 = 0)
  const cxd g11 = std::polar(1.0, basis0.chi - basis1.chi);
  const cxd g12 = std::polar(1.0, -basis1.chi);
  const cxd g21 = std::polar(1.0, basis0.chi);

  PolaritonField out = pol;
  for (std::size_t i = 0; i < n; ++i) {
    const cxd p = pol.psi[i], z = pol.z_pol[i];
    out.psi[i] = g11 * m11 * p + g12 * m12 * z;
    out.z_pol[i] = g21 * m21 * p + m22 * z;
  }
  return out;
}

}  // namespace tripod
