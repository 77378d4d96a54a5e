#include "tripod/field.hpp"

#include <cmath>
#include <stdexcept>

namespace tripod {

FieldState FieldState::zero(const Grid& g) {
  FieldState s;
  s.grid = g;
  s.u.assign(g.n, cxd{});
  s.s_a.assign(g.n, cxd{});
  s.s_c.assign(g.n, cxd{});
  s.s_d.assign(g.n, cxd{});
  return s;
}

bool FieldState::finite() const {
  auto ok = [](const std::vector<cxd>& v) {
    for (const cxd& x : v)
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    return true;
  };
  return ok(u) && ok(s_a) && ok(s_c) && ok(s_d);
}

double excitation_norm(const FieldState& s) {
  double acc = 0.0;
  for (int i = 0; i < s.grid.n; ++i)
    acc += std::norm(s.u[i]) + std::norm(s.s_a[i]) + std::norm(s.s_c[i]) +
           std::norm(s.s_d[i]);
  return acc * s.grid.dz;
}

FieldState gaussian_packet(const Grid& g, double center, double width) {
  if (!(width > 0)) throw std::invalid_argument("packet width must be positive");
  FieldState s = FieldState::zero(g);
  double nrm = 0.0;
  for (int i = 0; i < g.n; ++i) {
    const double x = g.z(i) - center;
    const double v = std::exp(-x * x / (4 * width * width));
    s.u[i] = v;
    nrm += v * v;
  }
  nrm *= g.dz;
  if (!(nrm > 0)) throw std::invalid_argument("packet lies outside the grid");
  const double scale = 1.0 / std::sqrt(nrm);
  for (auto& v : s.u) v *= scale;
  return s;
}

}  // namespace tripod
