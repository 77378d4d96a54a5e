#include "tripod/interference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tripod {

namespace {

// Composite Simpson weights on n uniform samples; an odd interval count is
// finished with one 3/8 block (single interval falls back to trapezoid).
std::vector<double> quad_weights(int n, double dz) {
  if (n < 2) throw std::invalid_argument("quadrature needs at least two samples");
  std::vector<double> w(n, 0.0);
  const int m = n - 1;
  if (m == 1) {
    w[0] = w[1] = 0.5 * dz;
    return w;
  }
  const int simpson_end = (m % 2 == 0) ? m : m - 3;
  for (int i = 0; i + 2 <= simpson_end; i += 2) {
    w[i] += dz / 3;
    w[i + 1] += 4 * dz / 3;
    w[i + 2] += dz / 3;
  }
  if (m % 2 != 0) {
    const int b = simpson_end;
    w[b] += 3 * dz / 8;
    w[b + 1] += 9 * dz / 8;
    w[b + 2] += 9 * dz / 8;
    w[b + 3] += 3 * dz / 8;
  }
  return w;
}

cxd quad_inner(const std::vector<cxd>& a, const std::vector<cxd>& b,
               double dz) {
  const auto w = quad_weights(static_cast<int>(a.size()), dz);
  cxd acc{};
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += w[i] * std::conj(a[i]) * b[i];
  return acc;
}

double quad_norm_sq(const std::vector<cxd>& a, double dz) {
  const auto w = quad_weights(static_cast<int>(a.size()), dz);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += w[i] * std::norm(a[i]);
  return acc;
}

void require_normalized(const WavePacket& f) {
  if (std::abs(f.norm_sq() - 1.0) > 1e-8)
    throw std::invalid_argument("wave packet must have unit L2 norm");
}

}  // namespace

WavePacket WavePacket::gaussian(double center, double width) {
  if (!(width > 0)) throw std::invalid_argument("packet width must be positive");
  WavePacket p;
  p.kind_ = Kind::Gaussian;
  p.center_ = center;
  p.width_ = width;
  return p;
}

WavePacket WavePacket::sampled(double z0, double dz, std::vector<cxd> values,
                               bool renormalize) {
  if (!(dz > 0)) throw std::invalid_argument("sample spacing must be positive");
  if (values.size() < 2)
    throw std::invalid_argument("sampled packet needs at least two points");
  WavePacket p;
  p.kind_ = Kind::Sampled;
  p.z0_ = z0;
  p.dz_ = dz;
  p.values_ = std::move(values);
  if (renormalize) {
    const double n2 = quad_norm_sq(p.values_, dz);
    if (!(n2 > 0)) throw std::invalid_argument("cannot normalize a zero packet");
    const double s = 1.0 / std::sqrt(n2);
    for (auto& v : p.values_) v *= s;
  }
  return p;
}

double WavePacket::center() const {
  if (kind_ != Kind::Gaussian) throw std::logic_error("not a gaussian packet");
  return center_;
}

double WavePacket::width() const {
  if (kind_ != Kind::Gaussian) throw std::logic_error("not a gaussian packet");
  return width_;
}

const std::vector<cxd>& WavePacket::samples() const {
  if (kind_ != Kind::Sampled) throw std::logic_error("not a sampled packet");
  return values_;
}

double WavePacket::norm_sq() const {
  if (kind_ == Kind::Gaussian) return 1.0;
  return quad_norm_sq(values_, dz_);
}

std::vector<cxd> WavePacket::sample_on(double z0, double dz, int n) const {
  std::vector<cxd> out(n);
  if (kind_ == Kind::Gaussian) {
    const double norm = std::pow(2 * kPi * width_ * width_, -0.25);
    for (int i = 0; i < n; ++i) {
      const double x = z0 + i * dz - center_;
      out[i] = norm * std::exp(-x * x / (4 * width_ * width_));
    }
    return out;
  }
  if (std::abs(z0 - z0_) > 1e-12 || std::abs(dz - dz_) > 1e-12 ||
      n != static_cast<int>(values_.size()))
    throw std::invalid_argument("sampled packets must share the grid");
  return values_;
}

cxd overlap(const WavePacket& f1, const WavePacket& f2) {
  require_normalized(f1);
  require_normalized(f2);
  if (f1.kind() == WavePacket::Kind::Gaussian &&
      f2.kind() == WavePacket::Kind::Gaussian) {
    const double d1 = f1.width(), d2 = f2.width();
    const double a = f2.center() - f1.center();
    const double ss = d1 * d1 + d2 * d2;
    return std::sqrt(2 * d1 * d2 / ss) * std::exp(-a * a / (4 * ss));
  }
  const WavePacket& ref =
      f1.kind() == WavePacket::Kind::Sampled ? f1 : f2;
  const int n = static_cast<int>(ref.samples().size());
  const auto a = f1.sample_on(ref.z0(), ref.dz(), n);
  const auto b = f2.sample_on(ref.z0(), ref.dz(), n);
  return quad_inner(a, b, ref.dz());
}

double BeamSplitterMatrix::unitarity_residual() const {
  const double d1 = std::abs(std::norm(r31) + std::norm(r41) - 1.0);
  const double d2 = std::abs(std::norm(r32) + std::norm(r42) - 1.0);
  const double off = std::abs(std::conj(r31) * r32 + std::conj(r41) * r42);
  return std::max({d1, d2, off});
}

BeamSplitterMatrix bs_matrix(const ControlSet& s0, const ControlSet& s1) {
  const cxd e2 = std::polar(1.0, s1.chi2 - s0.chi2);
  const cxd e3 = std::polar(1.0, s1.chi3 - s0.chi3);
  const double c0 = std::cos(s0.phi), n0 = std::sin(s0.phi);
  const double c1 = std::cos(s1.phi), n1 = std::sin(s1.phi);
  return {c1 * c0 * e2 + n1 * n0 * e3, c1 * n0 * e2 - n1 * c0 * e3,
          n1 * c0 * e2 - c1 * n0 * e3, n1 * n0 * e2 + c1 * c0 * e3};
}

namespace {

void require_overlap(cxd s) {
  if (!(std::abs(s) <= 1.0 + 1e-12))
    throw std::invalid_argument("overlap magnitude must be finite and <= 1");
}

}  // namespace

cxd coalescence_amplitude(const ControlSet& set0, const ControlSet& set1,
                          cxd s) {
  require_overlap(s);
  const auto r = bs_matrix(set0, set1);
  return std::sqrt(1.0 + std::norm(s)) * std::conj(r.r31) * std::conj(r.r32);
}

TwoPhotonStats coalescence_probs(const ControlSet& set0,
                                 const ControlSet& set1, cxd s) {
  require_overlap(s);
  const auto r = bs_matrix(set0, set1);
  const double boost = 1.0 + std::norm(s);
  TwoPhotonStats st;
  st.s = s;
  st.amp_coal1 = std::sqrt(boost) * std::conj(r.r31) * std::conj(r.r32);
  st.p_coal1 = boost * std::norm(r.r31 * r.r32);
  st.p_coal2 = boost * std::norm(r.r41 * r.r42);
  st.p_noncoal = std::clamp(1.0 - st.p_coal1 - st.p_coal2, 0.0, 1.0);
  return st;
}

double noncoal_gaussian(double a, double delta1, double delta2) {
  if (!(delta1 > 0) || !(delta2 > 0))
    throw std::invalid_argument("packet widths must be positive");
  const double ratio = delta2 / delta1 + delta1 / delta2;
  const double ss = delta1 * delta1 + delta2 * delta2;
  return 0.5 * (1.0 - (2.0 / ratio) * std::exp(-a * a / (2 * ss)));
}

std::vector<ScanPoint> hom_scan(ScanAxis axis, double lo, double hi,
                                int points, const HomScanParams& params) {
  if (points < 1 || hi < lo) throw std::invalid_argument("empty scan range");
  std::vector<ScanPoint> out;
  out.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double x =
        points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    double a = params.a, d1 = params.delta1, d2 = params.delta2;
    if (axis == ScanAxis::Separation) {
      a = x;
    } else {
      if (!(x > 0))
        throw std::invalid_argument("width ratio must be positive");
      d2 = x * params.delta1;
    }
    const cxd s = overlap(WavePacket::gaussian(0.0, d1),
                          WavePacket::gaussian(a, d2));
    const auto st = coalescence_probs(params.set0, params.set1, s);
    out.push_back({x, st.p_noncoal, st.p_coal1, st.p_coal2, std::abs(s)});
  }
  return out;
}

TwoPhotonStats fock_oracle(const BeamSplitterMatrix& r, const WavePacket& f1,
                           const WavePacket& f2) {
  const cxd s = overlap(f1, f2);

  // weight of f2 orthogonal to f1 (the second spatial mode)
  double w;
  if (f1.kind() == WavePacket::Kind::Gaussian &&
      f2.kind() == WavePacket::Kind::Gaussian) {
    w = std::sqrt(std::max(0.0, 1.0 - std::norm(s)));
  } else {
    const WavePacket& ref =
        f1.kind() == WavePacket::Kind::Sampled ? f1 : f2;
    const int n = static_cast<int>(ref.samples().size());
    const auto a = f1.sample_on(ref.z0(), ref.dz(), n);
    auto g = f2.sample_on(ref.z0(), ref.dz(), n);
    for (int i = 0; i < n; ++i) g[i] -= s * a[i];
    w = std::sqrt(std::max(0.0, quad_norm_sq(g, ref.dz())));
  }
  if (w < 1e-9) w = 0.0;  // degenerate pair: a single spatial mode

  // Output modes 0..3 = (stage1,e1), (stage1,e2), (stage2,e1), (stage2,e2).
  // Photon A sits in the first input port with packet e1; photon B in the
  // second with packet s e1 + w e2.  Creation operators pick up the matrix
  // columns.
  const cxd A[4] = {r.r31, 0.0, r.r41, 0.0};
  const cxd B[4] = {s * r.r32, w * r.r32, s * r.r42, w * r.r42};

  double p[3] = {0.0, 0.0, 0.0};  // both stage 1 / both stage 2 / one each
  cxd amp00{}, amp01{};
  for (int m = 0; m < 4; ++m) {
    for (int k = m; k < 4; ++k) {
      const cxd amp = (m == k) ? std::sqrt(2.0) * A[m] * B[m]
                               : A[m] * B[k] + A[k] * B[m];
      const int sm = m / 2, sk = k / 2;
      const int pat = (sm == 0 && sk == 0) ? 0 : (sm == 1 && sk == 1) ? 1 : 2;
      p[pat] += std::norm(amp);
      if (m == 0 && k == 0) amp00 = amp;
      if (m == 0 && k == 1) amp01 = amp;
    }
  }

  TwoPhotonStats st;
  st.s = s;
  st.p_coal1 = p[0];
  st.p_coal2 = p[1];
  st.p_noncoal = p[2];
  // projection on the normalized two-photon state with both packets released
  // at stage 1 (components sqrt(2) s and w over the coalesced sector)
  st.amp_coal1 = (std::conj(std::sqrt(2.0) * s) * amp00 + w * amp01) /
                 std::sqrt(1.0 + std::norm(s));
  return st;
}

}  // namespace tripod
