#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "tripod/interference.hpp"

using namespace tripod;

namespace {

// orthonormal mode pair on a grid: a gaussian and its first excited partner
struct ModePair {
  double z0 = -10.0, dz = 20.0 / 800;
  int n = 801;
  std::vector<cxd> e1, e2;

  ModePair() {
    e1.resize(n);
    e2.resize(n);
    for (int i = 0; i < n; ++i) {
      const double z = z0 + i * dz;
      e1[i] = std::exp(-z * z / 4.0);
      e2[i] = z * std::exp(-z * z / 4.0);
    }
    normalize(e1);
    // project out e1 (odd vs even: analytic overlap already zero) and normalize
    cxd ov = inner(e1, e2);
    for (int i = 0; i < n; ++i) e2[i] -= ov * e1[i];
    normalize(e2);
  }

  cxd inner(const std::vector<cxd>& a, const std::vector<cxd>& b) const {
    cxd acc{};
    for (int i = 0; i < n; ++i) acc += std::conj(a[i]) * b[i];
    return acc * dz;
  }
  void normalize(std::vector<cxd>& a) const {
    double nn = 0;
    for (const auto& v : a) nn += std::norm(v);
    nn = std::sqrt(nn * dz);
    for (auto& v : a) v /= nn;
  }

  // packet pair with overlap exactly s
  std::pair<WavePacket, WavePacket> with_overlap(cxd s) const {
    const double w = std::sqrt(std::max(0.0, 1.0 - std::norm(s)));
    std::vector<cxd> f2(n);
    for (int i = 0; i < n; ++i) f2[i] = s * e1[i] + w * e2[i];
    return {WavePacket::sampled(z0, dz, e1), WavePacket::sampled(z0, dz, f2)};
  }
};

ControlSet random_set(std::mt19937& rng) {
  std::uniform_real_distribution<double> half(0, kPi / 2), full(0, 2 * kPi);
  return ControlSet(half(rng), full(rng), full(rng));
}

}  // namespace

TEST_CASE("overlap of a packet with itself is one") {
  const auto f = WavePacket::gaussian(1.0, 2.0);
  CHECK(std::abs(overlap(f, f) - 1.0) < 1e-14);
}

TEST_CASE("equal-width gaussians at separation 2 delta have |s|^2 = 1/e") {
  // quadrature route
  const int n = 1601;
  const double z0 = -12, dz = 24.0 / (n - 1);
  std::vector<cxd> a(n), b(n);
  for (int i = 0; i < n; ++i) {
    const double z = z0 + i * dz;
    a[i] = std::exp(-z * z / 4.0);
    b[i] = std::exp(-(z - 2.0) * (z - 2.0) / 4.0);
  }
  const auto fa = WavePacket::sampled(z0, dz, a);
  const auto fb = WavePacket::sampled(z0, dz, b);
  const cxd s_quad = overlap(fa, fb);
  CHECK(std::norm(s_quad) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  // closed-form route agrees with the quadrature oracle
  const cxd s_closed =
      overlap(WavePacket::gaussian(0, 1), WavePacket::gaussian(2, 1));
  CHECK(std::abs(s_closed - s_quad) < 1e-10);
}

TEST_CASE("disjoint-support packets have zero overlap") {
  const int n = 101;
  std::vector<cxd> a(n, cxd{}), b(n, cxd{});
  for (int i = 10; i < 30; ++i) a[i] = 1.0;
  for (int i = 60; i < 80; ++i) b[i] = 1.0;
  const auto fa = WavePacket::sampled(0, 0.1, a);
  const auto fb = WavePacket::sampled(0, 0.1, b);
  CHECK(std::abs(overlap(fa, fb)) == 0.0);
}

TEST_CASE("unnormalized packets are rejected") {
  std::vector<cxd> a(64, cxd{0.5, 0.0});
  const auto f = WavePacket::sampled(0, 0.1, a, /*renormalize=*/false);
  const auto g = WavePacket::gaussian(0, 1);
  CHECK_THROWS_AS(overlap(f, g), std::invalid_argument);
}

TEST_CASE("identical sets give the identity beam splitter") {
  std::mt19937 rng(2);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_set(rng);
    const auto r = bs_matrix(s, s);
    CHECK(std::abs(r.r31 - 1.0) < 1e-14);
    CHECK(std::abs(r.r42 - 1.0) < 1e-14);
    CHECK(std::abs(r.r32) < 1e-14);
    CHECK(std::abs(r.r41) < 1e-14);
  }
}

TEST_CASE("phi0 = 0, phi1 = pi/4 gives the symmetric splitter") {
  const auto r = bs_matrix(ControlSet(0, 0, 0), ControlSet(kPi / 4, 0, 0));
  const double h = std::sqrt(0.5);
  CHECK(std::abs(r.r31 - h) < 1e-15);
  CHECK(std::abs(r.r32 + h) < 1e-15);
  CHECK(std::abs(r.r41 - h) < 1e-15);
  CHECK(std::abs(r.r42 - h) < 1e-15);
}

TEST_CASE("complementary release exchanges the ports") {
  std::mt19937 rng(8);
  for (int i = 0; i < 50; ++i) {
    const auto s0 = random_set(rng);
    const auto r = bs_matrix(s0, complementary(s0));
    CHECK(std::abs(r.r31) < 1e-14);
    CHECK(std::abs(std::abs(r.r32) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(r.r41) - 1.0) < 1e-14);
    CHECK(std::abs(r.r42) < 1e-14);
  }
}

TEST_CASE("the beam splitter is unitary for 1000 random draws") {
  std::mt19937 rng(3);
  double worst = 0;
  for (int i = 0; i < 1000; ++i)
    worst = std::max(
        worst, bs_matrix(random_set(rng), random_set(rng)).unitarity_residual());
  CHECK(worst < 1e-12);
}

TEST_CASE("coalescence amplitude vanishes when the splitter does not mix") {
  CHECK(std::abs(coalescence_amplitude(ControlSet(0, 0, 0),
                                       ControlSet(0, 0, 0), 1.0)) == 0.0);
}

TEST_CASE("full overlap at the symmetric splitter gives |amp|^2 = 1/2") {
  const auto amp =
      coalescence_amplitude(ControlSet(0, 0, 0), ControlSet(kPi / 4, 0, 0), 1.0);
  CHECK(std::norm(amp) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("coalescence amplitude rejects |s| > 1 and non-finite overlaps") {
  CHECK_THROWS_AS(
      coalescence_amplitude(ControlSet(0, 0, 0), ControlSet(0.3, 0, 0), 1.5),
      std::invalid_argument);
  CHECK_THROWS_AS(coalescence_probs(ControlSet(0, 0, 0), ControlSet(0.3, 0, 0),
                                    cxd(std::nan(""), 0.0)),
                  std::invalid_argument);
}

TEST_CASE("sampled packets on different grids are rejected") {
  std::vector<cxd> a(64, cxd{1.0, 0.0}), b(64, cxd{1.0, 0.0});
  const auto fa = WavePacket::sampled(0.0, 0.1, a);
  const auto fb = WavePacket::sampled(0.5, 0.1, b);
  CHECK_THROWS_AS(overlap(fa, fb), std::invalid_argument);
}

TEST_CASE("symmetric splitter statistics at s = 1 and s = 0") {
  const ControlSet s0(0, 0, 0), s1(kPi / 4, 0, 0);
  const auto full = coalescence_probs(s0, s1, 1.0);
  CHECK(full.p_coal1 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(full.p_coal2 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(full.p_noncoal == doctest::Approx(0.0).epsilon(1e-14));
  const auto none = coalescence_probs(s0, s1, 0.0);
  CHECK(none.p_coal1 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(none.p_coal2 == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(none.p_noncoal == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("phase-controlled coalescence at phi0 = phi1 = pi/4") {
  // chi20 - chi21 - chi30 + chi31 = pi/2 with s = 0
  const ControlSet s0(kPi / 4, kPi / 2, 0.0), s1(kPi / 4, 0.0, 0.0);
  const auto st = coalescence_probs(s0, s1, 0.0);
  CHECK(st.p_coal1 == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("probabilities close to one for random parameters") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> mag(0, 1), ph(0, 2 * kPi);
  for (int i = 0; i < 500; ++i) {
    const auto st = coalescence_probs(random_set(rng), random_set(rng),
                                      std::polar(mag(rng), ph(rng)));
    CHECK(st.p_coal1 >= 0.0);
    CHECK(st.p_coal1 <= 1.0);
    CHECK(st.p_coal2 >= 0.0);
    CHECK(st.p_coal2 <= 1.0);
    CHECK(st.p_noncoal >= 0.0);
    CHECK(st.p_noncoal <= 1.0);
    CHECK(st.p_coal1 + st.p_coal2 + st.p_noncoal ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::norm(st.amp_coal1) == doctest::Approx(st.p_coal1).epsilon(1e-12));
  }
}

TEST_CASE("gaussian noncoalescence closed form") {
  CHECK(noncoal_gaussian(0.0, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(noncoal_gaussian(0.0, 3.0, 1.0) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(noncoal_gaussian(10.0, 1.0, 1.0) ==
        doctest::Approx(0.5).epsilon(1e-10));
  CHECK_THROWS_AS(noncoal_gaussian(1.0, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(noncoal_gaussian(1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("gaussian closed form agrees with the general statistics") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> sep(0, 6), wid(0.3, 3);
  for (int i = 0; i < 200; ++i) {
    const double a = sep(rng), d1 = wid(rng), d2 = wid(rng);
    const cxd s =
        overlap(WavePacket::gaussian(0, d1), WavePacket::gaussian(a, d2));
    const auto st =
        coalescence_probs(ControlSet(0, 0, 0), ControlSet(kPi / 4, 0, 0), s);
    CHECK(st.p_noncoal ==
          doctest::Approx(noncoal_gaussian(a, d1, d2)).epsilon(1e-10));
  }
}

TEST_CASE("hom scan over separation reproduces the Mandel dip") {
  HomScanParams p;
  const auto table = hom_scan(ScanAxis::Separation, -5, 5, 101, p);
  REQUIRE(table.size() == 101);
  // even in a, minimum 0 at a = 0, monotone away from the dip
  CHECK(table[50].x == doctest::Approx(0.0));
  CHECK(table[50].p_noncoal < 1e-12);
  for (int i = 0; i < 50; ++i)
    CHECK(table[i].p_noncoal ==
          doctest::Approx(table[100 - i].p_noncoal).epsilon(1e-12));
  for (int i = 50; i < 100; ++i)
    CHECK(table[i + 1].p_noncoal >= table[i].p_noncoal - 1e-14);
}

TEST_CASE("hom scan dashed case: delta1 = 3 delta2 keeps a 0.2 floor at a = 0") {
  HomScanParams p;
  p.delta1 = 3.0;
  p.delta2 = 1.0;
  const auto table = hom_scan(ScanAxis::Separation, 0, 0, 1, p);
  CHECK(table[0].p_noncoal == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("hom scan over the width ratio dips to zero at equal widths") {
  HomScanParams p;
  const auto table = hom_scan(ScanAxis::WidthRatio, 0.25, 4.0, 76, p);
  double best = 1, best_x = 0;
  for (const auto& pt : table)
    if (pt.p_noncoal < best) {
      best = pt.p_noncoal;
      best_x = pt.x;
    }
  CHECK(best < 1e-12);
  CHECK(best_x == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hom scan rejects empty ranges") {
  HomScanParams p;
  CHECK_THROWS_AS(hom_scan(ScanAxis::Separation, 1, 0, 11, p),
                  std::invalid_argument);
  CHECK_THROWS_AS(hom_scan(ScanAxis::Separation, 0, 1, 0, p),
                  std::invalid_argument);
}

TEST_CASE("fock oracle: identity splitter never coalesces") {
  const ModePair modes;
  const auto [f1, f2] = modes.with_overlap(0.3);
  const auto st = fock_oracle(bs_matrix(ControlSet(0.2, 0.5, 1.0),
                                        ControlSet(0.2, 0.5, 1.0)),
                              f1, f2);
  CHECK(st.p_noncoal == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(st.p_coal1 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fock oracle reproduces the closed form at the symmetric splitter") {
  const ControlSet s0(0, 0, 0), s1(kPi / 4, 0, 0);
  const ModePair modes;
  const auto [f1, f2] = modes.with_overlap(1.0);  // identical packets
  const auto st = fock_oracle(bs_matrix(s0, s1), f1, f2);
  CHECK(st.p_coal1 == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(st.p_coal2 == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(st.p_noncoal == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("fock oracle at s = 0 factorizes into independent splits") {
  std::mt19937 rng(31);
  const ModePair modes;
  for (int i = 0; i < 20; ++i) {
    const auto r = bs_matrix(random_set(rng), random_set(rng));
    const auto [f1, f2] = modes.with_overlap(0.0);
    const auto st = fock_oracle(r, f1, f2);
    const double want = std::norm(r.r31) * std::norm(r.r42) +
                        std::norm(r.r32) * std::norm(r.r41);
    CHECK(st.p_noncoal == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("fock oracle matches closed-form statistics on random draws") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> mag(0, 1), ph(0, 2 * kPi);
  const ModePair modes;
  for (int i = 0; i < 300; ++i) {
    const auto s0 = random_set(rng), s1 = random_set(rng);
    const cxd want_s = std::polar(mag(rng), ph(rng));
    const auto [f1, f2] = modes.with_overlap(want_s);
    const auto oracle = fock_oracle(bs_matrix(s0, s1), f1, f2);
    CHECK(std::abs(oracle.s - want_s) < 1e-10);
    const auto closed = coalescence_probs(s0, s1, oracle.s);
    CHECK(std::abs(closed.p_coal1 - oracle.p_coal1) < 1e-10);
    CHECK(std::abs(closed.p_coal2 - oracle.p_coal2) < 1e-10);
    CHECK(std::abs(closed.p_noncoal - oracle.p_noncoal) < 1e-10);
    CHECK(std::abs(std::abs(closed.amp_coal1) - std::abs(oracle.amp_coal1)) <
          1e-12);
    CHECK(oracle.p_coal1 + oracle.p_coal2 + oracle.p_noncoal ==
          doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("gaussian fock oracle path agrees with sampled packets") {
  const ControlSet s0(0.2, 1.0, 0.3), s1(1.1, 0.4, 2.0);
  const auto r = bs_matrix(s0, s1);
  const auto g1 = WavePacket::gaussian(0.0, 1.0);
  const auto g2 = WavePacket::gaussian(1.3, 1.0);
  const auto st = fock_oracle(r, g1, g2);
  const auto closed = coalescence_probs(s0, s1, overlap(g1, g2));
  CHECK(st.p_noncoal == doctest::Approx(closed.p_noncoal).epsilon(1e-10));
}
