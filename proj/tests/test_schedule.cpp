#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "tripod/field.hpp"
#include "tripod/schedule.hpp"

using namespace tripod;

namespace {

ControlSchedule storage_like() {
  // hold at (2, 0), ramp off, dark, ramp on to a rotated pair
  ControlSchedule s(0.0, {2.0, 0.0});
  s.hold_until(1.0, {2.0, 0.0});
  s.blend_to(2.0, {});
  s.hold_until(3.0, {});
  s.blend_to(4.0, {std::polar(1.5, 0.4), std::polar(1.5, -0.1)});
  s.hold_until(5.0, {std::polar(1.5, 0.4), std::polar(1.5, -0.1)});
  return s;
}

}  // namespace

TEST_CASE("constant segment evaluates to its value everywhere") {
  ControlSchedule s(0.0, {3.0, 0.0});
  s.hold_until(2.0, {3.0, 0.0});
  for (double t : {0.0, 0.7, 1.3, 2.0}) {
    const auto p = s.rabi_at(t);
    CHECK(p.omega2 == cxd(3.0, 0.0));
    CHECK(p.omega3 == cxd(0.0, 0.0));
  }
}

TEST_CASE("segment boundaries belong to the later segment") {
  ControlSchedule s(0.0, {1.0, 0.0});
  s.hold_until(1.0, {1.0, 0.0});
  s.hold_until(2.0, {5.0, 0.0});  // square jump at t = 1
  CHECK(s.rabi_at(1.0).omega2 == cxd(5.0, 0.0));
  CHECK(s.rabi_at(1.0 - 1e-12).omega2 == cxd(1.0, 0.0));
}

TEST_CASE("cosine ramp from omega to zero passes omega/2 at the midpoint") {
  ControlSchedule s(0.0, {4.0, 0.0});
  s.blend_to(2.0, {});
  CHECK(s.rabi_at(1.0).omega2.real() == doctest::Approx(2.0).epsilon(1e-14));
  // smooth ends: the ramp starts and finishes flat
  CHECK(std::abs(s.rabi_at(0.02).omega2 - cxd(4.0, 0)) < 1e-2);
  CHECK(std::abs(s.rabi_at(1.98).omega2) < 1e-2);
  CHECK(std::abs(s.rabi_at(2.0).omega2) == 0.0);
}

TEST_CASE("lookups outside the span are rejected") {
  const auto s = storage_like();
  CHECK_THROWS_AS(s.rabi_at(-0.1), std::out_of_range);
  CHECK_THROWS_AS(s.rabi_at(5.1), std::out_of_range);
  CHECK_NOTHROW(s.rabi_at(5.0));
}

TEST_CASE("control pair realizes a set at given amplitude") {
  const auto p = control_pair(ControlSet(kPi / 4, 0.5, -0.3), 2.0);
  CHECK(std::abs(p.omega2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(p.omega3) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::arg(p.omega2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::arg(p.omega3) == doctest::Approx(-0.3).epsilon(1e-14));
}

TEST_CASE("amplitude ramps at a fixed set are proportional") {
  const auto s = storage_like();
  CHECK(s.proportional_over(0.0, 3.0));       // hold + ramp off + dark
  CHECK(s.proportional_over(3.0, 5.0));       // ramp on + hold, one set
  CHECK_FALSE(s.proportional_over(0.0, 5.0)); // two different sets
}

TEST_CASE("a blend that rotates the ratio is flagged non-proportional") {
  ControlSchedule s(0.0, {1.0, 1.0});
  s.blend_to(1.0, {1.0, cxd(0.0, 1.0)});  // omega3 phase rotates
  CHECK_FALSE(s.proportional_over(0.0, 1.0));

  ControlSchedule r(0.0, {1.0, 0.5});
  r.blend_to(1.0, {2.0, 0.25});  // ratio drifts from 0.5 to 0.125
  CHECK_FALSE(r.proportional_over(0.0, 1.0));

  ControlSchedule ok(0.0, {1.0, 0.5});
  ok.blend_to(1.0, {2.0, 1.0});  // common rescaling keeps the ratio
  CHECK(ok.proportional_over(0.0, 1.0));
}

TEST_CASE("builder rejects non-advancing segments") {
  ControlSchedule s(0.0, {1.0, 0.0});
  s.hold_until(1.0, {1.0, 0.0});
  CHECK_THROWS_AS(s.hold_until(1.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(s.blend_to(0.5, {}), std::invalid_argument);
}

TEST_CASE("theta stays in range over a whole schedule and hits pi/2 only off") {
  const auto s = storage_like();
  AngleState ang;
  for (int i = 0; i <= 2000; ++i) {
    const double t = 5.0 * i / 2000;
    const auto p = s.rabi_at(t);
    ang = mixing_angles(p.omega2, p.omega3, 1.7, &ang);
    CHECK(ang.theta >= 0.0);
    CHECK(ang.theta <= kPi / 2);
    const double omega = std::hypot(std::abs(p.omega2), std::abs(p.omega3));
    if (omega > 1e-12)
      CHECK(ang.theta < kPi / 2);
    else
      CHECK(std::abs(ang.theta - kPi / 2) < 1e-12);
  }
}

TEST_CASE("square segments jump at their start") {
  ControlSchedule s(0.0, {1.0, 0.0});
  s.blend_to(1.0, {}, RampShape::Square);
  CHECK(std::abs(s.rabi_at(0.0).omega2) == 0.0);
  CHECK(std::abs(s.rabi_at(0.99).omega2) == 0.0);
}
