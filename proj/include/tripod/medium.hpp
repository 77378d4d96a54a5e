#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tripod/field.hpp"
#include "tripod/schedule.hpp"

namespace tripod {

// Medium and discretization parameters.  The collective coupling kappa is
// active on [sample_begin, sample_end); the rest of the grid is vacuum.
struct MediumParams {
  double kappa = 1.0;
  double c = 1.0;
  double sample_begin = 0.0;
  double sample_end = 0.0;
  Grid grid;
  double dt = 0.0;          // 0: dz/c, which makes the advection an exact shift
  double edge_width = 0.0;  // 0: sharp sample edges

  double time_step() const { return dt > 0 ? dt : grid.dz / c; }
  double cfl() const { return dt > 0 ? c * dt / grid.dz : 1.0; }
  double kappa_at(double z) const;
  void validate() const;
};

// Local (per-cell) part of the equations of motion, advection excluded:
//   du   = i kappa s_a
//   ds_a = i kappa u + i (Omega2 s_c + Omega3 s_d)
//   ds_c = i conj(Omega2) s_a
//   ds_d = i conj(Omega3) s_a
struct LocalDeriv {
  std::vector<cxd> du, ds_a, ds_c, ds_d;
};

LocalDeriv scaled_rhs(const FieldState& state, cxd omega2, cxd omega3,
                      std::span<const double> kappa_profile);

struct StageWindow {
  std::string label;
  double t_begin = 0, t_end = 0;
};

// Normalized released temporal mode of one stage window.
struct OutputMode {
  std::string stage;
  double t0 = 0, dt = 0;
  std::vector<cxd> amp;   // unit L2 norm in time (zero when nothing released)
  double fraction = 0;    // released fraction within the window
};

struct RunResult {
  std::vector<double> t, flux, norm, theta, phi;
  std::vector<StageWindow> stages;
  std::vector<OutputMode> modes;
  double initial_norm = 0;
  double final_norm = 0;
  double outflow_total = 0;      // \int c |u(z_out)|^2 dt over the run
  double closure_residual = 0;   // |final + outflow - initial| / initial
  std::vector<FieldState> snapshots;

  const OutputMode& mode(const std::string& stage) const;
};

/// Released fraction of the initial norm within the named stage window.
double released_fraction(const RunResult& r, const std::string& stage_label);

// Integrates the scaled equations of motion by Strang splitting: a half-step
// exact per-cell update (matrix exponential of the local Hermitian system),
// an exact one-cell shift of u when dt = dz/c (first-order upwind otherwise),
// and a second half-step.  Per-cell updates are unitary, so the discrete
// excitation norm changes only through boundary outflow.
class Solver {
 public:
  Solver(MediumParams params, ControlSchedule schedule);

  const MediumParams& params() const { return params_; }
  const ControlSchedule& schedule() const { return schedule_; }

  /// One step of size params().time_step().
  FieldState step(const FieldState& state) const;

  struct RunPlan {
    std::vector<StageWindow> stages;
    double t_end = 0;
    std::vector<double> snapshot_times;
    double closure_tol = 1e-6;
  };

  // Full timeline: records flux, norm and mixing angles per step, splits the
  // outflow into stage windows and extracts the released temporal modes.
  RunResult run(FieldState state, const RunPlan& plan) const;

 private:
  void half_update(FieldState& s, double t_sample) const;
  cxd advect(FieldState& s) const;
  void advance(FieldState& s, cxd& outflow) const;
  ControlPair controls_at(double t) const;

  MediumParams params_;
  ControlSchedule schedule_;
  std::vector<double> kappa_;
  double dt_;
  bool exact_shift_;

  // local propagators for the most recent (dt/2, controls) pair, per kappa
  mutable ControlPair cached_controls_{};
  mutable bool cache_valid_ = false;
  mutable std::map<double, std::array<cxd, 16>> propagators_;
};

}  // namespace tripod
