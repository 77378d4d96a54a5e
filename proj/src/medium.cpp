#include "tripod/medium.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tripod {

namespace {

double smooth01(double x, double e) {
  if (x <= -0.5 * e) return 0.0;
  if (x >= 0.5 * e) return 1.0;
  const double s = std::sin(0.5 * kPi * (x / e + 0.5));
  return s * s;
}

std::array<cxd, 16> local_propagator(double kappa, cxd o2, cxd o3, double h) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 1) = kappa;
  m(1, 0) = kappa;
  m(1, 2) = o2;
  m(2, 1) = std::conj(o2);
  m(1, 3) = o3;
  m(3, 1) = std::conj(o3);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
  Eigen::Vector4cd phases;
  for (int k = 0; k < 4; ++k)
    phases(k) = std::polar(1.0, h * es.eigenvalues()(k));
  const Eigen::Matrix4cd u = es.eigenvectors() * phases.asDiagonal() *
                             es.eigenvectors().adjoint();
  std::array<cxd, 16> out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[4 * r + c] = u(r, c);
  return out;
}

}  // namespace

double MediumParams::kappa_at(double z) const {
  if (sample_end <= sample_begin) return 0.0;
  if (edge_width > 0)
    return kappa * smooth01(z - sample_begin, edge_width) *
           smooth01(sample_end - z, edge_width);
  return (z >= sample_begin && z < sample_end) ? kappa : 0.0;
}

void MediumParams::validate() const {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  if (!(c > 0)) throw std::invalid_argument("signal speed must be positive");
  if (grid.n < 2) throw std::invalid_argument("grid needs at least two cells");
  if (!(grid.dz > 0)) throw std::invalid_argument("dz must be positive");
  if (!(time_step() > 0)) throw std::invalid_argument("dt must be positive");
  if (cfl() > 1.0 + 1e-12)
    throw std::invalid_argument("CFL number c*dt/dz exceeds 1");
  if (edge_width < 0) throw std::invalid_argument("edge width must be >= 0");
}

LocalDeriv scaled_rhs(const FieldState& state, cxd omega2, cxd omega3,
                      std::span<const double> kappa_profile) {
  const std::size_t n = state.u.size();
  if (kappa_profile.size() != n || state.s_a.size() != n ||
      state.s_c.size() != n || state.s_d.size() != n)
    throw std::invalid_argument("grid size mismatch");
  if (!state.finite())
    throw std::runtime_error("numeric fault: non-finite field state");

  const cxd i1{0.0, 1.0};
  LocalDeriv d;
  d.du.resize(n);
  d.ds_a.resize(n);
  d.ds_c.resize(n);
  d.ds_d.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = kappa_profile[i];
    d.du[i] = i1 * k * state.s_a[i];
    d.ds_a[i] = i1 * (k * state.u[i] + omega2 * state.s_c[i] +
                      omega3 * state.s_d[i]);
    d.ds_c[i] = i1 * std::conj(omega2) * state.s_a[i];
    d.ds_d[i] = i1 * std::conj(omega3) * state.s_a[i];
  }
  return d;
}

const OutputMode& RunResult::mode(const std::string& stage) const {
  for (const auto& m : modes)
    if (m.stage == stage) return m;
  throw std::out_of_range("unknown stage label: " + stage);
}

double released_fraction(const RunResult& r, const std::string& stage_label) {
  const StageWindow* win = nullptr;
  for (const auto& s : r.stages)
    if (s.label == stage_label) win = &s;
  if (!win) throw std::out_of_range("unknown stage label: " + stage_label);
  if (r.t.size() < 2) return 0.0;
  const double dt = r.t[1] - r.t[0];
  double acc = 0.0;
  for (std::size_t k = 0; k < r.t.size(); ++k)
    if (r.t[k] >= win->t_begin && r.t[k] < win->t_end) acc += r.flux[k] * dt;
  return acc / r.initial_norm;
}

Solver::Solver(MediumParams params, ControlSchedule schedule)
    : params_(params), schedule_(std::move(schedule)) {
  params_.validate();
  dt_ = params_.time_step();
  exact_shift_ = std::abs(params_.cfl() - 1.0) < 1e-12;
  kappa_.resize(params_.grid.n);
  for (int i = 0; i < params_.grid.n; ++i)
    kappa_[i] = params_.kappa_at(params_.grid.z(i));
}

ControlPair Solver::controls_at(double t) const {
  return schedule_.rabi_at(
      std::clamp(t, schedule_.t_begin(), schedule_.t_end()));
}

void Solver::half_update(FieldState& s, double t_sample) const {
  const ControlPair om = controls_at(t_sample);
  if (!cache_valid_ || !(om == cached_controls_)) {
    propagators_.clear();
    cached_controls_ = om;
    cache_valid_ = true;
  }
  const double h = 0.5 * dt_;
  const int n = params_.grid.n;
  for (int i = 0; i < n; ++i) {
    const cxd u = s.u[i], sa = s.s_a[i], sc = s.s_c[i], sd = s.s_d[i];
    if (u == cxd{} && sa == cxd{} && sc == cxd{} && sd == cxd{}) continue;
    auto it = propagators_.find(kappa_[i]);
    if (it == propagators_.end())
      it = propagators_
               .emplace(kappa_[i],
                        local_propagator(kappa_[i], om.omega2, om.omega3, h))
               .first;
    const auto& p = it->second;
    s.u[i] = p[0] * u + p[1] * sa + p[2] * sc + p[3] * sd;
    s.s_a[i] = p[4] * u + p[5] * sa + p[6] * sc + p[7] * sd;
    s.s_c[i] = p[8] * u + p[9] * sa + p[10] * sc + p[11] * sd;
    s.s_d[i] = p[12] * u + p[13] * sa + p[14] * sc + p[15] * sd;
  }
}

cxd Solver::advect(FieldState& s) const {
  const int n = params_.grid.n;
  if (exact_shift_) {
    const cxd out = s.u[n - 1];
    for (int i = n - 1; i > 0; --i) s.u[i] = s.u[i - 1];
    s.u[0] = cxd{};
    return out;
  }
  // first-order upwind; outflow accounting is approximate in this mode
  const double nu = params_.cfl();
  const cxd out = s.u[n - 1] * std::sqrt(nu);
  for (int i = n - 1; i > 0; --i) s.u[i] += nu * (s.u[i - 1] - s.u[i]);
  s.u[0] *= (1.0 - nu);
  return out;
}

void Solver::advance(FieldState& s, cxd& outflow) const {
  const double t = s.t;
  half_update(s, t + 0.25 * dt_);
  outflow = advect(s);
  half_update(s, t + 0.75 * dt_);
  s.t = t + dt_;
}

FieldState Solver::step(const FieldState& state) const {
  FieldState s = state;
  cxd out;
  advance(s, out);
  return s;
}

RunResult Solver::run(FieldState state, const RunPlan& plan) const {
  if (!state.finite())
    throw std::runtime_error("numeric fault: non-finite initial state");
  if (!(state.grid == params_.grid))
    throw std::invalid_argument("state grid does not match the medium grid");

  RunResult r;
  r.initial_norm = excitation_norm(state);
  r.stages = plan.stages;

  std::vector<double> snaps = plan.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t snap_idx = 0;

  const long n_steps = std::lround((plan.t_end - state.t) / dt_);
  if (n_steps <= 0) throw std::invalid_argument("empty run window");
  r.t.reserve(n_steps);
  r.flux.reserve(n_steps);
  r.norm.reserve(n_steps);
  r.theta.reserve(n_steps);
  r.phi.reserve(n_steps);

  struct StageTrace {
    double t0 = 0;
    bool started = false;
    std::vector<cxd> amp;
  };
  std::vector<StageTrace> traces(plan.stages.size());

  AngleState ang;
  {
    const auto om = controls_at(state.t);
    ang = mixing_angles(om.omega2, om.omega3, params_.kappa, nullptr);
  }
  ControlPair prev_om = controls_at(state.t);

  for (long k = 0; k < n_steps; ++k) {
    const double t = state.t;
    while (snap_idx < snaps.size() && t >= snaps[snap_idx] - 0.5 * dt_) {
      r.snapshots.push_back(state);
      ++snap_idx;
    }

    const auto om = controls_at(t);
    AngleState next = mixing_angles(om.omega2, om.omega3, params_.kappa, &ang);
    // chi accumulates only along continuous control evolution; a phase jump
    // while a control is off is a re-parameterization, not dynamics
    if (std::abs(om.omega2) > 0 && std::abs(prev_om.omega2) > 0) {
      const double sm = std::sin(0.5 * (ang.theta + next.theta));
      next.chi = ang.chi +
                 sm * sm * std::remainder(next.chi2 - ang.chi2, 2 * kPi);
    }
    ang = next;
    prev_om = om;

    cxd out;
    advance(state, out);

    const double flux = params_.c * std::norm(out);
    const double nrm = excitation_norm(state);
    if (!std::isfinite(nrm))
      throw std::runtime_error("numeric fault: diverged at t = " +
                               std::to_string(t));
    r.t.push_back(t);
    r.flux.push_back(flux);
    r.norm.push_back(nrm);
    r.theta.push_back(ang.theta);
    r.phi.push_back(ang.phi);
    r.outflow_total += flux * dt_;

    for (std::size_t w = 0; w < plan.stages.size(); ++w) {
      if (t >= plan.stages[w].t_begin && t < plan.stages[w].t_end) {
        if (!traces[w].started) {
          traces[w].t0 = t;
          traces[w].started = true;
        }
        traces[w].amp.push_back(out);
        break;
      }
    }
  }
  while (snap_idx < snaps.size()) {
    r.snapshots.push_back(state);
    ++snap_idx;
  }

  r.final_norm = excitation_norm(state);
  r.closure_residual =
      std::abs(r.final_norm + r.outflow_total - r.initial_norm) /
      r.initial_norm;
  if (r.closure_residual > plan.closure_tol)
    throw std::runtime_error(
        "numeric fault: excitation norm + outflow drifted by " +
        std::to_string(r.closure_residual) + " (tolerance " +
        std::to_string(plan.closure_tol) + ")");

  for (std::size_t w = 0; w < plan.stages.size(); ++w) {
    OutputMode m;
    m.stage = plan.stages[w].label;
    m.t0 = traces[w].t0;
    m.dt = dt_;
    m.amp = std::move(traces[w].amp);
    double e = 0.0;
    for (const cxd& a : m.amp) e += std::norm(a);
    e *= dt_;
    m.fraction = params_.c * e / r.initial_norm;
    if (e > 1e-300) {
      const double scale = 1.0 / std::sqrt(e);
      for (cxd& a : m.amp) a *= scale;
    }
    r.modes.push_back(std::move(m));
  }
  return r;
}

}  // namespace tripod
