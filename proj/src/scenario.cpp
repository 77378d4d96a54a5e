#include "tripod/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "tripod/polariton.hpp"

namespace tripod {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.12g", v);
  return b;
}

// --- strict key checking ------------------------------------------------

int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

void check_keys(const ordered_json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string key = it.key();
    if (std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return key == k; }))
      continue;
    const char* best = *allowed.begin();
    int best_d = levenshtein(key, best);
    for (const char* k : allowed) {
      const int d = levenshtein(key, k);
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    throw ConfigError("unknown key \"" + key + "\" in " + path +
                      "; nearest valid key is \"" + best + "\"");
  }
}

double get_num(const ordered_json& obj, const std::string& path,
               const char* key) {
  if (!obj.contains(key))
    throw ConfigError("missing required key \"" + std::string(key) + "\" in " +
                      path);
  if (!obj[key].is_number())
    throw ConfigError("key \"" + std::string(key) + "\" in " + path +
                      " must be a number");
  return obj[key].get<double>();
}

double get_num_or(const ordered_json& obj, const std::string& path,
                  const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw ConfigError("key \"" + std::string(key) + "\" in " + path +
                      " must be a number");
  return obj[key].get<double>();
}

// --- group-velocity model used for derived timings ----------------------

struct Kinematics {
  double c, kappa, omega, ramp;
  double vg;      // c cos^2(theta) at full drive
  double d_ramp;  // displacement accumulated over one switching ramp

  Kinematics(const MediumParams& m, double omega_high, double ramp_)
      : c(m.c), kappa(m.kappa), omega(omega_high), ramp(ramp_) {
    vg = c * omega * omega / (omega * omega + kappa * kappa);
    // Simpson over the cos^2 ramp from full drive to zero
    const int n = 64;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double x = static_cast<double>(i) / n;
      const double co = std::cos(0.5 * kPi * x);
      const double om = omega * co * co;
      const double v = c * om * om / (om * om + kappa * kappa);
      acc += v * ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    d_ramp = ramp * acc / (3.0 * n);
  }

  double cross_time(const MediumParams& m, double z0) const {
    return (m.sample_begin - z0) / c;
  }
  double stored_center(const MediumParams& m, double z0, double off) const {
    return m.sample_begin + vg * (off - ramp - cross_time(m, z0)) + d_ramp;
  }
};

}  // namespace

Scenario parse_scenario(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("syntax error: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("scenario document must be an object");
  check_keys(doc, "scenario",
             {"schema_version", "medium", "controls", "storage", "packets",
              "release", "t_end", "closure_tol", "sweep", "output"});
  if (doc.contains("schema_version") && doc["schema_version"] != 1)
    throw ConfigError("unsupported schema_version (expected 1)");

  Scenario s;

  if (!doc.contains("medium")) throw ConfigError("missing required key \"medium\"");
  const auto& med = doc["medium"];
  check_keys(med, "medium",
             {"kappa", "c", "sample", "z", "cells", "dt", "edge_width"});
  s.medium.kappa = get_num(med, "medium", "kappa");
  s.medium.c = get_num_or(med, "medium", "c", 1.0);
  auto get_range = [&](const char* key) -> std::pair<double, double> {
    if (!med.contains(key))
      throw ConfigError(std::string("missing required key \"") + key +
                        "\" in medium");
    const auto& v = med[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ConfigError(std::string("key \"") + key +
                        "\" in medium must be a [begin, end] number pair");
    return {v[0].get<double>(), v[1].get<double>()};
  };
  std::tie(s.medium.sample_begin, s.medium.sample_end) = get_range("sample");
  const auto [z_min, z_max] = get_range("z");
  if (!(z_max > z_min)) throw ConfigError("medium.z must satisfy z[0] < z[1]");
  const double cells = get_num_or(med, "medium", "cells", 4096);
  if (cells < 2 || cells != std::floor(cells))
    throw ConfigError("medium.cells must be an integer >= 2");
  s.medium.grid.n = static_cast<int>(cells);
  s.medium.grid.z_min = z_min;
  s.medium.grid.dz = (z_max - z_min) / s.medium.grid.n;
  s.medium.dt = get_num_or(med, "medium", "dt", 0.0);
  s.medium.edge_width = get_num_or(med, "medium", "edge_width", 0.0);
  if (!(s.medium.kappa > 0)) throw ConfigError("medium.kappa must be positive");
  if (!(s.medium.c > 0)) throw ConfigError("medium.c must be positive");
  if (s.medium.dt < 0) throw ConfigError("medium.dt must be >= 0");
  if (s.medium.cfl() > 1.0 + 1e-12)
    throw ConfigError("CFL number c*dt/dz exceeds 1");
  if (!(s.medium.sample_end >= s.medium.sample_begin))
    throw ConfigError("medium.sample must satisfy begin <= end");

  if (doc.contains("controls")) {
    const auto& con = doc["controls"];
    check_keys(con, "controls", {"omega_high", "ramp", "ramp_shape"});
    s.omega_high = get_num_or(con, "controls", "omega_high", s.medium.kappa);
    // default switching time scales with the gap so slow ramps stay adiabatic
    s.ramp = get_num_or(con, "controls", "ramp", 16.0 / s.medium.kappa);
    if (con.contains("ramp_shape")) {
      const std::string shape = con["ramp_shape"].get<std::string>();
      if (shape == "cos2")
        s.ramp_shape = RampShape::Cos2;
      else if (shape == "square")
        s.ramp_shape = RampShape::Square;
      else
        throw ConfigError("controls.ramp_shape must be \"cos2\" or \"square\"");
    }
  } else {
    s.omega_high = s.medium.kappa;
    s.ramp = 16.0 / s.medium.kappa;
  }
  if (!(s.omega_high > 0)) throw ConfigError("controls.omega_high must be positive");
  if (!(s.ramp > 0)) throw ConfigError("controls.ramp must be positive");

  if (!doc.contains("packets") || !doc["packets"].is_array() ||
      doc["packets"].empty())
    throw ConfigError("at least one packet is required");
  if (doc["packets"].size() > 2)
    throw ConfigError("at most two packets are supported");
  for (std::size_t i = 0; i < doc["packets"].size(); ++i) {
    const auto& pk = doc["packets"][i];
    const std::string path = "packets[" + std::to_string(i) + "]";
    check_keys(pk, path, {"center", "width"});
    PacketSpec ps;
    ps.center = get_num(pk, path, "center");
    ps.width = get_num(pk, path, "width");
    if (!(ps.width > 0)) throw ConfigError(path + ".width must be positive");
    s.packets.push_back(ps);
  }

  auto parse_set = [&](const ordered_json& obj, const std::string& path) {
    return ControlSet(get_num(obj, path, "phi"),
                      get_num_or(obj, path, "chi2", 0.0),
                      get_num_or(obj, path, "chi3", 0.0));
  };

  const Kinematics kin(s.medium, s.omega_high, s.ramp);

  if (doc.contains("storage")) {
    const auto& sto = doc["storage"];
    if (!sto.is_array() || sto.empty())
      throw ConfigError("storage must be a non-empty array");
    for (std::size_t i = 0; i < sto.size(); ++i) {
      const std::string path = "storage[" + std::to_string(i) + "]";
      check_keys(sto[i], path, {"phi", "chi2", "chi3", "on", "off"});
      StorageStage st;
      st.set = parse_set(sto[i], path);
      st.on = get_num_or(sto[i], path, "on", -1.0);
      st.off = get_num_or(sto[i], path, "off", -1.0);
      s.storage.push_back(st);
    }
  } else {
    s.storage.push_back({ControlSet(0, 0, 0), -1.0, -1.0});
  }
  if (s.storage.size() == 1 && s.packets.size() == 2)
    s.storage.push_back({complementary(s.storage[0].set), -1.0, -1.0});
  if (s.storage.size() != s.packets.size())
    throw ConfigError("storage entries and packets must pair up");
  if (s.packets.size() == 2 &&
      !same_set(complementary(s.storage[0].set), s.storage[1].set, 1e-9))
    throw ConfigError(
        "storage sets for a two-packet run must be mutually complementary "
        "(phi -> pi/2 - phi, chi2 -> chi2 + pi, chi3 unchanged)");

  // derived trap timings where not given
  for (std::size_t k = 0; k < s.storage.size(); ++k) {
    auto& st = s.storage[k];
    if (st.on < 0) st.on = (k == 0) ? 0.0 : s.storage[k - 1].off;
    if (st.off < 0) {
      const double target = s.medium.sample_begin +
                            0.4 * (s.medium.sample_end - s.medium.sample_begin);
      const double rd_begin =
          kin.cross_time(s.medium, s.packets[k].center) +
          (target - s.medium.sample_begin - kin.d_ramp) / kin.vg;
      const double min_off = st.on + (k == 0 ? 1.0 : 2.0) * s.ramp;
      st.off = std::max(rd_begin + s.ramp, min_off);
    }
    const double min_off = st.on + (k == 0 ? 1.0 : 2.0) * s.ramp;
    if (st.off < min_off - 1e-12)
      throw ConfigError("storage[" + std::to_string(k) +
                        "].off leaves no room for the switching ramps");
    if (k > 0 && st.on < s.storage[k - 1].off - 1e-12)
      throw ConfigError("storage windows must not overlap");
  }

  if (!doc.contains("release")) throw ConfigError("missing required key \"release\"");
  {
    const auto& rel = doc["release"];
    check_keys(rel, "release",
               {"phi", "chi2", "chi3", "stage1_on", "stage1_off", "stage2_on",
                "stage2"});
    s.release.set1 = parse_set(rel, "release");
    if (rel.contains("stage2")) {
      check_keys(rel["stage2"], "release.stage2", {"phi", "chi2", "chi3"});
      s.release.stage2_override = parse_set(rel["stage2"], "release.stage2");
    }
    const double last_off = s.storage.back().off;
    const double dst_max = [&] {
      double m = 0;
      for (const auto& p : s.packets) m = std::max(m, p.width * kin.vg / s.medium.c);
      return m;
    }();
    const double exit_time =
        s.ramp +
        (s.medium.sample_end - s.medium.sample_begin + 9.0 * dst_max) / kin.vg +
        (s.medium.grid.z_max() - s.medium.sample_end) / s.medium.c + s.ramp;
    s.release.stage1_on = get_num_or(rel, "release", "stage1_on", last_off + s.ramp);
    s.release.stage1_off = get_num_or(rel, "release", "stage1_off",
                                      s.release.stage1_on + exit_time);
    s.release.stage2_on = get_num_or(rel, "release", "stage2_on",
                                     s.release.stage1_off + s.ramp);
    s.t_end = get_num_or(doc, "scenario", "t_end",
                         s.release.stage2_on + exit_time);
    if (s.release.stage1_on < last_off - 1e-12)
      throw ConfigError("release.stage1_on must not precede the last trap");
    if (s.release.stage1_off < s.release.stage1_on + 2 * s.ramp - 1e-12)
      throw ConfigError("release stage 1 leaves no room for the switching ramps");
    if (s.release.stage2_on < s.release.stage1_off - 1e-12)
      throw ConfigError("release.stage2_on must not precede stage1_off");
    if (s.t_end < s.release.stage2_on + s.ramp - 1e-12)
      throw ConfigError("t_end leaves no room for the stage-2 ramp");
  }

  s.closure_tol = get_num_or(doc, "scenario", "closure_tol", 1e-6);

  if (doc.contains("sweep")) {
    const auto& sw = doc["sweep"];
    check_keys(sw, "sweep", {"axis", "from", "to", "points", "end_to_end"});
    SweepSpec spec;
    if (sw.contains("axis")) spec.axis = sw["axis"].get<std::string>();
    if (spec.axis != "separation")
      throw ConfigError("sweep.axis must be \"separation\"");
    spec.from = get_num(sw, "sweep", "from");
    spec.to = get_num(sw, "sweep", "to");
    const double pts = get_num(sw, "sweep", "points");
    if (pts < 1 || pts != std::floor(pts))
      throw ConfigError("sweep.points must be a positive integer");
    spec.points = static_cast<int>(pts);
    if (sw.contains("end_to_end")) spec.end_to_end = sw["end_to_end"].get<bool>();
    if (s.packets.size() != 2)
      throw ConfigError("a separation sweep needs two packets");
    s.sweep = spec;
  }

  if (doc.contains("output")) {
    const auto& out = doc["output"];
    check_keys(out, "output", {"trace_stride", "mode_stride"});
    s.output.trace_stride =
        static_cast<int>(get_num_or(out, "output", "trace_stride", 1));
    s.output.mode_stride =
        static_cast<int>(get_num_or(out, "output", "mode_stride", 1));
    if (s.output.trace_stride < 1 || s.output.mode_stride < 1)
      throw ConfigError("output strides must be >= 1");
  }
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["medium"] = {{"kappa", s.medium.kappa},
                   {"c", s.medium.c},
                   {"sample", {s.medium.sample_begin, s.medium.sample_end}},
                   {"z", {s.medium.grid.z_min, s.medium.grid.z_max()}},
                   {"cells", s.medium.grid.n},
                   {"dt", s.medium.dt},
                   {"edge_width", s.medium.edge_width}};
  doc["controls"] = {
      {"omega_high", s.omega_high},
      {"ramp", s.ramp},
      {"ramp_shape", s.ramp_shape == RampShape::Cos2 ? "cos2" : "square"}};
  doc["storage"] = ordered_json::array();
  for (const auto& st : s.storage)
    doc["storage"].push_back({{"phi", st.set.phi},
                              {"chi2", st.set.chi2},
                              {"chi3", st.set.chi3},
                              {"on", st.on},
                              {"off", st.off}});
  doc["packets"] = ordered_json::array();
  for (const auto& p : s.packets)
    doc["packets"].push_back({{"center", p.center}, {"width", p.width}});
  doc["release"] = {{"phi", s.release.set1.phi},
                    {"chi2", s.release.set1.chi2},
                    {"chi3", s.release.set1.chi3},
                    {"stage1_on", s.release.stage1_on},
                    {"stage1_off", s.release.stage1_off},
                    {"stage2_on", s.release.stage2_on}};
  if (s.release.stage2_override)
    doc["release"]["stage2"] = {{"phi", s.release.stage2_override->phi},
                                {"chi2", s.release.stage2_override->chi2},
                                {"chi3", s.release.stage2_override->chi3}};
  doc["t_end"] = s.t_end;
  doc["closure_tol"] = s.closure_tol;
  if (s.sweep)
    doc["sweep"] = {{"axis", s.sweep->axis},
                    {"from", s.sweep->from},
                    {"to", s.sweep->to},
                    {"points", s.sweep->points},
                    {"end_to_end", s.sweep->end_to_end}};
  doc["output"] = {{"trace_stride", s.output.trace_stride},
                   {"mode_stride", s.output.mode_stride}};
  return doc.dump(2) + "\n";
}

ControlSchedule build_schedule(const Scenario& s) {
  const auto pair_of = [&](const ControlSet& set) {
    return control_pair(set, s.omega_high);
  };
  const ControlPair off{};
  ControlSchedule sch(0.0, pair_of(s.storage[0].set));

  // storage stage(s)
  sch.hold_until(s.storage[0].off - s.ramp, pair_of(s.storage[0].set));
  sch.blend_to(s.storage[0].off, off, s.ramp_shape);
  for (std::size_t k = 1; k < s.storage.size(); ++k) {
    const auto& st = s.storage[k];
    if (st.on > sch.t_end()) sch.hold_until(st.on, off);
    sch.blend_to(st.on + s.ramp, pair_of(st.set), s.ramp_shape);
    sch.hold_until(st.off - s.ramp, pair_of(st.set));
    sch.blend_to(st.off, off, s.ramp_shape);
  }

  // release stage 1
  if (s.release.stage1_on > sch.t_end()) sch.hold_until(s.release.stage1_on, off);
  sch.blend_to(s.release.stage1_on + s.ramp, pair_of(s.release.set1),
               s.ramp_shape);
  sch.hold_until(s.release.stage1_off - s.ramp, pair_of(s.release.set1));
  sch.blend_to(s.release.stage1_off, off, s.ramp_shape);

  // release stage 2
  if (s.release.stage2_on > sch.t_end()) sch.hold_until(s.release.stage2_on, off);
  sch.blend_to(s.release.stage2_on + s.ramp, pair_of(s.release.stage2_set()),
               s.ramp_shape);
  sch.hold_until(s.t_end + s.medium.time_step(), pair_of(s.release.stage2_set()));
  return sch;
}

std::vector<StageWindow> stage_windows(const Scenario& s) {
  const double last_off = s.storage.back().off;
  return {{"entry", 0.0, last_off},
          {"storage", last_off, s.release.stage1_on},
          {"stage1", s.release.stage1_on, s.release.stage2_on},
          {"stage2", s.release.stage2_on, s.t_end}};
}

Diagnostics validate(const Scenario& s) {
  Diagnostics d;
  d.cfl = s.medium.cfl();

  const auto sch = build_schedule(s);
  const int n = 4000;
  AngleState prev;
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = s.t_end * static_cast<double>(i) / n;
    const auto om = sch.rabi_at(std::min(t, sch.t_end()));
    const AngleState a = mixing_angles(om.omega2, om.omega3, s.medium.kappa,
                                       i ? &prev : nullptr);
    if (i) {
      const double dt = s.t_end / n;
      const double omega_mid =
          0.5 * (std::hypot(std::abs(om.omega2), std::abs(om.omega3)) +
                 std::hypot(std::abs(sch.rabi_at(t - dt).omega2),
                            std::abs(sch.rabi_at(t - dt).omega3)));
      const double gap = std::hypot(omega_mid, s.medium.kappa);
      worst = std::max(worst, std::abs(a.theta - prev.theta) / dt / gap);
    }
    prev = a;
  }
  d.adiabaticity = worst;

  const Kinematics kin(s.medium, s.omega_high, s.ramp);
  double res = 1e300;
  for (const auto& p : s.packets)
    res = std::min(res, p.width * kin.vg / s.medium.c / s.medium.grid.dz);
  d.grid_resolution = res;

  if (d.adiabaticity > 0.1)
    d.warnings.push_back(
        "adiabaticity figure " + fmt(d.adiabaticity) +
        " exceeds 0.1; control switching is too fast for clean storage");
  if (d.grid_resolution < 16)
    d.warnings.push_back("fewer than 16 cells per stored packet width (" +
                         fmt(d.grid_resolution) + "); refine the grid");
  for (std::size_t k = 0; k < s.packets.size(); ++k) {
    const double front =
        (s.medium.sample_begin - s.packets[k].center - 4.5 * s.packets[k].width) /
        s.medium.c;
    const double ready = s.storage[k].on + (k == 0 ? 0.0 : s.ramp);
    if (front < ready - 1e-12)
      d.warnings.push_back("packet " + std::to_string(k + 1) +
                           " reaches the sample before its storage controls "
                           "are fully on");
    const double zc = kin.stored_center(s.medium, s.packets[k].center,
                                        s.storage[k].off);
    const double half = 4.5 * s.packets[k].width * kin.vg / s.medium.c;
    if (zc - half < s.medium.sample_begin || zc + half > s.medium.sample_end)
      d.warnings.push_back("stored packet " + std::to_string(k + 1) +
                           " support extends past the sample edges");
  }
  std::sort(d.warnings.begin(), d.warnings.end());
  return d;
}

namespace {

std::string run_csv(const RunResult& r, int stride) {
  std::string out = "t,flux,norm,theta,phi\n";
  for (std::size_t k = 0; k < r.t.size(); k += stride) {
    out += fmt(r.t[k]);
    out += ',';
    out += fmt(r.flux[k]);
    out += ',';
    out += fmt(r.norm[k]);
    out += ',';
    out += fmt(r.theta[k]);
    out += ',';
    out += fmt(r.phi[k]);
    out += '\n';
  }
  return out;
}

ordered_json mode_json(const OutputMode& m, int stride) {
  ordered_json j;
  j["stage"] = m.stage;
  j["fraction"] = m.fraction;
  j["t0"] = m.t0;
  j["dt"] = m.dt * stride;
  auto re = ordered_json::array(), im = ordered_json::array();
  for (std::size_t i = 0; i < m.amp.size(); i += stride) {
    re.push_back(m.amp[i].real());
    im.push_back(m.amp[i].imag());
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

ordered_json stats_json(const TwoPhotonStats& st) {
  ordered_json j;
  j["abs_s"] = std::abs(st.s);
  j["s"] = {st.s.real(), st.s.imag()};
  j["amp_coal1"] = {st.amp_coal1.real(), st.amp_coal1.imag()};
  j["p_coal1"] = st.p_coal1;
  j["p_coal2"] = st.p_coal2;
  j["p_noncoal"] = st.p_noncoal;
  return j;
}

struct SweepRow {
  double x = 0;
  TwoPhotonStats closed;
  std::optional<TwoPhotonStats> sim;
};

}  // namespace

std::string scan_csv(const std::vector<ScanPoint>& table) {
  std::string out = "x,p_noncoal,p_coal1,p_coal2,abs_s\n";
  for (const auto& p : table) {
    out += fmt(p.x);
    out += ',';
    out += fmt(p.p_noncoal);
    out += ',';
    out += fmt(p.p_coal1);
    out += ',';
    out += fmt(p.p_coal2);
    out += ',';
    out += fmt(p.abs_s);
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
  if (!f) throw std::runtime_error("short write to " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ScenarioResult run_scenario(const Scenario& s, const std::string& out_dir,
                            OutputFormat format, int workers) {
  s.medium.validate();
  const auto schedule = build_schedule(s);
  const auto windows = stage_windows(s);

  Solver::RunPlan plan;
  plan.stages = windows;
  plan.t_end = s.t_end;
  plan.closure_tol = s.closure_tol;
  plan.snapshot_times = {0.5 * (s.storage.back().off + s.release.stage1_on)};

  ScenarioResult res;
  const Grid& g = s.medium.grid;
  for (const auto& p : s.packets) {
    Solver solver(s.medium, schedule);
    res.runs.push_back(
        solver.run(gaussian_packet(g, p.center, p.width), plan));
  }

  // stored spatial profiles, expressed in the polariton basis of the first
  // storage set: packet 1 rides the dark polariton, packet 2 the trapped one
  const PolaritonBasis basis0{s.storage[0].set, kPi / 2, 0.0};
  for (std::size_t k = 0; k < res.runs.size(); ++k) {
    const auto pol = to_polaritons(res.runs[k].snapshots.at(0), basis0);
    res.stored.push_back(WavePacket::sampled(
        g.z(0), g.dz, k == 0 ? pol.psi : pol.z_pol));
  }

  if (s.packets.size() == 2) {
    const cxd ov = overlap(res.stored[0], res.stored[1]);
    res.stats = coalescence_probs(s.storage[0].set, s.release.set1, ov);
    res.stats_oracle = fock_oracle(bs_matrix(s.storage[0].set, s.release.set1),
                                   res.stored[0], res.stored[1]);
  }

  // optional separation sweep
  std::vector<SweepRow> sweep_rows;
  if (s.sweep) {
    const Kinematics kin(s.medium, s.omega_high, s.ramp);
    const double d1 = s.packets[0].width * kin.vg / s.medium.c;
    const double d2 = s.packets[1].width * kin.vg / s.medium.c;
    const double base_sep =
        kin.stored_center(s.medium, s.packets[1].center, s.storage[1].off) -
        kin.stored_center(s.medium, s.packets[0].center, s.storage[0].off);
    sweep_rows.resize(s.sweep->points);
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto point_at = [&](int i) {
      const double x =
          s.sweep->points == 1
              ? s.sweep->from
              : s.sweep->from + (s.sweep->to - s.sweep->from) * i /
                                    (s.sweep->points - 1);
      SweepRow row;
      row.x = x;
      const cxd sx =
          overlap(WavePacket::gaussian(0.0, d1), WavePacket::gaussian(x, d2));
      row.closed = coalescence_probs(s.storage[0].set, s.release.set1, sx);
      if (s.sweep->end_to_end) {
        Scenario point = s;
        point.sweep.reset();
        point.packets[1].center =
            s.packets[1].center + (x - base_sep) * s.medium.c / kin.vg;
        Solver solver(point.medium, build_schedule(point));
        const auto run2 = solver.run(
            gaussian_packet(g, point.packets[1].center, point.packets[1].width),
            plan);
        const auto pol = to_polaritons(run2.snapshots.at(0), basis0);
        const auto f2 = WavePacket::sampled(g.z(0), g.dz, pol.z_pol);
        const cxd sm = overlap(res.stored[0], f2);
        row.sim = coalescence_probs(s.storage[0].set, s.release.set1, sm);
      }
      sweep_rows[i] = std::move(row);
    };
    auto worker = [&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= s.sweep->points) return;
        try {
          point_at(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    const int nw = std::max(1, workers);
    std::vector<std::thread> pool;
    for (int i = 1; i < nw; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  // summary document
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["stages"] = ordered_json::array();
  for (const auto& w : windows)
    doc["stages"].push_back(
        {{"label", w.label}, {"t_begin", w.t_begin}, {"t_end", w.t_end}});
  doc["packets"] = ordered_json::array();
  for (std::size_t k = 0; k < res.runs.size(); ++k) {
    const auto& r = res.runs[k];
    ordered_json pj;
    pj["index"] = k + 1;
    pj["center"] = s.packets[k].center;
    pj["width"] = s.packets[k].width;
    ordered_json fr;
    for (const auto& w : windows) fr[w.label] = released_fraction(r, w.label);
    pj["fractions"] = std::move(fr);
    pj["final_norm"] = r.final_norm;
    pj["outflow_total"] = r.outflow_total;
    pj["closure_residual"] = r.closure_residual;
    pj["modes"] = ordered_json::array();
    pj["modes"].push_back(mode_json(r.mode("stage1"), s.output.mode_stride));
    pj["modes"].push_back(mode_json(r.mode("stage2"), s.output.mode_stride));
    doc["packets"].push_back(std::move(pj));
  }
  if (res.stats) {
    doc["interference"] = stats_json(*res.stats);
    doc["interference"]["oracle"] = stats_json(*res.stats_oracle);
    for (const char* stage : {"stage1", "stage2"}) {
      const auto& m1 = res.runs[0].mode(stage);
      const auto& m2 = res.runs[1].mode(stage);
      if (m1.fraction > 1e-9 && m2.fraction > 1e-9 && m1.amp.size() > 2 &&
          m2.amp.size() > 2) {
        const auto w1 = WavePacket::sampled(m1.t0, m1.dt, m1.amp);
        const auto w2 = WavePacket::sampled(m2.t0, m2.dt, m2.amp);
        const cxd mo = overlap(w1, w2);
        doc["interference"][std::string("mode_overlap_") + stage] = {
            mo.real(), mo.imag()};
      }
    }
  } else {
    doc["interference"] = nullptr;
  }

  std::filesystem::create_directories(out_dir);
  auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = out_dir + "/" + name;
    write_text_file(path, content);
    res.files_written.push_back(path);
  };

  if (format != OutputFormat::Json) {
    for (std::size_t k = 0; k < res.runs.size(); ++k)
      emit("run_packet" + std::to_string(k + 1) + ".csv",
           run_csv(res.runs[k], s.output.trace_stride));
    if (s.sweep) {
      std::string csv = "x,p_noncoal,p_coal1,p_coal2,abs_s";
      if (s.sweep->end_to_end)
        csv += ",p_noncoal_sim,p_coal1_sim,p_coal2_sim,abs_s_sim";
      csv += '\n';
      for (const auto& row : sweep_rows) {
        csv += fmt(row.x);
        csv += ',' + fmt(row.closed.p_noncoal) + ',' + fmt(row.closed.p_coal1) +
               ',' + fmt(row.closed.p_coal2) + ',' + fmt(std::abs(row.closed.s));
        if (row.sim)
          csv += ',' + fmt(row.sim->p_noncoal) + ',' + fmt(row.sim->p_coal1) +
                 ',' + fmt(row.sim->p_coal2) + ',' + fmt(std::abs(row.sim->s));
        csv += '\n';
      }
      emit("sweep.csv", csv);
      doc["sweep_file"] = "sweep.csv";
    }
  }
  res.summary_json = doc.dump(2) + "\n";
  if (format != OutputFormat::Csv) emit("summary.json", res.summary_json);
  return res;
}

}  // namespace tripod
