#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tripod/interference.hpp"
#include "tripod/medium.hpp"
#include "tripod/schedule.hpp"

namespace tripod {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PacketSpec {
  double center = 0;
  double width = 1;
};

// One trapping event: control set on over [on, off - ramp], switched off by
// `off`.  The first event's controls are already on at t = 0.
struct StorageStage {
  ControlSet set;
  double on = 0;
  double off = 0;
};

struct ReleasePlan {
  ControlSet set1;
  std::optional<ControlSet> stage2_override;  // default: complementary(set1)
  double stage1_on = 0;
  double stage1_off = 0;  // stage-1 controls switched off by here
  double stage2_on = 0;

  ControlSet stage2_set() const {
    return stage2_override ? *stage2_override : complementary(set1);
  }
};

struct SweepSpec {
  std::string axis = "separation";  // x = stored packet separation
  double from = 0, to = 0;
  int points = 0;
  bool end_to_end = false;  // also rerun the solver per point
};

struct OutputSpec {
  int trace_stride = 1;  // CSV row decimation
  int mode_stride = 1;   // released-mode decimation in the JSON summary
};

struct Scenario {
  MediumParams medium;
  double omega_high = 0;  // control amplitude when fully on
  double ramp = 2.0;      // switching time; parse_scenario defaults to 16/kappa
  RampShape ramp_shape = RampShape::Cos2;
  std::vector<StorageStage> storage;  // one or two, paired with packets
  std::vector<PacketSpec> packets;
  ReleasePlan release;
  double t_end = 0;
  double closure_tol = 1e-6;
  std::optional<SweepSpec> sweep;
  OutputSpec output;
};

// Strict parse of the JSON scenario document: unknown keys are rejected with
// the nearest valid key named; missing timings are derived from the
// group-velocity model (see README).  Throws ConfigError.
Scenario parse_scenario(const std::string& text);

/// Scenario rendered back to its configuration document (round-trips).
std::string serialize_scenario(const Scenario& s);

struct Diagnostics {
  double cfl = 0;
  double adiabaticity = 0;     // max |dtheta/dt| / sqrt(Omega^2 + kappa^2)
  double grid_resolution = 0;  // cells per stored packet width
  std::vector<std::string> warnings;
};

Diagnostics validate(const Scenario& s);

/// Control history realizing the scenario's storage and release timings.
ControlSchedule build_schedule(const Scenario& s);

/// entry / storage / stage1 / stage2 windows derived from the timings.
std::vector<StageWindow> stage_windows(const Scenario& s);

enum class OutputFormat { Csv, Json, Both };

struct ScenarioResult {
  std::vector<RunResult> runs;       // one per packet
  std::vector<WavePacket> stored;    // stored spatial profiles, basis of set 0
  std::optional<TwoPhotonStats> stats;          // two-packet runs only
  std::optional<TwoPhotonStats> stats_oracle;   // fock_oracle cross-check
  std::string summary_json;
  std::vector<std::string> files_written;
};

// Full pipeline: per-packet solver runs, stored-profile extraction, overlap
// and two-photon statistics, CSV/JSON emission (byte-stable for fixed
// inputs).  Sweeps run their points on `workers` threads in input order.
ScenarioResult run_scenario(const Scenario& s, const std::string& out_dir,
                            OutputFormat format = OutputFormat::Both,
                            int workers = 1);

// --- file helpers (used by the CLI) ---
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
std::string scan_csv(const std::vector<ScanPoint>& table);

}  // namespace tripod
