#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <random>

#include "tripod/interference.hpp"
#include "tripod/scenario.hpp"

namespace {

tripod::OutputFormat parse_format(const std::string& f) {
  if (f == "csv") return tripod::OutputFormat::Csv;
  if (f == "json") return tripod::OutputFormat::Json;
  if (f == "both") return tripod::OutputFormat::Both;
  throw CLI::ValidationError("--format must be csv, json or both");
}

void print_matrix(const tripod::BeamSplitterMatrix& r) {
  auto row = [](tripod::cxd a, tripod::cxd b) {
    std::printf("  [% .12g%+.12gi   % .12g%+.12gi]\n", a.real(), a.imag(),
                b.real(), b.imag());
  };
  row(r.r31, r.r32);
  row(r.r41, r.r42);
  std::printf("unitarity residual: %.3g\n", r.unitarity_residual());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stored-light beam-splitter simulator for a tripod medium"};
  app.require_subcommand(1);

  std::string config, out_dir = "out", format = "both";
  int workers = 1;
  unsigned seed = 12345;
  app.add_option("--seed", seed, "seed for randomized checks");

  auto* sim = app.add_subcommand("simulate", "run a scenario end to end");
  sim->add_option("--config", config, "scenario document")->required();
  sim->add_option("--out", out_dir, "output directory");
  sim->add_option("--format", format, "csv|json|both");
  sim->add_option("--workers", workers, "sweep worker threads");

  auto* scan = app.add_subcommand("hom-scan", "Mandel-dip curve");
  std::string axis = "separation";
  double from = 0, to = 5, a_fixed = 0, delta1 = 1, delta2 = 1;
  int points = 101;
  double phi0 = 0, chi20 = 0, chi30 = 0;
  double phi1 = tripod::kPi / 4, chi21 = 0, chi31 = 0;
  scan->add_option("--axis", axis, "separation|width-ratio");
  scan->add_option("--from", from, "axis start");
  scan->add_option("--to", to, "axis end");
  scan->add_option("--points", points, "number of scan points");
  scan->add_option("--delta1", delta1, "first packet width");
  scan->add_option("--delta2", delta2, "second packet width");
  scan->add_option("--a", a_fixed, "separation (width-ratio scans)");
  scan->add_option("--phi0", phi0, "storage set phi");
  scan->add_option("--chi20", chi20, "storage set chi2");
  scan->add_option("--chi30", chi30, "storage set chi3");
  scan->add_option("--phi1", phi1, "release set phi");
  scan->add_option("--chi21", chi21, "release set chi2");
  scan->add_option("--chi31", chi31, "release set chi3");
  scan->add_option("--out", out_dir, "output directory");

  auto* bsm = app.add_subcommand("bs-matrix", "print the release transformation");
  int draws = 0;
  bsm->add_option("--phi0", phi0, "storage set phi");
  bsm->add_option("--chi20", chi20, "storage set chi2");
  bsm->add_option("--chi30", chi30, "storage set chi3");
  bsm->add_option("--phi1", phi1, "release set phi");
  bsm->add_option("--chi21", chi21, "release set chi2");
  bsm->add_option("--chi31", chi31, "release set chi3");
  bsm->add_option("--draws", draws, "also check unitarity on N random sets");

  auto* val = app.add_subcommand("validate", "scenario diagnostics");
  val->add_option("--config", config, "scenario document")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const auto scenario = tripod::parse_scenario(tripod::read_text_file(config));
      const auto diag = tripod::validate(scenario);
      for (const auto& w : diag.warnings) std::cerr << "warning: " << w << "\n";
      const auto result =
          tripod::run_scenario(scenario, out_dir, parse_format(format), workers);
      for (const auto& f : result.files_written) std::cout << "wrote " << f << "\n";
      for (std::size_t k = 0; k < result.runs.size(); ++k)
        std::printf("packet %zu: stage1 %.6f  stage2 %.6f  closure %.2e\n",
                    k + 1, tripod::released_fraction(result.runs[k], "stage1"),
                    tripod::released_fraction(result.runs[k], "stage2"),
                    result.runs[k].closure_residual);
      if (result.stats)
        std::printf("two-photon: |s| %.6f  p_coal1 %.6f  p_coal2 %.6f  "
                    "p_noncoal %.6f\n",
                    std::abs(result.stats->s), result.stats->p_coal1,
                    result.stats->p_coal2, result.stats->p_noncoal);
      return 0;
    }

    if (*scan) {
      tripod::HomScanParams p;
      p.delta1 = delta1;
      p.delta2 = delta2;
      p.a = a_fixed;
      p.set0 = tripod::ControlSet(phi0, chi20, chi30);
      p.set1 = tripod::ControlSet(phi1, chi21, chi31);
      tripod::ScanAxis ax;
      if (axis == "separation")
        ax = tripod::ScanAxis::Separation;
      else if (axis == "width-ratio")
        ax = tripod::ScanAxis::WidthRatio;
      else
        throw std::runtime_error("--axis must be separation or width-ratio");
      const auto table = tripod::hom_scan(ax, from, to, points, p);
      std::filesystem::create_directories(out_dir);
      const std::string path = out_dir + "/hom_scan.csv";
      tripod::write_text_file(path, tripod::scan_csv(table));
      auto best = table.front();
      for (const auto& pt : table)
        if (pt.p_noncoal < best.p_noncoal) best = pt;
      std::printf("wrote %s (%zu points); minimum p_noncoal %.6g at x = %.6g\n",
                  path.c_str(), table.size(), best.p_noncoal, best.x);
      return 0;
    }

    if (*bsm) {
      print_matrix(tripod::bs_matrix(tripod::ControlSet(phi0, chi20, chi30),
                                     tripod::ControlSet(phi1, chi21, chi31)));
      if (draws > 0) {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> half(0, tripod::kPi / 2);
        std::uniform_real_distribution<double> full(0, 2 * tripod::kPi);
        double worst = 0;
        for (int i = 0; i < draws; ++i) {
          const auto r = tripod::bs_matrix(
              tripod::ControlSet(half(rng), full(rng), full(rng)),
              tripod::ControlSet(half(rng), full(rng), full(rng)));
          worst = std::max(worst, r.unitarity_residual());
        }
        std::printf("max unitarity residual over %d draws: %.3g\n", draws, worst);
      }
      return 0;
    }

    if (*val) {
      const auto scenario = tripod::parse_scenario(tripod::read_text_file(config));
      const auto diag = tripod::validate(scenario);
      std::printf("cfl: %.12g\nadiabaticity: %.6g\ngrid_resolution: %.6g\n",
                  diag.cfl, diag.adiabaticity, diag.grid_resolution);
      for (const auto& w : diag.warnings) std::cout << "warning: " << w << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
