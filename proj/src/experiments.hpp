#pragma once

#include <json.hpp>

#include <map>

#include "config.hpp"
#include "report_io.hpp"

namespace ucprop {

// A named zero-violation (or threshold) check with its measured slack.
struct Assertion {
  std::string name;
  double margin = 0;
  bool pass = false;
};

struct SweepSeries {
  std::string xlabel, ylabel;
  std::vector<double> x, y;
  bool with_fit = false;
};

struct ArtifactBundle {
  std::string out_dir;
  std::vector<std::string> files;  // names written under out_dir
  std::vector<Assertion> assertions;
  nlohmann::ordered_json summary;
  std::map<std::string, SweepSeries> sweeps;          // regression figures
  std::map<std::string, std::vector<double>> hists;   // histogram figures
  int member_failures = 0;

  bool failed() const {
    for (const auto& a : assertions)
      if (!a.pass) return true;
    return false;
  }
};

// Dispatches on config.experiment, writes CSV + summary.json + SVG plots
// into config.out_dir, deterministic for fixed (config, seed). Individual
// member errors are tolerated up to the attrition fraction.
ArtifactBundle run_experiment(const ScenarioConfig& config);

// Plot emission from the bundle's sweep/histogram series. Series with fewer
// than 2 points are skipped with a note in summary["plot_notes"].
void emit_plots(ArtifactBundle& bundle);

// UCPROP_THREADS (default 1) bounds member-level parallelism.
int thread_budget();

}  // namespace ucprop
