#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "ucprop/ucprop.h"

namespace {

// subcommand name -> experiment selector in the config schema
struct SubcommandMap {
  const char* command;
  const char* experiment;
  const char* blurb;
};

const SubcommandMap kSubcommands[] = {
    {"solve", "solve", "solve one boundary-driven instance and persist it"},
    {"caccioppoli", "caccioppoli", "interior gradient bound ensemble"},
    {"doubling", "doubling", "ball-mass doubling functional ensemble"},
    {"three-sphere", "three-sphere", "three-ball interpolation ensemble"},
    {"muckenhoupt", "muckenhoupt", "weight non-degeneracy checks"},
    {"dyadic-check", "dyadic", "covering-lemma oracle comparison"},
    {"propagate", "propagate-l2", "L2 smallness propagation sweep"},
    {"growth", "growth-linf", "sup-norm envelope sweep"},
    {"convergence", "convergence", "manufactured-solution grid study"},
};

int fail_with(const char* stage) {
  std::fprintf(stderr, "ucprop: %s failed:\n%s\n", stage, ucp_last_error());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for quantitative unique continuation"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  unsigned long long seed = 0;
  int grid_nodes = 0;
  bool quiet = false;
  bool have_seed = false;

  app.add_option("--config", config_path, "scenario config (JSON)");
  app.add_option("--out", out_dir, "output directory override");
  app.add_option("--seed", seed, "ensemble seed override")
      ->each([&](const std::string&) { have_seed = true; });
  app.add_option("--grid", grid_nodes, "grid nodes per axis override");
  app.add_flag("--quiet", quiet, "suppress the summary on stdout");

  std::string selected;
  for (const auto& sc : kSubcommands) {
    auto* sub = app.add_subcommand(sc.command, sc.blurb);
    sub->callback([&selected, &sc] { selected = sc.experiment; });
    sub->fallthrough();  // --config/--out/... may follow the subcommand
  }
  app.add_subcommand("report",
                     "re-emit artifacts from an existing run directory")
      ->callback([&selected] { selected = "report"; })
      ->fallthrough();

  CLI11_PARSE(app, argc, argv);

  ucp_config* cfg = nullptr;
  if (selected == "report") {
    // rebuild the bundle from the config echoed into the run directory
    if (out_dir.empty()) {
      std::fprintf(stderr, "ucprop: report needs --out DIR\n");
      return 2;
    }
    if (ucp_config_load((out_dir + "/config.json").c_str(), &cfg) != UCP_OK)
      return fail_with("config load");
  } else if (!config_path.empty()) {
    if (ucp_config_load(config_path.c_str(), &cfg) != UCP_OK)
      return fail_with("config load");
  } else {
    if (ucp_config_parse("{}", &cfg) != UCP_OK)
      return fail_with("config parse");
  }

  if (selected != "report" &&
      ucp_config_set_experiment(cfg, selected.c_str()) != UCP_OK) {
    fail_with("experiment selection");
    ucp_config_free(cfg);
    return 2;
  }
  if (!out_dir.empty()) ucp_config_set_out_dir(cfg, out_dir.c_str());
  if (have_seed) ucp_config_set_seed(cfg, seed);
  if (grid_nodes > 0 && ucp_config_set_grid_nodes(cfg, grid_nodes) != UCP_OK) {
    fail_with("grid override");
    ucp_config_free(cfg);
    return 2;
  }
  if (quiet) ucp_config_set_quiet(cfg, 1);

  ucp_run* run = nullptr;
  ucp_status st = ucp_run_experiment(cfg, &run);
  if (st != UCP_OK) {
    fail_with("run");
    ucp_config_free(cfg);
    return 2;
  }
  if (!quiet) std::printf("%s\n", ucp_run_summary_json(run));
  int rc = ucp_run_failed(run);
  ucp_run_free(run);
  ucp_config_free(cfg);
  return rc;
}
