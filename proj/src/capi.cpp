#include "ucprop/ucprop.h"

#include <cstring>
#include <string>

#include "experiments.hpp"

struct ucp_config {
  ucprop::ScenarioConfig cfg;
};

struct ucp_run {
  ucprop::ArtifactBundle bundle;
  std::string summary_text;
};

namespace {

thread_local std::string g_last_error;

ucp_status fail(ucp_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename F>
ucp_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return UCP_OK;
  } catch (const ucprop::config_error& e) {
    return fail(UCP_ERR_PARSE, e.what());
  } catch (const ucprop::precondition_error& e) {
    return fail(UCP_ERR_PRECONDITION, e.what());
  } catch (const ucprop::resolution_error& e) {
    return fail(UCP_ERR_RESOLUTION, e.what());
  } catch (const ucprop::solver_error& e) {
    return fail(UCP_ERR_SOLVER, std::string(e.what()) + "\n" + e.diagnostics);
  } catch (const ucprop::contract_error& e) {
    return fail(UCP_ERR_INTERNAL, e.what());
  } catch (const std::exception& e) {
    return fail(UCP_ERR_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* ucp_version(void) { return "1.0.0"; }

const char* ucp_last_error(void) { return g_last_error.c_str(); }

ucp_status ucp_config_parse(const char* text, ucp_config** out) {
  if (!text || !out) return fail(UCP_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* h = new ucp_config{ucprop::parse_config(text)};
    *out = h;
  });
}

ucp_status ucp_config_load(const char* path, ucp_config** out) {
  if (!path || !out) return fail(UCP_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* h = new ucp_config{ucprop::load_config(path)};
    *out = h;
  });
}

ucp_status ucp_config_serialize(const ucp_config* cfg, char** out_text) {
  if (!cfg || !out_text) return fail(UCP_ERR_ARGUMENT, "null argument");
  return guarded([&] {
    std::string s = ucprop::serialize_config(cfg->cfg);
    *out_text = new char[s.size() + 1];
    std::memcpy(*out_text, s.c_str(), s.size() + 1);
  });
}

ucp_status ucp_config_set_experiment(ucp_config* cfg, const char* name) {
  if (!cfg || !name) return fail(UCP_ERR_ARGUMENT, "null argument");
  // round-trip through the validator so bad names are rejected here
  return guarded([&] {
    ucprop::ScenarioConfig c = cfg->cfg;
    c.experiment = name;
    cfg->cfg = ucprop::parse_config(ucprop::serialize_config(c));
  });
}

ucp_status ucp_config_set_out_dir(ucp_config* cfg, const char* dir) {
  if (!cfg || !dir) return fail(UCP_ERR_ARGUMENT, "null argument");
  cfg->cfg.out_dir = dir;
  return UCP_OK;
}

ucp_status ucp_config_set_seed(ucp_config* cfg, unsigned long long seed) {
  if (!cfg) return fail(UCP_ERR_ARGUMENT, "null argument");
  cfg->cfg.ensemble.seed = seed;
  return UCP_OK;
}

ucp_status ucp_config_set_grid_nodes(ucp_config* cfg, int nodes) {
  if (!cfg) return fail(UCP_ERR_ARGUMENT, "null argument");
  if (nodes < 5) return fail(UCP_ERR_PARSE, "grid.nodes: at least 5 required");
  cfg->cfg.grid.nodes = nodes;
  return UCP_OK;
}

ucp_status ucp_config_set_quiet(ucp_config* cfg, int quiet) {
  if (!cfg) return fail(UCP_ERR_ARGUMENT, "null argument");
  cfg->cfg.quiet = quiet != 0;
  return UCP_OK;
}

void ucp_config_free(ucp_config* cfg) { delete cfg; }

void ucp_string_free(char* s) { delete[] s; }

ucp_status ucp_run_experiment(const ucp_config* cfg, ucp_run** out) {
  if (!cfg || !out) return fail(UCP_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* h = new ucp_run{ucprop::run_experiment(cfg->cfg), {}};
    h->summary_text = h->bundle.summary.dump(2);
    *out = h;
  });
}

int ucp_run_failed(const ucp_run* run) {
  return run && run->bundle.failed() ? 1 : 0;
}

size_t ucp_run_file_count(const ucp_run* run) {
  return run ? run->bundle.files.size() : 0;
}

const char* ucp_run_file(const ucp_run* run, size_t i) {
  if (!run || i >= run->bundle.files.size()) return nullptr;
  return run->bundle.files[i].c_str();
}

const char* ucp_run_summary_json(const ucp_run* run) {
  return run ? run->summary_text.c_str() : nullptr;
}

void ucp_run_free(ucp_run* run) { delete run; }

}  // extern "C"
