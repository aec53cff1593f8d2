#include "config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace ucprop {

namespace {

using json = nlohmann::ordered_json;

std::string join(const std::vector<std::string>& v) {
  std::string out = "config invalid:";
  for (const auto& s : v) out += "\n  " + s;
  return out;
}

// Strict reader over one JSON object: every get() marks its key consumed,
// leftovers are reported as unknown.
class Reader {
 public:
  Reader(const json& obj, std::string path, std::vector<std::string>& errs)
      : obj_(obj), path_(std::move(path)), errs_(errs) {
    if (!obj.is_object())
      errs_.push_back(path_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!obj_.is_object() || !obj_.contains(key)) return;
    seen_.push_back(key);
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      errs_.push_back(path_ + "." + key + ": type mismatch");
    }
  }

  bool has(const char* key) const {
    return obj_.is_object() && obj_.contains(key);
  }
  const json& sub(const char* key) {
    seen_.push_back(key);
    return obj_.at(key);
  }

  void finish() {
    if (!obj_.is_object()) return;
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      bool known = false;
      for (const auto& s : seen_)
        if (s == it.key()) known = true;
      if (!known) errs_.push_back(path_ + "." + it.key() + ": unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::vector<std::string>& errs_;
  std::vector<std::string> seen_;
};

const char* kExperiments[] = {"solve",       "caccioppoli", "doubling",
                              "three-sphere", "muckenhoupt", "dyadic",
                              "propagate-l2", "growth-linf", "convergence"};
const char* kPresets[] = {"laplacian", "smooth", "singular"};

void apply_preset(const std::string& name, CoefficientRecipe& r) {
  if (name == "laplacian") r = CoefficientRecipe::laplacian();
  else if (name == "smooth") r = CoefficientRecipe::smooth();
  else if (name == "singular") r = CoefficientRecipe::singular();
}

void read_recipe(const json& j, const std::string& path, CoefficientRecipe& r,
                 std::string& preset, std::vector<std::string>& errs) {
  Reader rd(j, path, errs);
  rd.get("preset", preset);
  bool known = false;
  for (const char* p : kPresets)
    if (preset == p) known = true;
  if (!known) {
    errs.push_back(path + ".preset: unknown preset '" + preset + "'");
  } else {
    apply_preset(preset, r);
  }
  rd.get("g0", r.g0);
  rd.get("g_amp", r.g_amp);
  rd.get("g_freq", r.g_freq);
  rd.get("g_offdiag", r.g_offdiag);
  rd.get("v_smooth_amp", r.v_smooth_amp);
  rd.get("v_sing", r.v_sing);
  rd.get("v_p", r.v_p);
  rd.get("w1_smooth_amp", r.w1_smooth_amp);
  rd.get("w1_sing", r.w1_sing);
  rd.get("w2_smooth_amp", r.w2_smooth_amp);
  rd.get("w2_sing", r.w2_sing);
  rd.get("w_q", r.w_q);
  std::vector<double> x0{r.x0[0], r.x0[1], r.x0[2]};
  rd.get("x0", x0);
  if (x0.size() != 3)
    errs.push_back(path + ".x0: expected 3 coordinates");
  else
    r.x0 = {x0[0], x0[1], x0[2]};
  rd.get("lambda1_budget", r.lambda1_budget);
  rd.get("s", r.s);
  rd.finish();
}

void read_constants(const json& j, const std::string& path,
                    ConstantsProfile& c, std::vector<std::string>& errs) {
  Reader rd(j, path, errs);
  rd.get("H0", c.H0);
  rd.get("b0", c.b0);
  rd.get("tau0", c.tau0);
  rd.get("kappa", c.kappa);
  rd.get("rho0", c.rho0);
  rd.get("a_n", c.a_n);
  rd.get("gamma_n", c.gamma_n);
  rd.get("k", c.k);
  rd.get("sigma", c.sigma);
  std::vector<double> cs(c.C, c.C + 11);
  rd.get("C", cs);
  if (cs.size() != 11)
    errs.push_back(path + ".C: expected 11 entries C0..C10");
  else
    std::copy(cs.begin(), cs.end(), c.C);
  rd.get("A", c.A);
  rd.get("delta", c.delta);
  rd.get("beta", c.beta);
  rd.get("gamma", c.gamma);
  rd.finish();
}

}  // namespace

config_error::config_error(std::vector<std::string> v)
    : std::runtime_error(join(v)), violations(std::move(v)) {}

Grid GridSpec::make() const {
  double h = (hi - lo) / (nodes - 1);
  return Grid(dim, {nodes, nodes, dim == 3 ? nodes : 1}, h, {lo, lo, dim == 3 ? lo : 0.0});
}

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw config_error({std::string("not valid JSON: ") + e.what()});
  }

  ScenarioConfig c;
  std::vector<std::string> errs;
  Reader rd(j, "config", errs);
  rd.get("experiment", c.experiment);
  rd.get("out_dir", c.out_dir);
  rd.get("quiet", c.quiet);
  if (rd.has("grid")) {
    Reader g(rd.sub("grid"), "config.grid", errs);
    g.get("dim", c.grid.dim);
    g.get("nodes", c.grid.nodes);
    g.get("lo", c.grid.lo);
    g.get("hi", c.grid.hi);
    g.finish();
  }
  if (rd.has("coefficients"))
    read_recipe(rd.sub("coefficients"), "config.coefficients", c.recipe,
                c.coefficient_preset, errs);
  if (rd.has("ensemble")) {
    Reader e(rd.sub("ensemble"), "config.ensemble", errs);
    e.get("count", c.ensemble.count);
    e.get("seed", c.ensemble.seed);
    e.get("freq_cap", c.ensemble.freq_cap);
    e.get("boundary", c.ensemble.boundary);
    e.finish();
  }
  if (rd.has("constants"))
    read_constants(rd.sub("constants"), "config.constants", c.constants, errs);
  if (rd.has("sweep")) {
    Reader s(rd.sub("sweep"), "config.sweep", errs);
    s.get("epsilons", c.sweep.epsilons);
    s.get("radii", c.sweep.radii);
    s.get("rho", c.sweep.rho);
    s.get("rho1", c.sweep.rho1);
    s.get("gamma", c.sweep.gamma);
    s.get("beta", c.sweep.beta);
    s.get("A", c.sweep.A);
    s.get("eps0", c.sweep.eps0);
    s.get("grids", c.sweep.grids);
    s.finish();
  }
  rd.get("attrition", c.attrition);
  rd.get("dyadic_rank", c.dyadic_rank);
  rd.get("dyadic_families", c.dyadic_families);
  rd.finish();

  // semantic validation; keep going so every violation is reported
  bool known_exp = false;
  for (const char* e : kExperiments)
    if (c.experiment == e) known_exp = true;
  if (!known_exp)
    errs.push_back("config.experiment: unknown experiment '" + c.experiment +
                   "'");
  if (c.grid.dim != 2 && c.grid.dim != 3)
    errs.push_back("config.grid.dim: must be 2 or 3");
  if (c.grid.nodes < 5)
    errs.push_back("config.grid.nodes: at least 5 nodes per axis required");
  if (!(c.grid.lo < c.grid.hi))
    errs.push_back("config.grid.lo: lo < hi required");
  if (c.ensemble.count < 1)
    errs.push_back("config.ensemble.count: at least 1 required");
  if (c.ensemble.freq_cap < 1)
    errs.push_back("config.ensemble.freq_cap: at least 1 required");
  if (c.ensemble.boundary != "random") {
    if (c.ensemble.boundary.rfind("harmonic:", 0) != 0 ||
        c.ensemble.boundary.size() != 10 ||
        c.ensemble.boundary[9] < '0' || c.ensemble.boundary[9] > '9')
      errs.push_back(
          "config.ensemble.boundary: 'random' or 'harmonic:<digit>' required");
  }
  try {
    if (c.grid.dim == 2 || c.grid.dim == 3) c.constants.validate(c.grid.dim);
  } catch (const precondition_error& e) {
    errs.push_back(std::string("config.constants: ") + e.what());
  }
  for (double eps : c.sweep.epsilons)
    if (!(eps > 0 && eps < 1)) {
      errs.push_back("config.sweep.epsilons: values must lie in (0,1)");
      break;
    }
  for (double r : c.sweep.radii)
    if (!(r > 0)) {
      errs.push_back("config.sweep.radii: values must be positive");
      break;
    }
  if (!(c.sweep.rho > 0)) errs.push_back("config.sweep.rho: must be positive");
  if (!(c.sweep.rho1 > 0))
    errs.push_back("config.sweep.rho1: must be positive");
  if (!(c.sweep.gamma > 0 && c.sweep.gamma < 1))
    errs.push_back("config.sweep.gamma: must lie in (0,1)");
  if (!(c.sweep.beta > 0))
    errs.push_back("config.sweep.beta: must be positive");
  if (!(c.sweep.A > 0)) errs.push_back("config.sweep.A: must be positive");
  if (!(c.sweep.eps0 > 0 && c.sweep.eps0 <= 1))
    errs.push_back("config.sweep.eps0: must lie in (0,1]");
  for (int n : c.sweep.grids)
    if (n < 5) {
      errs.push_back("config.sweep.grids: sizes below 5 not solvable");
      break;
    }
  if (!(c.attrition >= 0 && c.attrition <= 0.5))
    errs.push_back("config.attrition: must lie in [0, 0.5]");
  if (c.dyadic_rank < 1 || c.dyadic_rank > 4)
    errs.push_back("config.dyadic_rank: must lie in [1, 4]");
  if (c.dyadic_families < 1)
    errs.push_back("config.dyadic_families: at least 1 required");

  if (!errs.empty()) throw config_error(std::move(errs));
  return c;
}

std::string serialize_config(const ScenarioConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["out_dir"] = c.out_dir;
  j["quiet"] = c.quiet;
  j["grid"] = {{"dim", c.grid.dim},
               {"nodes", c.grid.nodes},
               {"lo", c.grid.lo},
               {"hi", c.grid.hi}};
  j["coefficients"] = {{"preset", c.coefficient_preset},
                       {"g0", c.recipe.g0},
                       {"g_amp", c.recipe.g_amp},
                       {"g_freq", c.recipe.g_freq},
                       {"g_offdiag", c.recipe.g_offdiag},
                       {"v_smooth_amp", c.recipe.v_smooth_amp},
                       {"v_sing", c.recipe.v_sing},
                       {"v_p", c.recipe.v_p},
                       {"w1_smooth_amp", c.recipe.w1_smooth_amp},
                       {"w1_sing", c.recipe.w1_sing},
                       {"w2_smooth_amp", c.recipe.w2_smooth_amp},
                       {"w2_sing", c.recipe.w2_sing},
                       {"w_q", c.recipe.w_q},
                       {"x0", {c.recipe.x0[0], c.recipe.x0[1], c.recipe.x0[2]}},
                       {"lambda1_budget", c.recipe.lambda1_budget},
                       {"s", c.recipe.s}};
  j["ensemble"] = {{"count", c.ensemble.count},
                   {"seed", c.ensemble.seed},
                   {"freq_cap", c.ensemble.freq_cap},
                   {"boundary", c.ensemble.boundary}};
  j["constants"] = {{"H0", c.constants.H0},
                    {"b0", c.constants.b0},
                    {"tau0", c.constants.tau0},
                    {"kappa", c.constants.kappa},
                    {"rho0", c.constants.rho0},
                    {"a_n", c.constants.a_n},
                    {"gamma_n", c.constants.gamma_n},
                    {"k", c.constants.k},
                    {"sigma", c.constants.sigma},
                    {"C", std::vector<double>(c.constants.C, c.constants.C + 11)},
                    {"A", c.constants.A},
                    {"delta", c.constants.delta},
                    {"beta", c.constants.beta},
                    {"gamma", c.constants.gamma}};
  j["sweep"] = {{"epsilons", c.sweep.epsilons},
                {"radii", c.sweep.radii},
                {"rho", c.sweep.rho},
                {"rho1", c.sweep.rho1},
                {"gamma", c.sweep.gamma},
                {"beta", c.sweep.beta},
                {"A", c.sweep.A},
                {"eps0", c.sweep.eps0},
                {"grids", c.sweep.grids}};
  j["attrition"] = c.attrition;
  j["dyadic_rank"] = c.dyadic_rank;
  j["dyadic_families"] = c.dyadic_families;
  return j.dump(2) + "\n";
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error({"cannot open config file: " + path});
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace ucprop
