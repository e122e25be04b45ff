#include "stmeta/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace stm {

namespace {

using nlohmann::json;

template <class T>
void take(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

json as_json(const RunConfig& c) {
  return json{{"dim", c.dim},
              {"n_space", c.n_space},
              {"n_time", c.n_time},
              {"periodic", c.periodic},
              {"case_id", c.case_id},
              {"levels", c.levels},
              {"element", c.element},
              {"reference", c.reference},
              {"seam", c.seam},
              {"output_dir", c.output_dir},
              {"template_path", c.template_path},
              {"target_path", c.target_path},
              {"sigma_inv2", c.sigma_inv2},
              {"alpha", c.alpha},
              {"grad_mode", c.grad_mode},
              {"max_outer_iters", c.max_outer_iters},
              {"grad_tol", c.grad_tol},
              {"lbfgs_memory", c.lbfgs_memory},
              {"armijo_c1", c.armijo_c1},
              {"backtrack", c.backtrack},
              {"initial_step", c.initial_step},
              {"inner_tol", c.inner_tol},
              {"helmholtz_tol", c.helmholtz_tol},
              {"seed", c.seed},
              {"directions", c.directions},
              {"fd_step", c.fd_step},
              {"steps", c.steps},
              {"samples", c.samples}};
}

} // namespace

OuterConfig RunConfig::outer() const {
  OuterConfig o;
  o.sigma_inv2 = sigma_inv2;
  o.alpha = alpha;
  o.grad_mode = grad_mode == "spacetime" ? GradMode::spacetime : GradMode::spatial;
  o.max_outer_iters = max_outer_iters;
  o.grad_tol_rel = grad_tol;
  o.lbfgs_memory = lbfgs_memory;
  o.armijo_c1 = armijo_c1;
  o.backtrack = backtrack;
  o.initial_step = initial_step;
  o.inner_tol = inner_tol;
  o.helmholtz_tol = helmholtz_tol;
  return o;
}

void merge_json(RunConfig& c, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const json known = as_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  take(j, "dim", c.dim);
  take(j, "n_space", c.n_space);
  take(j, "n_time", c.n_time);
  take(j, "periodic", c.periodic);
  take(j, "case_id", c.case_id);
  take(j, "levels", c.levels);
  take(j, "element", c.element);
  take(j, "reference", c.reference);
  take(j, "seam", c.seam);
  take(j, "output_dir", c.output_dir);
  take(j, "template_path", c.template_path);
  take(j, "target_path", c.target_path);
  take(j, "sigma_inv2", c.sigma_inv2);
  take(j, "alpha", c.alpha);
  take(j, "grad_mode", c.grad_mode);
  take(j, "max_outer_iters", c.max_outer_iters);
  take(j, "grad_tol", c.grad_tol);
  take(j, "lbfgs_memory", c.lbfgs_memory);
  take(j, "armijo_c1", c.armijo_c1);
  take(j, "backtrack", c.backtrack);
  take(j, "initial_step", c.initial_step);
  take(j, "inner_tol", c.inner_tol);
  take(j, "helmholtz_tol", c.helmholtz_tol);
  take(j, "seed", c.seed);
  take(j, "directions", c.directions);
  take(j, "fd_step", c.fd_step);
  take(j, "steps", c.steps);
  take(j, "samples", c.samples);
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c;
  merge_json(c, ss.str());
  return c;
}

std::string to_json(const RunConfig& config) { return as_json(config).dump(2) + "\n"; }

void validate(const RunConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.dim != 1 && c.dim != 2) fail("dim must be 1 or 2");
  if (c.n_space < 1) fail("n_space must be >= 1");
  if (c.n_time < 0) fail("n_time must be >= 0");
  for (int l : c.levels)
    if (l < 1) fail("levels must be positive");
  if (c.element != "q1" && c.element != "p1") fail("element must be q1 or p1");
  if (c.reference != "interpolant" && c.reference != "exact") fail("reference must be interpolant or exact");
  if (c.seam != "periodized" && c.seam != "verbatim") fail("seam must be periodized or verbatim");
  if (c.grad_mode != "spatial" && c.grad_mode != "spacetime") fail("grad_mode must be spatial or spacetime");
  if (!(c.sigma_inv2 > 0.0)) fail("sigma_inv2 must be > 0");
  if (!(c.alpha > 0.0)) fail("alpha must be > 0");
  if (c.max_outer_iters < 0) fail("max_outer_iters must be >= 0");
  if (!(c.grad_tol >= 0.0)) fail("grad_tol must be >= 0");
  if (c.lbfgs_memory < 1) fail("lbfgs_memory must be >= 1");
  if (!(c.armijo_c1 > 0.0 && c.armijo_c1 < 1.0)) fail("armijo_c1 must lie in (0, 1)");
  if (!(c.backtrack > 0.0 && c.backtrack < 1.0)) fail("backtrack must lie in (0, 1)");
  if (!(c.initial_step > 0.0)) fail("initial_step must be > 0");
  if (!(c.inner_tol > 0.0) || !(c.helmholtz_tol > 0.0)) fail("solver tolerances must be > 0");
  if (c.directions < 1) fail("directions must be >= 1");
  if (!(c.fd_step > 0.0)) fail("fd_step must be > 0");
  if (c.steps < 1) fail("steps must be >= 1");
  if (c.samples < 2) fail("samples must be >= 2");
}

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad level '" + item + "' in '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("no levels given");
  return out;
}

} // namespace stm
