#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "stmeta/outer.hpp"

namespace stm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat run parameters shared by all commands. JSON keys are the field names.
struct RunConfig {
  int dim = 1;
  int n_space = 16;
  int n_time = 0; // 0: same as n_space
  bool periodic = true;
  int case_id = 1;
  std::vector<int> levels;
  std::string element = "q1";       // q1 | p1
  std::string reference = "interpolant"; // interpolant | exact
  std::string seam = "periodized";  // periodized | verbatim
  std::string output_dir = "out";
  std::string template_path;
  std::string target_path;
  double sigma_inv2 = 1.0;
  double alpha = 0.1;
  std::string grad_mode = "spatial"; // spatial | spacetime
  int max_outer_iters = 200;
  double grad_tol = 1e-6; // relative to the initial gradient norm
  int lbfgs_memory = 10;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double initial_step = 1.0;
  double inner_tol = 1e-12;
  double helmholtz_tol = 1e-13;
  std::uint64_t seed = 1;
  int directions = 5;
  double fd_step = 1e-5;
  int steps = 1000; // flow integration steps
  int samples = 33; // oracle grid points per axis

  [[nodiscard]] OuterConfig outer() const;
  [[nodiscard]] int resolved_n_time() const { return n_time > 0 ? n_time : n_space; }
};

/// Overwrites fields named in the JSON object; unknown keys and wrong types
/// throw ConfigError.
void merge_json(RunConfig& config, const std::string& json_text);
RunConfig load_config_file(const std::string& path);

std::string to_json(const RunConfig& config);

/// Rejects values outside their domains.
void validate(const RunConfig& config);

std::vector<int> parse_levels(const std::string& text);

} // namespace stm
