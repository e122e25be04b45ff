// Command-line driver: convergence tables, oracle evaluation, matching runs
// and gradient checks.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "stmeta/config.hpp"
#include "stmeta/io.hpp"
#include "stmeta/outer.hpp"

namespace fs = std::filesystem;
using namespace stm;

namespace {

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kUsage = 2;

bool extra_velocity_zero = false;
bool extra_control_zero = false;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag values; unset flags leave the file/default value alone.
struct Overrides {
  std::optional<std::string> config;
  std::optional<int> dim, n_space, n_time, case_id, max_outer_iters, lbfgs_memory, directions, steps, samples;
  std::optional<bool> periodic;
  std::optional<std::string> levels, element, reference, seam, output_dir, template_path, target_path, grad_mode,
      velocity, control;
  std::optional<double> sigma_inv2, alpha, grad_tol, armijo_c1, backtrack, initial_step, inner_tol, helmholtz_tol,
      fd_step;
  std::optional<std::uint64_t> seed;
};

void add_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "JSON config file; flags override its values");
  app->add_option("--dim", o.dim, "spatial dimension (1 or 2)");
  app->add_option("--n-space", o.n_space, "cells per spatial axis");
  app->add_option("--n-time", o.n_time, "cells in time (0: same as n-space)");
  app->add_option("--periodic", o.periodic, "periodic spatial boundary (true/false)");
  app->add_option("--case", o.case_id, "catalog case id");
  app->add_option("--levels", o.levels, "comma-separated h^-1 values");
  app->add_option("--element", o.element, "q1 or p1");
  app->add_option("--reference", o.reference, "error reference: interpolant or exact");
  app->add_option("--seam", o.seam, "periodized or verbatim catalog profiles");
  app->add_option("--output-dir", o.output_dir, "directory for all outputs");
  app->add_option("--template", o.template_path, "template image (t = 0): CSV for d=1, PGM for d=2");
  app->add_option("--target", o.target_path, "target image (t = 1)");
  app->add_option("--sigma-inv2", o.sigma_inv2, "matching penalty");
  app->add_option("--alpha", o.alpha, "Helmholtz length scale");
  app->add_option("--grad-mode", o.grad_mode, "spatial or spacetime Helmholtz gradient");
  app->add_option("--max-outer-iters", o.max_outer_iters, "L-BFGS iteration cap");
  app->add_option("--grad-tol", o.grad_tol, "stop at this fraction of the initial gradient norm");
  app->add_option("--lbfgs-memory", o.lbfgs_memory, "L-BFGS pairs kept");
  app->add_option("--armijo-c1", o.armijo_c1, "sufficient decrease constant");
  app->add_option("--backtrack", o.backtrack, "step reduction factor");
  app->add_option("--initial-step", o.initial_step, "first trial step");
  app->add_option("--inner-tol", o.inner_tol, "inner CG relative tolerance");
  app->add_option("--helmholtz-tol", o.helmholtz_tol, "Helmholtz CG relative tolerance");
  app->add_option("--seed", o.seed, "seed for random probes");
  app->add_option("--directions", o.directions, "finite-difference directions");
  app->add_option("--fd-step", o.fd_step, "finite-difference step");
  app->add_option("--steps", o.steps, "flow integration steps");
  app->add_option("--samples", o.samples, "oracle grid points per axis");
  app->add_option("--velocity", o.velocity, "oracle velocity: case or zero");
  app->add_option("--control", o.control, "gradcheck control: random or zero");
}

// Fields the RunConfig does not carry.
struct Extra {
  std::string velocity = "case";
  std::string control = "random";
};

RunConfig resolve(const Overrides& o, Extra& extra) {
  RunConfig c = o.config ? load_config_file(*o.config) : RunConfig{};
  auto set = [](auto& field, const auto& opt) {
    if (opt) field = *opt;
  };
  set(c.dim, o.dim);
  set(c.n_space, o.n_space);
  set(c.n_time, o.n_time);
  set(c.periodic, o.periodic);
  set(c.case_id, o.case_id);
  if (o.levels) c.levels = parse_levels(*o.levels);
  set(c.element, o.element);
  set(c.reference, o.reference);
  set(c.seam, o.seam);
  set(c.output_dir, o.output_dir);
  set(c.template_path, o.template_path);
  set(c.target_path, o.target_path);
  set(c.sigma_inv2, o.sigma_inv2);
  set(c.alpha, o.alpha);
  set(c.grad_mode, o.grad_mode);
  set(c.max_outer_iters, o.max_outer_iters);
  set(c.grad_tol, o.grad_tol);
  set(c.lbfgs_memory, o.lbfgs_memory);
  set(c.armijo_c1, o.armijo_c1);
  set(c.backtrack, o.backtrack);
  set(c.initial_step, o.initial_step);
  set(c.inner_tol, o.inner_tol);
  set(c.helmholtz_tol, o.helmholtz_tol);
  set(c.seed, o.seed);
  set(c.directions, o.directions);
  set(c.fd_step, o.fd_step);
  set(c.steps, o.steps);
  set(c.samples, o.samples);
  set(extra.velocity, o.velocity);
  set(extra.control, o.control);
  if (extra.velocity != "case" && extra.velocity != "zero") throw ConfigError("velocity must be case or zero");
  if (extra.control != "random" && extra.control != "zero") throw ConfigError("control must be random or zero");
  validate(c);
  return c;
}

void prepare_output(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + c.output_dir + ": " + ec.message());
  write_text((fs::path(c.output_dir) / "config.json").string(), to_json(c));
}

std::string out_path(const RunConfig& c, const std::string& name) {
  return (fs::path(c.output_dir) / name).string();
}

ManufacturedCase lookup_case(const RunConfig& c) {
  try {
    return manufactured_case(c.dim, c.case_id, c.seam == "verbatim" ? SeamTreatment::verbatim
                                                                    : SeamTreatment::periodized);
  } catch (const std::out_of_range& e) {
    throw UsageError(e.what());
  }
}

// Image data for the matching commands: files when given, else two
// Gaussians offset by 0.25.
struct MatchData {
  SpaceTimeFn i0, i1;
  IntensityMap map;
};

MatchData load_images(const RunConfig& c) {
  MatchData data;
  if (c.template_path.empty() != c.target_path.empty())
    throw UsageError("give both --template and --target, or neither");
  if (c.template_path.empty()) {
    if (c.dim == 1) {
      data.i0 = [](const Point& p) { return std::exp(-100.0 * (p[0] - 0.375) * (p[0] - 0.375)); };
      data.i1 = [](const Point& p) { return std::exp(-100.0 * (p[0] - 0.625) * (p[0] - 0.625)); };
    } else {
      auto blob = [](double cx, double cy) {
        return [cx, cy](const Point& p) {
          return std::exp(-50.0 * ((p[0] - cx) * (p[0] - cx) + (p[1] - cy) * (p[1] - cy)));
        };
      };
      data.i0 = blob(0.375, 0.375);
      data.i1 = blob(0.625, 0.625);
    }
    return data;
  }
  if (c.dim == 1) {
    auto s0 = std::make_shared<Signal1D>(read_signal_csv(c.template_path));
    auto s1 = std::make_shared<Signal1D>(read_signal_csv(c.target_path));
    data.i0 = [s0](const Point& p) { return s0->at(p[0]); };
    data.i1 = [s1](const Point& p) { return s1->at(p[0]); };
  } else {
    auto g0 = std::make_shared<GrayImage>(read_pgm(c.template_path));
    auto g1 = std::make_shared<GrayImage>(read_pgm(c.target_path));
    if (g0->width != g1->width || g0->height != g1->height)
      throw IoError("template and target sizes differ");
    // Both images share the template's map so relative intensities survive.
    IntensityMap map;
    map.min = std::min(*std::min_element(g0->pixels.begin(), g0->pixels.end()),
                       *std::min_element(g1->pixels.begin(), g1->pixels.end()));
    map.max = std::max(*std::max_element(g0->pixels.begin(), g0->pixels.end()),
                       *std::max_element(g1->pixels.begin(), g1->pixels.end()));
    const double range = map.max > map.min ? map.max - map.min : 1.0;
    for (auto* g : {g0.get(), g1.get()})
      for (auto& v : g->pixels) v = (v - map.min) / range;
    data.map = map;
    data.i0 = [g0](const Point& p) { return g0->sample(p[0], p[1]); };
    data.i1 = [g1](const Point& p) { return g1->sample(p[0], p[1]); };
  }
  return data;
}

void print_report(const ConvergenceReport& r) {
  std::printf("%-6s %-12s %-7s %-12s %-7s\n", "h^-1", "L2 error", "order", "energy", "order");
  for (const auto& l : r.levels) {
    if (!l.ok) {
      std::printf("%-6d failed: %s\n", l.h_inverse, l.failure.c_str());
      continue;
    }
    auto ord = [](const std::optional<double>& o) {
      char b[16];
      if (o) std::snprintf(b, sizeof b, "%.2f", *o);
      else std::snprintf(b, sizeof b, "-");
      return std::string(b);
    };
    std::printf("%-6d %-12.4e %-7s %-12.4e %-7s\n", l.h_inverse, l.l2_error, ord(l.l2_order).c_str(),
                l.energy_error, ord(l.energy_order).c_str());
  }
}

int cmd_convergence(const RunConfig& c0) {
  RunConfig c = c0;
  const auto mc = lookup_case(c);
  if (c.levels.empty()) {
    c.levels = c.dim == 1 ? std::vector<int>{4, 16, 36, 64, 100, 144, 196, 256}
                          : std::vector<int>{5, 10, 15, 20, 25, 30};
  }
  prepare_output(c);
  ConvergenceOptions opt;
  opt.n_time = c.n_time;
  opt.periodic = c.periodic;
  opt.element = c.element == "p1" ? ElementFamily::simplex_p1 : ElementFamily::tensor_q1;
  opt.reference = c.reference == "exact" ? ErrorReference::exact : ErrorReference::interpolant;
  opt.cg.tol_rel = c.inner_tol;
  const auto report = run_convergence_study(mc, c.levels, opt);
  const auto path = out_path(c, "case" + std::to_string(c.case_id) + "_d" + std::to_string(c.dim) + ".csv");
  write_text(path, report.to_csv());
  std::printf("case %d, d = %d: %s\n", mc.id, mc.dim, mc.description.c_str());
  print_report(report);
  std::printf("wrote %s\n", path.c_str());
  return report.all_ok() ? kOk : kNumerical;
}

int cmd_match(const RunConfig& c) {
  prepare_output(c);
  const auto data = load_images(c);
  const auto mesh = build_space_time_mesh(c.dim, c.n_space, c.resolved_n_time(), c.periodic);
  OuterProblem problem(mesh, boundary_constraints(mesh, data.i0, data.i1), c.outer());
  const auto result = problem.minimize(NodalField(c.dim, mesh.n_dofs), [](const OuterState&, const IterationRecord& r) {
    std::printf("iter %4d  objective %.6e  |grad| %.3e  step %.3e  cg %zu\n", r.iter, r.objective, r.grad_norm,
                r.step_length, r.inner_cg_iters);
  });
  write_text(out_path(c, "trace.csv"), result.trace_csv());
  write_velocity_csv(out_path(c, "velocity.csv"), mesh, result.state.velocity);
  for (const auto& frame : sample_frames(mesh, result.state.image.image)) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_t%.2f", frame.t);
    if (c.dim == 1) write_frame_csv(out_path(c, std::string(name) + ".csv"), frame);
    else write_frame_pgm(out_path(c, std::string(name) + ".pgm"), frame, data.map);
  }
  const double e0 = result.trace.front().matching_energy;
  std::printf("%s; matching energy %.6e -> %.6e\n", result.message.c_str(), e0, result.state.matching_energy);
  return result.status == MinimizeStatus::line_search_failed ? kNumerical : kOk;
}

int cmd_oracle(const RunConfig& c) {
  prepare_output(c);
  // Boundary images from files when given, else the catalog case traces.
  ImageFn i0, i1;
  std::optional<ManufacturedCase> mc;
  if (extra_velocity_zero == false || c.template_path.empty()) mc = lookup_case(c);
  if (!c.template_path.empty() || !c.target_path.empty()) {
    const auto data = load_images(c);
    auto wrap = [](SpaceTimeFn f) {
      return ImageFn([f](const SpatialPoint& x) { return f(Point{x[0], x[1], 0.0}); });
    };
    i0 = wrap(data.i0);
    i1 = wrap(data.i1);
  } else {
    i0 = mc->trace(0.0);
    i1 = mc->trace(1.0);
  }
  FlowField flow = zero_flow(c.dim);
  flow.periodic = c.periodic;
  if (!extra_velocity_zero) flow = mc->flow();

  const int n = c.samples;
  auto grid = [n](int i) { return static_cast<double>(i) / (n - 1); };
  const std::vector<double> times =
      c.dim == 1 ? std::vector<double>{} : std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0};
  std::ostringstream csv;
  csv << (c.dim == 1 ? "x,t,image,z\n" : "x,y,t,image,z\n");
  double worst_round_trip = 0.0;
  char buf[160];
  auto emit = [&](const SpatialPoint& x, double t) {
    // The last lattice column duplicates x = 0 on periodic domains.
    const SpatialPoint xq{flow.periodic && x[0] >= 1.0 ? 0.0 : x[0], flow.periodic && x[1] >= 1.0 ? 0.0 : x[1]};
    const auto v = eulerian_solution(flow, i0, i1, xq, t, c.steps);
    worst_round_trip = std::max(worst_round_trip, v.round_trip_error);
    if (c.dim == 1) std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12e,%.12e\n", x[0], t, v.image, v.z);
    else std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.12e,%.12e\n", x[0], x[1], t, v.image, v.z);
    csv << buf;
  };
  if (c.dim == 1) {
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i) emit({grid(i), 0.0}, grid(k));
  } else {
    for (double t : times)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) emit({grid(i), grid(j)}, t);
  }
  write_text(out_path(c, "oracle.csv"), csv.str());
  const auto cons = conservation_check(flow, c.dim == 1 ? 256 : 32, c.steps);
  std::printf("oracle grid: %s\n", out_path(c, "oracle.csv").c_str());
  std::printf("max round-trip error: %.3e\n", worst_round_trip);
  std::printf("conservation drift: %.3e (%d steps)\n", cons.max_drift, c.steps);
  return cons.max_drift <= 1e-8 ? kOk : kNumerical;
}

int cmd_gradcheck(const RunConfig& c) {
  prepare_output(c);
  const auto data = load_images(c);
  const auto mesh = build_space_time_mesh(c.dim, c.n_space, c.resolved_n_time(), c.periodic);
  OuterProblem problem(mesh, boundary_constraints(mesh, data.i0, data.i1), c.outer());
  NodalField v0(c.dim, mesh.n_dofs);
  if (!extra_control_zero) {
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal(0.0, 0.1);
    for (auto& v : v0.values) v = normal(rng);
  }
  const auto state = problem.reduced_objective(v0);
  const auto grad = problem.reduced_gradient(state);
  const double gnorm = norm2(grad.values);
  const auto check = check_gradient(problem, v0, c.directions, c.fd_step, c.seed);
  std::printf("objective %.10e, gradient norm %.6e\n", state.objective, gnorm);
  std::printf("%-4s %-18s %-18s %-10s\n", "dir", "analytic", "central diff", "rel error");
  for (std::size_t k = 0; k < check.relative_error.size(); ++k) {
    std::printf("%-4zu %-18.10e %-18.10e %-10.3e\n", k, check.directional[k], check.finite_difference[k],
                check.relative_error[k]);
  }
  const bool ok = check.max_relative_error < 1e-4;
  std::printf("%s: max relative error %.3e\n", ok ? "ok" : "mismatch", check.max_relative_error);
  return ok ? kOk : kNumerical;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time least-squares metamorphosis toolkit"};
  app.require_subcommand(1);
  Overrides o;
  auto* conv = app.add_subcommand("convergence", "manufactured-solution convergence table");
  auto* match = app.add_subcommand("match", "image matching by L-BFGS on the reduced objective");
  auto* oracle = app.add_subcommand("oracle", "Lagrangian closed-form solution and conservation check");
  auto* grad = app.add_subcommand("gradcheck", "reduced gradient against central differences");
  for (auto* sub : {conv, match, oracle, grad}) add_flags(sub, o);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  try {
    Extra extra;
    const RunConfig c = resolve(o, extra);
    extra_velocity_zero = extra.velocity == "zero";
    extra_control_zero = extra.control == "zero";
    if (*conv) return cmd_convergence(c);
    if (*match) return cmd_match(c);
    if (*oracle) return cmd_oracle(c);
    if (*grad) return cmd_gradcheck(c);
    return kUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const IoError& e) {
    std::fprintf(stderr, "input/output error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  }
}
