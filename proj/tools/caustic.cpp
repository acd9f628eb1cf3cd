// caustic: command-line front end for source fitting, lens design,
// rendering and image metrics.
//
// Exit codes: 0 ok, 1 bad input, 2 optimizer stopped before convergence.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "caustic/config.hpp"
#include "caustic/io.hpp"
#include "caustic/metrics.hpp"
#include "caustic/oracle.hpp"
#include "caustic/pipeline.hpp"

namespace fs = std::filesystem;
using namespace caustic;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

struct Common {
  std::string config_path;
  std::string output_dir;
  int threads = 0;
  std::string profile;

  RunConfig load() const {
    RunConfig c;
    if (!config_path.empty()) c = load_config(config_path);
    else if (profile == "desk") c = desk_profile();
    else c = paper_profile();
    if (!output_dir.empty()) c.output_dir = output_dir;
    if (threads > 0) c.render.threads = threads;
    c.validate();
    return c;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_path, "INI run configuration");
  app->add_option("-o,--out-dir", c.output_dir, "output directory (overrides the config)");
  app->add_option("-j,--threads", c.threads, "render threads");
  app->add_option("--defaults", c.profile, "profile when no config is given: paper or desk")
      ->check(CLI::IsMember({"paper", "desk"}));
}

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.ini") << format_config(cfg);
  return dir;
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

const PlaneConfig& pick_plane(const RunConfig& cfg, const std::string& which) {
  return which == "design" ? cfg.design_plane : cfg.fit_plane;
}

void print_progress(const char* stage, const TraceRow& row) {
  if (row.iter % 100 == 0)
    std::fprintf(stderr, "%s iter %ld  E %.6e  |g| %.3e\n", stage, row.iter, row.value, row.grad_norm);
}

int stop_code(const SolverResult& r) { return r.converged() ? kOk : kNotConverged; }

// ---------------------------------------------------------------------------

struct FitArgs {
  Common common;
  std::vector<std::string> refs;  // "lens.obj,image.pgm"
  std::vector<int> counts;
};

int run_fit(const FitArgs& a) {
  RunConfig cfg = a.common.load();
  for (const auto& r : a.refs) {
    const auto comma = r.find(',');
    if (comma == std::string::npos) throw ConfigError("--ref expects lens.obj,image.pgm");
    cfg.references.push_back({r.substr(0, comma), r.substr(comma + 1)});
  }
  if (cfg.references.empty()) throw ConfigError("source fitting needs at least one reference pair");

  SourceFitProblem problem;
  problem.plane = cfg.fit_plane.plane();
  problem.weights = cfg.fit_weights;
  problem.gamma = Gamma{cfg.gamma};
  problem.render = cfg.render;
  const Symmetry symmetry = cfg.sources.init == InitMode::QuadrantSymmetric ? Symmetry::Quadrant : Symmetry::None;
  problem.parameterization = SourceParameterization(cfg.sources.size, symmetry, cfg.sources.contraction);
  for (const auto& r : cfg.references) problem.references.push_back({read_obj(r.lens_obj), read_pgm(r.image_pgm)});
  problem.validate();

  const fs::path dir = prepare_output(cfg);
  const std::vector<int> counts = a.counts.empty() ? std::vector<int>{cfg.sources.count} : a.counts;
  int code = kOk;
  for (int n : counts) {
    const std::string tag = counts.size() > 1 ? "_n" + std::to_string(n) : "";
    SolverConfig solver = cfg.fit_solver;
    solver.trace_path = (dir / ("fit_trace" + tag + ".csv")).string();
    const PointSourceSet initial = init_sources(n, cfg.sources.size, cfg.sources.init);
    const FitResult fit =
        fit_sources(problem, initial, solver, [](const TraceRow& r) { print_progress("fit", r); });
    write_source_table((dir / ("sources" + tag + ".txt")).string(), fit.sources);

    KeyValues report{{"emitters", std::to_string(n)},
                     {"stop", to_string(fit.solver.reason)},
                     {"iterations", std::to_string(fit.solver.iterations)},
                     {"flux_error_initial", fmt(fit.initial_flux_error, 10)},
                     {"flux_error_final", fmt(fit.final_flux_error, 10)}};
    for (std::size_t m = 0; m < problem.references.size(); ++m) {
      const auto& ref = problem.references[m];
      const double brightness = total_brightness(ref.reference, problem.gamma);
      const GrayImage before = render_gray(initial, ref.lens, problem.plane, brightness, problem.gamma, cfg.render);
      const GrayImage after = render_gray(fit.sources, ref.lens, problem.plane, brightness, problem.gamma, cfg.render);
      const std::string id = std::to_string(m + 1) + tag;
      write_pgm((dir / ("render_" + id + ".pgm")).string(), after);
      write_pgm((dir / ("error_" + id + ".pgm")).string(), error_map(after, ref.reference));
      const GrayImage& target = ref.reference;
      auto metric_of = [&](const GrayImage& g) {
        return cfg.quantized_metrics ? std::pair{mae(quantized8(g), quantized8(target)), psnr(quantized8(g), quantized8(target))}
                                     : std::pair{mae(g, target), psnr(g, target)};
      };
      const auto [mae0, psnr0] = metric_of(before);
      const auto [mae1, psnr1] = metric_of(after);
      report.push_back({"ref" + id + "_mae_initial", fmt(mae0)});
      report.push_back({"ref" + id + "_mae_final", fmt(mae1)});
      report.push_back({"ref" + id + "_psnr_initial", format_psnr(psnr0)});
      report.push_back({"ref" + id + "_psnr_final", format_psnr(psnr1)});
    }
    write_sidecar((dir / ("fit_report" + tag + ".txt")).string(), report);
    std::printf("N=%d  %s after %ld iterations  E_flux %.6e -> %.6e\n", n, to_string(fit.solver.reason),
                fit.solver.iterations, fit.initial_flux_error, fit.final_flux_error);
    if (!fit.solver.converged()) code = kNotConverged;
  }
  return code;
}

// ---------------------------------------------------------------------------

struct DesignArgs {
  Common common;
  std::string sources;
  std::string target;
};

int run_design(const DesignArgs& a) {
  const RunConfig cfg = a.common.load();
  LensDesignProblem problem;
  problem.sources = read_source_table(a.sources).normalized();
  problem.target = read_pgm(a.target);
  problem.lens = cfg.initial_lens();
  problem.plane = cfg.design_plane.plane();
  problem.weights = cfg.design_weights;
  problem.pin_boundary = cfg.lens.pin_boundary;
  problem.gamma = Gamma{cfg.gamma};
  problem.render = cfg.render;
  problem.validate();

  const fs::path dir = prepare_output(cfg);
  SolverConfig solver = cfg.design_solver;
  solver.trace_path = (dir / "design_trace.csv").string();
  const DesignResult res = design_lens(problem, solver, cfg.design_schedule, [](const TraceRow& r) { print_progress("design", r); });
  write_obj((dir / "lens.obj").string(), res.lens);

  const double brightness = total_brightness(problem.target, problem.gamma);
  const GrayImage rendered =
      render_gray(problem.sources, res.lens, problem.plane, brightness, problem.gamma, cfg.render);
  write_pgm((dir / "render.pgm").string(), rendered);
  write_pgm((dir / "error.pgm").string(), error_map(rendered, problem.target));

  const auto& d = res.final_terms.diagnostics;
  KeyValues report{{"stop", to_string(res.solver.reason)},
                   {"iterations", std::to_string(res.solver.iterations)},
                   {"E_initial", fmt(res.initial_terms.total, 10)},
                   {"E_final", fmt(res.final_terms.total, 10)},
                   {"E_img", fmt(res.final_terms.image, 10)},
                   {"E_grad", fmt(res.final_terms.gradient, 10)},
                   {"E_out", fmt(res.final_terms.out, 10)},
                   {"E_smooth", fmt(res.final_terms.smooth, 10)},
                   {"mae", fmt(mae(rendered, problem.target))},
                   {"psnr", format_psnr(psnr(rendered, problem.target))},
                   {"tir_fraction", fmt(d.tir_fraction())}};
  if (d.tir_fraction() > 0.01) {
    std::fprintf(stderr, "warning: %.1f%% of emitter-triangle pairs hit total internal reflection\n",
                 100 * d.tir_fraction());
    report.push_back({"warning", "total internal reflection above 1%"});
  }
  write_sidecar((dir / "design_report.txt").string(), report);
  std::printf("%s after %ld iterations  E %.6e -> %.6e\n", to_string(res.solver.reason), res.solver.iterations,
              res.initial_terms.total, res.final_terms.total);
  return stop_code(res.solver);
}

// ---------------------------------------------------------------------------

struct RenderArgs {
  Common common;
  std::string lens, sources, plane = "fit", out, flux_out, match;
  double brightness = 0;
};

/// Scale so the brightest pixel maps to 1 when no brightness is given.
double peak_brightness(const FluxImage& flux, const Gamma&) {
  double peak = 0;
  for (double v : flux.data) peak = std::max(peak, v);
  if (!(peak > 0)) throw ConfigError("render holds no flux");
  return flux.total() / peak;
}

int run_render(const RenderArgs& a) {
  const RunConfig cfg = a.common.load();
  const Gamma gamma{cfg.gamma};
  const LensSurface lens = read_obj(a.lens);
  const PointSourceSet sources = read_source_table(a.sources);
  const ImagePlane plane = pick_plane(cfg, a.plane).plane();
  const RenderResult r = render(sources, lens, plane, cfg.render);
  double g = a.brightness;
  if (!a.match.empty()) g = total_brightness(read_pgm(a.match), gamma);
  if (!(g > 0)) g = peak_brightness(r.flux, gamma);
  write_pgm(a.out, flux_to_gray(r.flux, g, gamma));
  if (!a.flux_out.empty()) write_pfm(a.flux_out, r.flux);
  std::printf("flux %.9e  escaped %.9e  tir %.4f\n", r.flux.total(), r.flux.escaped, r.diagnostics.tir_fraction());
  return kOk;
}

struct OracleArgs {
  Common common;
  std::string lens, plane = "fit", out, profile = "uniform";
  int grid = 0;
  double brightness = 0;
};

int run_oracle(const OracleArgs& a) {
  const RunConfig cfg = a.common.load();
  const LensSurface lens = read_obj(a.lens);
  const ImagePlane plane = pick_plane(cfg, a.plane).plane();
  const int grid = a.grid > 0 ? a.grid : cfg.oracle_grid;
  const SourceProfile profile = a.profile == "center" ? SourceProfile::CenterWeighted : SourceProfile::Uniform;
  std::optional<double> g;
  if (a.brightness > 0) g = a.brightness;
  const GrayImage img = dense_grid_render(grid, cfg.sources.size, lens, plane, g, profile, cfg.render);
  write_pgm(a.out, img, 16);
  write_sidecar(fs::path(a.out).replace_extension(".txt").string(),
                {{"grid", std::to_string(grid)},
                 {"source_size", fmt(cfg.sources.size)},
                 {"profile", a.profile},
                 {"brightness", g ? fmt(*g, 10) : "peak"},
                 {"plane_z", fmt(plane.z)},
                 {"plane_width", fmt(plane.width)},
                 {"plane_height", fmt(plane.height)},
                 {"gamma", fmt(cfg.gamma)}});
  return kOk;
}

struct CompareArgs {
  std::string a, b, out;
  bool quantized = false;
};

int run_metrics(const CompareArgs& a) {
  GrayImage x = read_pgm(a.a), y = read_pgm(a.b);
  if (a.quantized) {
    x = quantized8(x);
    y = quantized8(y);
  }
  std::printf("MAE %.9g\nPSNR %s dB\n", mae(x, y), format_psnr(psnr(x, y)).c_str());
  return kOk;
}

int run_errormap(const CompareArgs& a) {
  const GrayImage x = read_pgm(a.a), y = read_pgm(a.b);
  const GrayImage e = error_map(x, y);
  write_pgm(a.out, e, 16);
  double peak = 0;
  for (double v : e.data) peak = std::max(peak, v);
  write_sidecar(fs::path(a.out).replace_extension(".txt").string(),
                {{"mae", fmt(mae(x, y), 9)}, {"max_error", fmt(peak, 9)}, {"psnr", format_psnr(psnr(x, y))}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Caustic lens design with an extended light source model"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-source", "fit a point-emitter source model to reference caustics");
  add_common(fit_cmd, fit.common);
  fit_cmd->add_option("--ref", fit.refs, "reference pair lens.obj,image.pgm (repeatable)");
  fit_cmd->add_option("-n,--count", fit.counts, "emitter count; several values run a sweep");

  DesignArgs design;
  auto* design_cmd = app.add_subcommand("design-lens", "optimize the lens back surface toward a target image");
  add_common(design_cmd, design.common);
  design_cmd->add_option("--sources", design.sources, "emitter table")->required();
  design_cmd->add_option("--target", design.target, "target PGM")->required();

  RenderArgs rend;
  auto* render_cmd = app.add_subcommand("render", "render a lens with an emitter table");
  add_common(render_cmd, rend.common);
  render_cmd->add_option("--lens", rend.lens, "lens OBJ")->required();
  render_cmd->add_option("--sources", rend.sources, "emitter table")->required();
  render_cmd->add_option("--plane", rend.plane, "fit or design")->check(CLI::IsMember({"fit", "design"}));
  render_cmd->add_option("--brightness", rend.brightness, "total gamma brightness G");
  render_cmd->add_option("--match", rend.match, "take G from this PGM");
  render_cmd->add_option("--flux", rend.flux_out, "also write raw flux as PFM");
  render_cmd->add_option("out", rend.out, "output PGM")->required();

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle-render", "dense emitter lattice render (16-bit PGM + sidecar)");
  add_common(oracle_cmd, oracle.common);
  oracle_cmd->add_option("--lens", oracle.lens, "lens OBJ")->required();
  oracle_cmd->add_option("--plane", oracle.plane, "fit or design")->check(CLI::IsMember({"fit", "design"}));
  oracle_cmd->add_option("--grid", oracle.grid, "lattice side (default from config)");
  oracle_cmd->add_option("--profile", oracle.profile, "uniform or center")
      ->check(CLI::IsMember({"uniform", "center"}));
  oracle_cmd->add_option("--brightness", oracle.brightness, "total gamma brightness G (default: peak = 1)");
  oracle_cmd->add_option("out", oracle.out, "output PGM")->required();

  CompareArgs metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "MAE and PSNR between two PGMs");
  metrics_cmd->add_option("a", metrics.a)->required();
  metrics_cmd->add_option("b", metrics.b)->required();
  metrics_cmd->add_flag("--quantized", metrics.quantized, "compare 8-bit levels");

  CompareArgs errormap;
  auto* errormap_cmd = app.add_subcommand("errormap", "absolute error PGM plus summary");
  errormap_cmd->add_option("a", errormap.a)->required();
  errormap_cmd->add_option("b", errormap.b)->required();
  errormap_cmd->add_option("out", errormap.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*design_cmd) return run_design(design);
    if (*render_cmd) return run_render(rend);
    if (*oracle_cmd) return run_oracle(oracle);
    if (*metrics_cmd) return run_metrics(metrics);
    if (*errormap_cmd) return run_errormap(errormap);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  }
  return kInputError;
}
