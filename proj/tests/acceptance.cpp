// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance            all criteria
//   acceptance 1 3 10     a subset
//
// Fits and lens designs are computed once and shared between criteria.
// Artifacts (source tables, lenses, renders, traces) go to $CAUSTIC_ACCEPTANCE_DIR
// or ./acceptance_out. The PASS/FAIL lines are also written to summary.txt there.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>

#include "caustic/config.hpp"
#include "caustic/curvature.hpp"
#include "caustic/io.hpp"
#include "caustic/metrics.hpp"
#include "caustic/optics.hpp"
#include "caustic/oracle.hpp"
#include "caustic/pipeline.hpp"
#include "caustic/quartic.hpp"
#include "metric_fixtures.hpp"
#include "optics_scenes.hpp"
#include "scenes.hpp"

using namespace caustic;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path out_dir() {
  const char* env = std::getenv("CAUSTIC_ACCEPTANCE_DIR");
  const fs::path dir = env ? fs::path(env) : fs::path("acceptance_out");
  fs::create_directories(dir);
  return dir;
}

bool monotone(const SolverResult& r) {
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    if (r.trace[i].value > r.trace[i - 1].value) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Desk-scale scenes

constexpr int kLensGrid = 65;
constexpr int kRes = 128;
constexpr int kOracleGrid = 8;  // reference generator for source fitting
constexpr int kEvalGrid = 32;   // oracle for evaluating designed lenses
constexpr SourceProfile kProfile = SourceProfile::Uniform;

SolverConfig fit_solver() {
  SolverConfig c = desk_profile().fit_solver;
  c.grad_tol = 4e-4;
  c.max_iters = 750;
  return c;
}

SolverConfig design_solver() {
  SolverConfig c = desk_profile().design_solver;
  c.max_iters = 300;
  return c;
}

DesignSchedule design_schedule() {
  DesignSchedule s = desk_profile().design_schedule;
  s.level_iters = 150;
  return s;
}

/// Records every pipeline trace for the solver sanity criterion.
struct TraceLog {
  std::vector<std::pair<std::string, bool>> runs;
  void add(const std::string& name, const SolverResult& r) { runs.push_back({name, monotone(r)}); }
};

class Workspace {
 public:
  Workspace() : dir_(out_dir()) {}

  const SourceFitProblem& fit_problem(bool contraction) {
    auto& slot = contraction ? fit_on_ : fit_off_;
    if (!slot) {
      SourceFitProblem p;
      p.plane = {150, 9.9, 9.9, kRes, kRes};
      p.parameterization = SourceParameterization(1.0, Symmetry::None, contraction);
      for (double phase : {0.0, 1.3}) {
        const LensSurface lens = test::bumpy_lens(kLensGrid, 10, 120, 121.6, 0.3, phase);
        p.references.push_back({lens, dense_grid_render(kOracleGrid, 1.0, lens, p.plane, std::nullopt, kProfile)});
      }
      for (std::size_t m = 0; m < p.references.size(); ++m)
        write_pgm((dir_ / format("reference_%zu.pgm", m + 1)).string(), p.references[m].reference, 16);
      slot = std::move(p);
    }
    return *slot;
  }

  struct Fit {
    FitResult result;
    double seconds = 0;
    double mae_initial = 0, mae_final = 0;
  };

  const Fit& fit(int n, bool contraction = true) {
    const auto key = std::pair{n, contraction};
    if (auto it = fits_.find(key); it != fits_.end()) return it->second;
    const SourceFitProblem& p = fit_problem(contraction);
    const PointSourceSet init = init_sources(n, 1.0, InitMode::Grid);
    SolverConfig solver = fit_solver();
    const std::string tag = format("n%d%s", n, contraction ? "" : "_penalty");
    solver.trace_path = (dir_ / ("fit_trace_" + tag + ".csv")).string();
    std::fprintf(stderr, "fitting N=%d (%s)\n", n, contraction ? "contraction" : "penalty");
    const auto t0 = Clock::now();
    Fit f;
    f.result = fit_sources(p, init, solver);
    f.seconds = seconds_since(t0);
    write_source_table((dir_ / ("sources_" + tag + ".txt")).string(), f.result.sources);
    f.mae_initial = mean_mae(init, p);
    f.mae_final = mean_mae(f.result.sources, p);
    traces.add("fit " + tag, f.result.solver);
    return fits_.emplace(key, std::move(f)).first->second;
  }

  /// Binary disk on the design plane.
  const GrayImage& disk_target() {
    if (!disk_) {
      const ImagePlane plane = design_plane();
      GrayImage t(kRes, kRes);
      for (int v = 0; v < kRes; ++v)
        for (int u = 0; u < kRes; ++u) {
          const double x = plane.column_edge(u) + 0.5 * plane.pixel_w(), y = plane.row_edge(v) + 0.5 * plane.pixel_h();
          t.at(u, v) = x * x + y * y <= 4.0 * 4.0 ? 1.0 : 0.0;
        }
      write_pgm((dir_ / "target_disk.pgm").string(), t);
      disk_ = std::move(t);
    }
    return *disk_;
  }

  static ImagePlane design_plane() { return {240, 20, 20, kRes, kRes}; }

  struct Design {
    DesignResult result;
    double seconds = 0;
    GrayImage oracle;  ///< dense-grid render of the designed lens
    double mae = 0, psnr = 0;
  };

  /// Lens designed against the disk with the given emitter model and weights.
  const Design& design(const std::string& name, const PointSourceSet& sources, const LensDesignWeights& weights) {
    if (auto it = designs_.find(name); it != designs_.end()) return it->second;
    LensDesignProblem p;
    p.sources = sources;
    p.target = disk_target();
    p.lens = build_grid_lens(kLensGrid, kLensGrid, 10, 10, 120, 121, 1.49);
    p.plane = design_plane();
    p.weights = weights;
    SolverConfig solver = design_solver();
    solver.trace_path = (dir_ / ("design_trace_" + name + ".csv")).string();
    std::fprintf(stderr, "designing %s\n", name.c_str());
    const auto t0 = Clock::now();
    Design d;
    d.result = design_lens(p, solver, design_schedule());
    d.seconds = seconds_since(t0);
    const double brightness = total_brightness(p.target);
    d.oracle = dense_grid_render(kEvalGrid, 1.0, d.result.lens, p.plane, brightness, kProfile);
    d.mae = mae(d.oracle, p.target);
    d.psnr = psnr(d.oracle, p.target);
    write_obj((dir_ / ("lens_" + name + ".obj")).string(), d.result.lens);
    write_pgm((dir_ / ("oracle_" + name + ".pgm")).string(), d.oracle);
    for (const auto& level : d.result.levels) traces.add("design " + name + " (coarse level)", level);
    traces.add("design " + name, d.result.solver);
    return designs_.emplace(name, std::move(d)).first->second;
  }

  TraceLog traces;

 private:
  static double mean_mae(const PointSourceSet& s, const SourceFitProblem& p) {
    double sum = 0;
    for (const auto& r : p.references)
      sum += mae(render_gray(s, r.lens, p.plane, total_brightness(r.reference)), r.reference);
    return sum / p.references.size();
  }

  fs::path dir_;
  std::optional<SourceFitProblem> fit_on_, fit_off_;
  std::map<std::pair<int, bool>, Fit> fits_;
  std::optional<GrayImage> disk_;
  std::map<std::string, Design> designs_;
};

// ---------------------------------------------------------------------------
// Criteria

Outcome gradient_fidelity(Workspace&) {
  const auto t0 = Clock::now();
  const SourceFitProblem sp = test::source_fit_scene(16, 32);
  const auto sx = test::source_fit_point(sp, 2);
  const auto s = test::fd_check([&](std::span<const double> y) { return source_fit_objective(y, sp); }, sx, 1e-4);

  const LensDesignProblem dp = test::lens_design_scene(9, 32);
  LensDesignTerms terms;
  lens_design_objective(dp.lens.heights, dp, &terms);
  const bool all_terms = terms.image > 0 && terms.gradient > 0 && terms.out > 0 && terms.smooth > 0;
  const auto d =
      test::fd_check([&](std::span<const double> y) { return lens_design_objective(y, dp); }, dp.lens.heights, 1e-6);
  const double t = seconds_since(t0);

  const bool pass = s.cmp.tight_fraction() >= 0.95 && s.cmp.all_loose() && d.cmp.tight_fraction() >= 0.95 &&
                    d.cmp.all_loose() && all_terms && t < 60;
  return {pass, format("source fit %zu/%zu within 1e-4 (%zu within 1e-3), lens design %zu/%zu within 1e-4 "
                       "(%zu within 1e-3), all four terms active: %s, %.1f s",
                       s.cmp.within_tight, s.cmp.count, s.cmp.within_loose, d.cmp.within_tight, d.cmp.count,
                       d.cmp.within_loose, all_terms ? "yes" : "no", t)};
}

Outcome optics_kernels(Workspace&) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double root_gap = 0;
  for (int i = 0; i < 100000; ++i) {
    const test::Scene s = test::random_scene(rng);
    const Vec3 rel = s.back - s.source;
    const double k = incident_root(s.eta, rel.x, rel.y, rel.z, s.front_z - s.source.z);
    root_gap = std::max(root_gap, std::abs(k - snell_bisection(s.source, s.back, s.front_z, s.eta)));
  }

  const auto sphere = test::icosphere(4);
  const Vec3 apex{0.05, -0.1, 0.2};
  double omega = 0;
  for (const auto& f : sphere.faces)
    omega += solid_angle(apex, sphere.vertices[f[0]], sphere.vertices[f[1]], sphere.vertices[f[2]]);
  const double closure = std::abs(omega - 4 * std::numbers::pi) / (4 * std::numbers::pi);

  double slab = 0;
  const Vec3 n{0, 0, 1};
  for (int i = 0; i < 100000; ++i) {
    const test::Scene s = test::random_scene(rng);
    const Vec3 a = incident_point(s.source, s.back, s.front_z, s.eta);
    const Vec3 out = refract_exit(normalized(s.back - a), n, s.eta);
    slab = std::max(slab, norm(out - normalized(a - s.source)));
  }
  const double t = seconds_since(t0);
  const bool pass = root_gap <= 1e-9 && closure <= 1e-6 && slab <= 1e-10 && t < 30;
  return {pass, format("quartic vs bisection max gap %.2e over 1e5 scenes, icosphere(4) closure %.2e, flat slab "
                       "max deviation %.2e over 1e5 scenes, %.1f s",
                       root_gap, closure, slab, t)};
}

Outcome conservation(Workspace&) {
  std::mt19937_64 rng(31);
  const LensSurface lens = test::bumpy_lens(kLensGrid, 10, 120, 121.6, 0.3);
  const ImagePlane plane{150, 9.9, 9.9, kRes, kRes};
  const PointSourceSet s1 = test::random_sources(8, 1.0, rng), s2 = test::random_sources(8, 1.0, rng);
  PointSourceSet both = s1;
  both.emitters.insert(both.emitters.end(), s2.emitters.begin(), s2.emitters.end());

  const RenderResult r = render(both, lens, plane);
  const double landed = r.flux.total() + r.flux.escaped;
  const double balance = std::abs(landed - r.diagnostics.emitted) / r.diagnostics.emitted;
  const bool nothing_lost = r.diagnostics.lost == 0.0;

  FluxImage sum = render_flux(s1, lens, plane);
  sum += render_flux(s2, lens, plane);
  double peak = 0, gap = 0;
  for (std::size_t j = 0; j < sum.size(); ++j) {
    peak = std::max(peak, r.flux[j]);
    gap = std::max(gap, std::abs(sum[j] - r.flux[j]));
  }
  const double superposition = gap / peak;

  const double g = 0.2 * plane.num_pixels();
  const GrayImage base = flux_to_gray(r.flux, g);
  bool bitwise = true;
  for (double c : {2.0, 0.5, 1024.0}) {
    PointSourceSet scaled = both;
    for (auto& e : scaled.emitters) e.q *= c;
    bitwise = bitwise && flux_to_gray(render_flux(scaled, lens, plane), g).data == base.data;
  }
  PointSourceSet tripled = both;
  for (auto& e : tripled.emitters) e.q *= 3.0;
  const double odd = test::max_abs_diff(flux_to_gray(render_flux(tripled, lens, plane), g), base);

  const bool pass = balance <= 1e-9 && nothing_lost && superposition <= 1e-12 && bitwise;
  return {pass, format("flux balance %.2e relative (lost %.1e), superposition %.2e of peak, gray image bitwise "
                       "unchanged under x2, x0.5, x1024: %s (x3 differs by %.1e)",
                       balance, r.diagnostics.lost, superposition, bitwise ? "yes" : "no", odd)};
}

Outcome source_recovery(Workspace& ws) {
  const auto& f = ws.fit(16);
  const double ratio = f.result.final_flux_error / f.result.initial_flux_error;
  const double gain = f.mae_initial / f.mae_final;
  const bool pass = ratio <= 0.1 && gain >= 2.0 && f.seconds < 900;
  return {pass, format("N=16: sum E_flux %.4e -> %.4e (%.1f%% of initial), gray MAE %.4e -> %.4e (%.2fx), "
                       "%ld iterations (%s), %.0f s",
                       f.result.initial_flux_error, f.result.final_flux_error, 100 * ratio, f.mae_initial,
                       f.mae_final, gain, f.result.solver.iterations, to_string(f.result.solver.reason),
                       f.seconds)};
}

Outcome monotone_in_n(Workspace& ws) {
  const double e4 = ws.fit(4).result.final_flux_error;
  const double e16 = ws.fit(16).result.final_flux_error;
  const double e36 = ws.fit(36).result.final_flux_error;
  const bool pass = e16 <= 1.02 * e4 && e36 <= 1.02 * e16;
  return {pass, format("fitted sum E_flux: N=4 %.4e, N=16 %.4e, N=36 %.4e", e4, e16, e36)};
}

Outcome surface_vs_point(Workspace& ws) {
  const LensDesignWeights full;
  const auto& point = ws.design("point", PointSourceSet{1.0, {{0.0, 0.0, 1.0}}}, full);
  const auto& fitted = ws.design("fitted", ws.fit(16).result.sources, full);
  const double reduction = 1.0 - fitted.mae / point.mae;
  const double db = fitted.psnr - point.psnr;
  const double t = point.seconds + fitted.seconds;
  const bool pass = reduction >= 0.30 && db >= 2.0 && t < 3600;
  return {pass, format("dense-grid evaluation: point-source lens MAE %.4e PSNR %.2f dB, fitted-model lens MAE "
                       "%.4e PSNR %.2f dB (MAE %.1f%% lower, %+.2f dB), design time %.0f s",
                       point.mae, point.psnr, fitted.mae, fitted.psnr, 100 * reduction, db, t)};
}

Outcome contraction_ablation(Workspace& ws) {
  auto violations = [](const PointSourceSet& s) {
    int bad = 0;
    for (const auto& e : s.emitters)
      bad += std::abs(e.x) > 0.5 * s.size || std::abs(e.y) > 0.5 * s.size || e.q < 0;
    return bad;
  };
  // Raw decoded sets, before the reporting renormalization.
  const auto& on = ws.fit(16, true);
  const auto& off = ws.fit(16, false);
  const auto& p_on = ws.fit_problem(true).parameterization;
  const auto& p_off = ws.fit_problem(false).parameterization;
  const PointSourceSet raw_on = p_on.decode(on.result.solver.x);
  const PointSourceSet raw_off = p_off.decode(off.result.solver.x);
  const int bad_on = violations(raw_on), bad_off = violations(raw_off);
  double reach = 0;
  for (const auto& e : raw_off.emitters) reach = std::max({reach, std::abs(e.x), std::abs(e.y)});
  return {bad_on == 0, format("contraction on: %d/16 emitters outside the source square or negative; penalty "
                              "mode: %d/16 (max |x|,|y| = %.4f cm for B/2 = 0.5), sum E_flux %.4e vs %.4e",
                              bad_on, bad_off, reach, on.result.final_flux_error, off.result.final_flux_error)};
}

Outcome loss_ablation(Workspace& ws) {
  const PointSourceSet& model = ws.fit(16).result.sources;
  const auto& full = ws.design("fitted", model, LensDesignWeights{});
  LensDesignWeights no_grad, no_out;
  no_grad.gradient = 0;
  no_out.out = 0;
  const auto& without_grad = ws.design("fitted_no_grad", model, no_grad);
  const auto& without_out = ws.design("fitted_no_out", model, no_out);
  const double floor = 0.99 * full.mae;
  const bool pass = without_grad.mae >= floor && without_out.mae >= floor;
  return {pass, format("dense-grid MAE: all terms %.4e, without E_grad %.4e, without E_out %.4e", full.mae,
                       without_grad.mae, without_out.mae)};
}

Outcome solver_sanity(Workspace& ws) {
  auto rosen = [](std::span<const double> x, std::span<double> g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  SolverConfig cfg;
  cfg.grad_tol = 1e-9;
  const SolverResult r = minimize(rosen, {-1.2, 1.0}, cfg);
  const double err = std::max(std::abs(r.x[0] - 1), std::abs(r.x[1] - 1));
  const bool rosen_ok = err <= 1e-6 && r.iterations <= 200 && monotone(r);

  int monotone_runs = 0;
  std::string broken;
  for (const auto& [name, ok] : ws.traces.runs) {
    monotone_runs += ok;
    if (!ok) broken += " " + name;
  }
  const bool pass = rosen_ok && monotone_runs == static_cast<int>(ws.traces.runs.size());
  return {pass, format("Rosenbrock: %ld iterations, max error %.1e; monotone pipeline traces %d/%zu%s%s",
                       r.iterations, err, monotone_runs, ws.traces.runs.size(), broken.empty() ? "" : ", broken:",
                       broken.c_str())};
}

Outcome metrics_fixtures(Workspace&) {
  int ok = 0;
  const auto fixtures = test::metric_fixtures();
  std::string failed;
  for (const auto& f : fixtures) {
    if (test::fixture_passes(f)) ++ok;
    else failed += " [" + f.name + "]";
  }
  const GrayImage zero(16, 16, 0.0), tenth(16, 16, 0.1);
  return {ok == static_cast<int>(fixtures.size()),
          format("%d/%zu fixtures exact, uniform 0.1 difference gives %s dB%s", ok, fixtures.size(),
                 format_psnr(psnr(zero, tenth)).c_str(), failed.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome(Workspace&)>>> criteria{
      {"gradient fidelity", gradient_fidelity},
      {"optics kernels vs oracles", optics_kernels},
      {"flux conservation and superposition", conservation},
      {"source recovery", source_recovery},
      {"monotonicity in N", monotone_in_n},
      {"surface vs point source", surface_vs_point},
      {"contraction ablation", contraction_ablation},
      {"loss-term ablation", loss_ablation},
      {"solver sanity", solver_sanity},
      {"metrics fixtures", metrics_fixtures},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  if (selected.empty())
    for (int i = 1; i <= 10; ++i) selected.insert(i);

  Workspace ws;
  std::ofstream summary(out_dir() / "summary.txt");
  int failures = 0;
  for (int id : selected) {
    if (id < 1 || id > 10) continue;
    const auto& [name, run] = criteria[id - 1];
    Outcome o;
    try {
      o = run(ws);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    const std::string line = format("%s criterion %d (%s): %s", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    summary << line << '\n' << std::flush;
  }
  return failures ? 1 : 0;
}
