#include "caustic/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "caustic/error.hpp"

namespace caustic {

FitResult fit_sources(const SourceFitProblem& problem, const PointSourceSet& initial, const SolverConfig& solver,
                      const IterationCallback& on_iteration) {
  problem.validate();
  const auto& param = problem.parameterization;
  FitResult out;
  out.initial_flux_error = source_fit_flux_error(initial, problem);

  auto objective = [&](std::span<const double> x, std::span<double> g) {
    ObjectiveValue v = source_fit_objective(x, problem);
    std::copy(v.gradient.begin(), v.gradient.end(), g.begin());
    return v.value;
  };
  out.solver = minimize(objective, param.encode(initial), solver, on_iteration);
  const PointSourceSet fitted = param.decode(out.solver.x);
  out.final_flux_error = source_fit_flux_error(fitted, problem);
  out.sources = fitted.total_intensity() > 0 ? fitted.normalized() : fitted;
  return out;
}

ControlGrid::ControlGrid(const LensSurface& lens, int nodes, bool pin_boundary)
    : gw_(lens.grid_w), gh_(lens.grid_h), mx_(std::min(nodes, lens.grid_w)), my_(std::min(nodes, lens.grid_h)) {
  if (nodes < 2) throw ConfigError("control grid needs at least 2 nodes per axis");
  rows_x_ = axis_rows(gw_, mx_);
  rows_y_ = axis_rows(gh_, my_);
  pinned_.assign(lens.num_vertices(), 0);
  if (pin_boundary)
    for (std::size_t v = 0; v < pinned_.size(); ++v) pinned_[v] = lens.is_boundary(static_cast<int>(v));
}

std::vector<ControlGrid::Row> ControlGrid::axis_rows(int vertices, int nodes) {
  std::vector<Row> rows(vertices);
  const double spacing = double(vertices - 1) / (nodes - 1);
  for (int i = 0; i < vertices; ++i) {
    const double s = i / spacing;
    const int k = std::min(static_cast<int>(s), nodes - 2);
    const double t = s - k, t2 = t * t, t3 = t2 * t;
    // Catmull-Rom weights of nodes k-1 .. k+2; end nodes are repeated.
    const std::array<double, 4> w{0.5 * (-t + 2 * t2 - t3), 0.5 * (2 - 5 * t2 + 3 * t3), 0.5 * (t + 4 * t2 - 3 * t3),
                                  0.5 * (t3 - t2)};
    for (int a = 0; a < 4; ++a) {
      rows[i].node[a] = std::clamp(k - 1 + a, 0, nodes - 1);
      rows[i].weight[a] = w[a];
    }
  }
  return rows;
}

std::vector<double> ControlGrid::expand(std::span<const double> control) const {
  if (control.size() != size()) throw ConfigError("control vector does not match the control grid");
  // Along x first: tmp[ny][gw], then along y.
  std::vector<double> tmp(static_cast<std::size_t>(my_) * gw_, 0.0);
  for (int j = 0; j < my_; ++j)
    for (int i = 0; i < gw_; ++i) {
      double s = 0;
      for (int a = 0; a < 4; ++a) s += rows_x_[i].weight[a] * control[j * mx_ + rows_x_[i].node[a]];
      tmp[j * gw_ + i] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(gw_) * gh_, 0.0);
  for (int r = 0; r < gh_; ++r)
    for (int i = 0; i < gw_; ++i) {
      const std::size_t v = static_cast<std::size_t>(r) * gw_ + i;
      if (pinned_[v]) continue;
      double s = 0;
      for (int a = 0; a < 4; ++a) s += rows_y_[r].weight[a] * tmp[rows_y_[r].node[a] * gw_ + i];
      out[v] = s;
    }
  return out;
}

std::vector<double> ControlGrid::pull_back(std::span<const double> height_grad) const {
  if (height_grad.size() != static_cast<std::size_t>(gw_) * gh_)
    throw ConfigError("height gradient does not match the lens grid");
  std::vector<double> tmp(static_cast<std::size_t>(my_) * gw_, 0.0);
  for (int r = 0; r < gh_; ++r)
    for (int i = 0; i < gw_; ++i) {
      const std::size_t v = static_cast<std::size_t>(r) * gw_ + i;
      if (pinned_[v]) continue;
      for (int a = 0; a < 4; ++a) tmp[rows_y_[r].node[a] * gw_ + i] += rows_y_[r].weight[a] * height_grad[v];
    }
  std::vector<double> out(size(), 0.0);
  for (int j = 0; j < my_; ++j)
    for (int i = 0; i < gw_; ++i)
      for (int a = 0; a < 4; ++a) out[j * mx_ + rows_x_[i].node[a]] += rows_x_[i].weight[a] * tmp[j * gw_ + i];
  return out;
}

void DesignSchedule::validate() const {
  for (int m : levels)
    if (m < 2) throw ConfigError("design levels need at least 2 nodes per axis");
  if (!levels.empty() && level_iters < 0) throw ConfigError("level_iters must be nonnegative");
}

namespace {

std::string level_trace_path(const std::string& path, int nodes) {
  if (path.empty()) return path;
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "_level" + std::to_string(nodes) + p.extension().string())).string();
}

}  // namespace

DesignResult design_lens(const LensDesignProblem& problem, const SolverConfig& solver,
                         const IterationCallback& on_iteration) {
  return design_lens(problem, solver, DesignSchedule{}, on_iteration);
}

DesignResult design_lens(const LensDesignProblem& problem, const SolverConfig& solver, const DesignSchedule& schedule,
                         const IterationCallback& on_iteration) {
  problem.validate();
  schedule.validate();
  DesignResult out;
  lens_design_objective(problem.lens.heights, problem, &out.initial_terms);
  std::vector<double> heights = problem.lens.heights;

  for (int nodes : schedule.levels) {
    if (nodes >= problem.lens.grid_w && nodes >= problem.lens.grid_h) continue;
    const ControlGrid grid(problem.lens, nodes, problem.pin_boundary);
    const std::vector<double> base = heights;
    auto lift = [&](std::span<const double> c) {
      std::vector<double> h = grid.expand(c);
      for (std::size_t v = 0; v < h.size(); ++v) h[v] += base[v];
      return h;
    };
    auto objective = [&](std::span<const double> c, std::span<double> g) {
      const ObjectiveValue v = lens_design_objective(lift(c), problem);
      if (!std::isfinite(v.value)) return v.value;
      const std::vector<double> gc = grid.pull_back(v.gradient);
      std::copy(gc.begin(), gc.end(), g.begin());
      return v.value;
    };
    SolverConfig level = solver;
    level.max_iters = schedule.level_iters;
    level.trace_path = level_trace_path(solver.trace_path, nodes);
    out.levels.push_back(minimize(objective, std::vector<double>(grid.size(), 0.0), level, on_iteration));
    heights = lift(out.levels.back().x);
  }

  auto objective = [&](std::span<const double> x, std::span<double> g) {
    ObjectiveValue v = lens_design_objective(x, problem);
    std::copy(v.gradient.begin(), v.gradient.end(), g.begin());
    return v.value;
  };
  out.solver = minimize(objective, heights, solver, on_iteration);
  out.lens = problem.lens;
  out.lens.heights = out.solver.x;
  lens_design_objective(out.lens.heights, problem, &out.final_terms);
  return out;
}

}  // namespace caustic
