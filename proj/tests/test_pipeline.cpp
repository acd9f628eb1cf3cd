#include <doctest.h>

#include <cmath>
#include <random>

#include "caustic/pipeline.hpp"
#include "support.hpp"

using namespace caustic;

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Point source over a small flat lens, binary disk target.
LensDesignProblem disk_scene(int grid, int res) {
  LensDesignProblem p;
  p.sources = PointSourceSet{1.0, {{0.0, 0.0, 1.0}}};
  p.lens = build_grid_lens(grid, grid, 10, 10, 120, 121, 1.49);
  p.plane = {240, 20, 20, res, res};
  p.target = GrayImage(res, res);
  for (int v = 0; v < res; ++v)
    for (int u = 0; u < res; ++u) {
      const double x = p.plane.column_edge(u) + 0.5 * p.plane.pixel_w();
      const double y = p.plane.row_edge(v) + 0.5 * p.plane.pixel_h();
      p.target.at(u, v) = x * x + y * y <= 16.0 ? 1.0 : 0.0;
    }
  return p;
}

}  // namespace

TEST_CASE("control grid reproduces constants and interpolates its nodes") {
  const LensSurface lens = build_grid_lens(17, 17, 10, 10, 120, 121, 1.49);
  const ControlGrid grid(lens, 5);
  CHECK(grid.nodes_x() == 5);
  CHECK(grid.size() == 25);

  const std::vector<double> ones(grid.size(), 1.0);
  for (double h : grid.expand(ones)) CHECK(h == doctest::Approx(1.0).epsilon(1e-15));

  // Nodes sit on every 4th vertex; there the correction is the node value.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-1, 1);
  std::vector<double> c(grid.size());
  for (double& x : c) x = uni(rng);
  const std::vector<double> h = grid.expand(c);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) CHECK(h[(4 * j) * 17 + 4 * i] == doctest::Approx(c[j * 5 + i]).epsilon(1e-14));
}

TEST_CASE("control grid is exact for linear data between interior nodes") {
  const LensSurface lens = build_grid_lens(33, 33, 10, 10, 120, 121, 1.49);
  const ControlGrid grid(lens, 9);
  std::vector<double> c(grid.size());
  for (int j = 0; j < 9; ++j)
    for (int i = 0; i < 9; ++i) c[j * 9 + i] = 0.3 * i - 0.7 * j + 2.0;
  const std::vector<double> h = grid.expand(c);
  // Interior intervals: vertices 4..28 (the end intervals repeat the end node).
  for (int r = 4; r <= 28; ++r)
    for (int i = 4; i <= 28; ++i)
      CHECK(h[r * 33 + i] == doctest::Approx(0.3 * i / 4.0 - 0.7 * r / 4.0 + 2.0).epsilon(1e-13));
}

TEST_CASE("pull_back is the transpose of expand") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (bool pin : {false, true}) {
    const LensSurface lens = build_grid_lens(23, 14, 10, 6, 120, 121, 1.49);
    const ControlGrid grid(lens, 6, pin);
    CHECK(grid.nodes_x() == 6);
    CHECK(grid.nodes_y() == 6);
    std::vector<double> a(grid.size()), b(lens.num_vertices());
    for (double& x : a) x = uni(rng);
    for (double& x : b) x = uni(rng);
    const std::vector<double> ea = grid.expand(a);
    const std::vector<double> pb = grid.pull_back(b);
    CHECK(dot(ea, b) == doctest::Approx(dot(a, pb)).epsilon(1e-13));
    if (pin)
      for (std::size_t v = 0; v < ea.size(); ++v)
        if (lens.is_boundary(static_cast<int>(v))) CHECK(ea[v] == 0.0);
  }
}

TEST_CASE("control grid clamps to the lens grid and rejects bad input") {
  const LensSurface lens = build_grid_lens(5, 5, 10, 10, 120, 121, 1.49);
  const ControlGrid grid(lens, 9);
  CHECK(grid.nodes_x() == 5);
  std::vector<double> c(grid.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = double(i);
  CHECK(grid.expand(c) == c);
  CHECK_THROWS_AS(ControlGrid(lens, 1), ConfigError);
  CHECK_THROWS_AS(grid.expand(std::vector<double>(3)), ConfigError);
  DesignSchedule bad;
  bad.levels = {4, 1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("coarse-to-fine stages continue from each other") {
  const LensDesignProblem p = disk_scene(17, 32);
  SolverConfig solver;
  solver.max_iters = 10;
  DesignSchedule schedule;
  schedule.levels = {3, 5, 40};  // 40 exceeds the grid and is skipped
  schedule.level_iters = 10;
  const DesignResult r = design_lens(p, solver, schedule);
  REQUIRE(r.levels.size() == 2);
  CHECK(r.levels[0].trace.front().value == r.initial_terms.total);
  CHECK(r.levels[1].trace.front().value == r.levels[0].trace.back().value);
  CHECK(r.solver.trace.front().value == r.levels[1].trace.back().value);
  CHECK(r.solver.trace.back().value == r.final_terms.total);
  for (const SolverResult* s : {&r.levels[0], &r.levels[1], &r.solver})
    for (std::size_t i = 1; i < s->trace.size(); ++i) CHECK(s->trace[i].value <= s->trace[i - 1].value);
}

TEST_CASE("coarse-to-fine beats free heights on a disk from a flat start") {
  // Light from a flat lens covers the whole plane; reaching the disk needs a
  // lens-wide change of shape that per-vertex steps do not find.
  const LensDesignProblem p = disk_scene(17, 32);
  SolverConfig solver;
  solver.max_iters = 120;
  const DesignResult plain = design_lens(p, solver);

  DesignSchedule schedule;
  schedule.levels = {3, 5, 9};
  schedule.level_iters = 30;
  solver.max_iters = 30;
  const DesignResult staged = design_lens(p, solver, schedule);
  CHECK(staged.final_terms.total < 0.5 * plain.final_terms.total);
}
