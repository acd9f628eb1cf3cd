#pragma once

// The two optimization stages driven end to end by L-BFGS.

#include <array>
#include <span>
#include <vector>

#include "caustic/lbfgs.hpp"
#include "caustic/objectives.hpp"

namespace caustic {

struct FitResult {
  PointSourceSet sources;  ///< intensities normalized to sum 1
  SolverResult solver;
  double initial_flux_error = 0;  ///< sum_m E_flux at the initial layout
  double final_flux_error = 0;
};

/// Fits an emitter model starting from `initial`.
FitResult fit_sources(const SourceFitProblem& problem, const PointSourceSet& initial, const SolverConfig& solver,
                      const IterationCallback& on_iteration = {});

/// Smooth height corrections carried by an m_x x m_y grid of Catmull-Rom
/// control values, nodes evenly spaced over the lens grid. Pinned vertices
/// never move.
class ControlGrid {
 public:
  ControlGrid(const LensSurface& lens, int nodes, bool pin_boundary = false);

  int nodes_x() const { return mx_; }
  int nodes_y() const { return my_; }
  std::size_t size() const { return static_cast<std::size_t>(mx_) * my_; }

  /// Per-vertex correction for the given control values.
  std::vector<double> expand(std::span<const double> control) const;
  /// Transpose of expand: control-space gradient from a height gradient.
  std::vector<double> pull_back(std::span<const double> height_grad) const;

 private:
  struct Row {
    std::array<int, 4> node;
    std::array<double, 4> weight;
  };
  static std::vector<Row> axis_rows(int vertices, int nodes);

  int gw_, gh_, mx_, my_;
  std::vector<Row> rows_x_, rows_y_;
  std::vector<char> pinned_;
};

/// Coarse-to-fine lens design: each level optimizes a smooth correction on a
/// ControlGrid with that many nodes per axis (levels at or above the lens
/// grid size are skipped), then the free heights are optimized. Empty
/// levels: free heights only.
struct DesignSchedule {
  std::vector<int> levels;
  long level_iters = 200;  ///< iteration cap of each coarse level

  void validate() const;
};

struct DesignResult {
  LensSurface lens;
  SolverResult solver;               ///< free-height stage
  std::vector<SolverResult> levels;  ///< coarse stages, in order
  LensDesignTerms initial_terms;
  LensDesignTerms final_terms;
};

/// Optimizes back-surface heights starting from problem.lens.
DesignResult design_lens(const LensDesignProblem& problem, const SolverConfig& solver,
                         const IterationCallback& on_iteration = {});
/// Coarse levels write their traces next to solver.trace_path, with
/// "_level<m>" before the extension.
DesignResult design_lens(const LensDesignProblem& problem, const SolverConfig& solver,
                         const DesignSchedule& schedule, const IterationCallback& on_iteration = {});

}  // namespace caustic
