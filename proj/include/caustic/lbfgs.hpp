#pragma once

// Limited-memory BFGS with a strong-Wolfe line search (bracketing phase plus
// cubic-interpolation zoom).

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace caustic {

struct SolverConfig {
  int history = 10;  ///< curvature pairs kept
  double c1 = 1e-4;  ///< sufficient decrease
  double c2 = 0.9;   ///< curvature condition
  long max_iters = 300000;
  double grad_tol = 1e-2;  ///< stop when ||grad||_2 < grad_tol
  int max_line_search_steps = 30;
  /// Consecutive line-search failures (each followed by a memory reset)
  /// before giving up.
  int max_line_search_failures = 2;
  std::string trace_path;  ///< CSV trace when non-empty

  void validate() const;
};

enum class StopReason { GradientTolerance, MaxIterations, LineSearchFailed };

const char* to_string(StopReason reason);

struct TraceRow {
  long iter = 0;
  double value = 0;
  double grad_norm = 0;
  double step = 0;
};

struct SolverResult {
  std::vector<double> x;
  double value = 0;
  std::vector<double> gradient;
  long iterations = 0;
  long evaluations = 0;
  StopReason reason = StopReason::MaxIterations;
  /// Trial points with non-finite objective were rejected during the run.
  long rejected_nonfinite = 0;
  std::vector<TraceRow> trace;

  bool converged() const { return reason == StopReason::GradientTolerance; }
};

/// Evaluates the objective at x, writes the gradient, returns the value.
using ObjectiveFn = std::function<double(std::span<const double> x, std::span<double> grad)>;
using IterationCallback = std::function<void(const TraceRow&)>;

/// Minimizes from x0. Throws ConfigError if the objective is not finite at x0.
SolverResult minimize(const ObjectiveFn& objective, std::vector<double> x0, const SolverConfig& config,
                      const IterationCallback& on_iteration = {});

/// Writes `iter,E,grad_norm,step` rows.
void write_trace_csv(const std::string& path, std::span<const TraceRow> trace);

}  // namespace caustic
