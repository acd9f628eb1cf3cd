#include "caustic/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>

#include "caustic/error.hpp"

namespace caustic {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

struct Sample {
  double alpha = 0;
  double f = 0;
  double slope = 0;  ///< directional derivative
  std::vector<double> x, g;
};

/// Minimizer of the cubic through two samples, or NaN when undefined.
double cubic_min(const Sample& a, const Sample& b) {
  const double d1 = a.slope + b.slope - 3 * (a.f - b.f) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.slope * b.slope;
  if (!(disc >= 0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
  return b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2 * d2);
}

class LineSearch {
 public:
  LineSearch(const ObjectiveFn& fn, const SolverConfig& cfg, std::span<const double> x0, double f0,
             std::span<const double> d, double slope0)
      : fn_(fn), cfg_(cfg), x0_(x0), d_(d), f0_(f0), slope0_(slope0) {}

  /// Returns true with `out` set to an accepted point. Falls back to the
  /// best sufficient-decrease point if the Wolfe curvature test is never met.
  bool run(double alpha, Sample& out) {
    Sample prev{0.0, f0_, slope0_, {}, {}};
    for (int i = 0; i < cfg_.max_line_search_steps; ++i) {
      Sample cur = eval(alpha);
      if (!std::isfinite(cur.f)) {
        alpha = prev.alpha + 0.25 * (alpha - prev.alpha);
        continue;
      }
      if (cur.f > f0_ + cfg_.c1 * alpha * slope0_ || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur, out);
      note_armijo(cur);
      if (std::abs(cur.slope) <= -cfg_.c2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0) return zoom(cur, prev, out);
      prev = std::move(cur);
      alpha *= 2;
    }
    return fallback(out);
  }

  long evaluations() const { return evaluations_; }
  long rejected() const { return rejected_; }

 private:
  Sample eval(double alpha) {
    Sample s;
    s.alpha = alpha;
    s.x.resize(x0_.size());
    s.g.assign(x0_.size(), 0.0);
    for (std::size_t i = 0; i < x0_.size(); ++i) s.x[i] = x0_[i] + alpha * d_[i];
    ++evaluations_;
    s.f = fn_(s.x, s.g);
    if (!std::isfinite(s.f) || !finite(s.g)) {
      ++rejected_;
      s.f = std::numeric_limits<double>::infinity();
      return s;
    }
    s.slope = dot(s.g, d_);
    return s;
  }

  void note_armijo(const Sample& s) {
    if (s.alpha > 0 && s.f <= f0_ + cfg_.c1 * s.alpha * slope0_ && (!best_ || s.f < best_->f)) best_ = s;
  }

  bool zoom(Sample lo, Sample hi, Sample& out) {
    for (int i = 0; i < cfg_.max_line_search_steps; ++i) {
      const double a = std::min(lo.alpha, hi.alpha), b = std::max(lo.alpha, hi.alpha);
      double alpha = std::isfinite(hi.f) ? cubic_min(lo, hi) : std::numeric_limits<double>::quiet_NaN();
      const double margin = 0.1 * (b - a);
      if (!std::isfinite(alpha) || alpha < a + margin || alpha > b - margin) alpha = 0.5 * (a + b);
      if (b - a <= 1e-16 * std::max(1.0, b)) break;
      Sample cur = eval(alpha);
      if (!std::isfinite(cur.f) || cur.f > f0_ + cfg_.c1 * alpha * slope0_ || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      note_armijo(cur);
      if (std::abs(cur.slope) <= -cfg_.c2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope * (hi.alpha - lo.alpha) >= 0) hi = lo;
      lo = std::move(cur);
    }
    return fallback(out);
  }

  bool fallback(Sample& out) {
    if (!best_ || !(best_->f < f0_)) return false;
    out = *best_;
    return true;
  }

  const ObjectiveFn& fn_;
  const SolverConfig& cfg_;
  std::span<const double> x0_, d_;
  double f0_, slope0_;
  std::optional<Sample> best_;
  long evaluations_ = 0;
  long rejected_ = 0;
};

}  // namespace

void SolverConfig::validate() const {
  if (history < 1) throw ConfigError("L-BFGS history must be >= 1");
  if (!(0 < c1 && c1 < c2 && c2 < 1)) throw ConfigError("Wolfe constants need 0 < c1 < c2 < 1");
  if (max_iters < 0) throw ConfigError("max_iters must be nonnegative");
  if (max_line_search_steps < 1) throw ConfigError("max_line_search_steps must be >= 1");
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::GradientTolerance: return "gradient_tolerance";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

SolverResult minimize(const ObjectiveFn& objective, std::vector<double> x0, const SolverConfig& config,
                      const IterationCallback& on_iteration) {
  config.validate();
  const std::size_t n = x0.size();
  SolverResult res;
  res.x = std::move(x0);
  res.gradient.assign(n, 0.0);
  res.value = objective(res.x, res.gradient);
  res.evaluations = 1;
  if (!std::isfinite(res.value) || !finite(res.gradient))
    throw ConfigError("objective is not finite at the starting point");

  auto record = [&](double step) {
    TraceRow row{res.iterations, res.value, norm2(res.gradient), step};
    res.trace.push_back(row);
    if (on_iteration) on_iteration(row);
  };
  record(0.0);

  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::vector<double> d(n), q(n);
  int failures = 0;

  for (;;) {
    if (norm2(res.gradient) < config.grad_tol) {
      res.reason = StopReason::GradientTolerance;
      break;
    }
    if (res.iterations >= config.max_iters) {
      res.reason = StopReason::MaxIterations;
      break;
    }

    // Two-loop recursion: d = -H g.
    q = res.gradient;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * dot(s_hist[i], q);
      for (std::size_t k = 0; k < n; ++k) q[k] -= alpha[i] * y_hist[i][k];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
    for (std::size_t k = 0; k < n; ++k) q[k] *= gamma;
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * dot(y_hist[i], q);
      for (std::size_t k = 0; k < n; ++k) q[k] += s_hist[i][k] * (alpha[i] - beta);
    }
    for (std::size_t k = 0; k < n; ++k) d[k] = -q[k];

    double slope = dot(res.gradient, d);
    if (!(slope < 0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t k = 0; k < n; ++k) d[k] = -res.gradient[k];
      slope = dot(res.gradient, d);
    }
    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / norm2(res.gradient)) : 1.0;

    LineSearch ls(objective, config, res.x, res.value, d, slope);
    Sample next;
    const bool ok = ls.run(alpha0, next);
    res.evaluations += ls.evaluations();
    res.rejected_nonfinite += ls.rejected();
    if (!ok) {
      ++failures;
      if (failures >= config.max_line_search_failures || s_hist.empty()) {
        res.reason = StopReason::LineSearchFailed;
        break;
      }
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }
    failures = 0;

    std::vector<double> s(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = next.x[k] - res.x[k];
      y[k] = next.g[k] - res.gradient[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-10 * norm2(s) * norm2(y)) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > config.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    res.x = std::move(next.x);
    res.gradient = std::move(next.g);
    res.value = next.f;
    ++res.iterations;
    record(next.alpha);
  }

  if (!config.trace_path.empty()) write_trace_csv(config.trace_path, res.trace);
  return res;
}

void write_trace_csv(const std::string& path, std::span<const TraceRow> trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace " + path);
  out << "iter,E,grad_norm,step\n" << std::setprecision(17);
  for (const auto& r : trace) out << r.iter << ',' << r.value << ',' << r.grad_norm << ',' << r.step << '\n';
}

}  // namespace caustic
