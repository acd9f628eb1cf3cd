#include "caustic/sources.hpp"

#include <cmath>
#include <string>

namespace caustic {

double PointSourceSet::total_intensity() const {
  double s = 0;
  for (const auto& e : emitters) s += e.q;
  return s;
}

PointSourceSet PointSourceSet::normalized() const {
  PointSourceSet out = *this;
  const double total = total_intensity();
  if (total > 0)
    for (auto& e : out.emitters) e.q /= total;
  return out;
}

double contract(double x, double size) {
  const double a = std::abs(x);
  return a <= 1.0 ? 0.5 * size * (a - 1.0) : 0.5 * size * (1.0 - 1.0 / a);
}

double contract_slope(double x, double size) {
  const double a = std::abs(x);
  if (a == 0.0) return 0.0;
  const double s = x > 0 ? 1.0 : -1.0;
  return a <= 1.0 ? s * 0.5 * size : s * 0.5 * size / (a * a);
}

double uncontract(double x, double size) {
  const double h = 0.5 * size;
  if (!(std::abs(x) < h)) throw ConfigError("uncontract: position " + std::to_string(x) + " is not inside the source square");
  return x <= 0 ? x / h + 1.0 : 1.0 / (1.0 - x / h);
}

PointSourceSet init_sources(int n, double size, InitMode mode) {
  if (n < 1) throw ConfigError("source count must be positive");
  PointSourceSet set;
  set.size = size;
  const double q = 1.0 / n;
  if (mode == InitMode::Grid) {
    const int m = static_cast<int>(std::lround(std::sqrt(n)));
    if (m * m != n) throw ConfigError("grid initialisation needs a perfect-square source count");
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        set.emitters.push_back({-0.5 * size + (i + 0.5) * size / m, -0.5 * size + (j + 0.5) * size / m, q});
    return set;
  }
  if (n % 4 != 0) throw ConfigError("quadrant initialisation needs a source count divisible by 4");
  const int free = n / 4;
  const int m = static_cast<int>(std::ceil(std::sqrt(free) - 1e-12));
  const double cell = 0.5 * size / m;
  for (int f = 0; f < free; ++f) {
    const double x = (f % m + 0.5) * cell, y = (f / m + 0.5) * cell;
    set.emitters.push_back({x, y, q});
    set.emitters.push_back({-x, y, q});
    set.emitters.push_back({x, -y, q});
    set.emitters.push_back({-x, -y, q});
  }
  return set;
}

namespace {
constexpr double kMirrorX[4] = {1, -1, 1, -1};
constexpr double kMirrorY[4] = {1, 1, -1, -1};
}  // namespace

std::vector<Emitter> SourceParameterization::free_emitters(const PointSourceSet& set) const {
  if (set.count() % copies() != 0) throw ConfigError("emitter count is not a multiple of the symmetry order");
  std::vector<Emitter> out;
  for (std::size_t k = 0; k < set.count(); k += copies()) out.push_back(set.emitters[k]);
  return out;
}

std::vector<double> SourceParameterization::encode(const PointSourceSet& set) const {
  std::vector<double> p;
  for (const auto& e : free_emitters(set)) {
    if (contraction_) {
      if (e.q < 0) throw ConfigError("encode: negative intensity");
      p.insert(p.end(), {uncontract(e.x, size_), uncontract(e.y, size_), e.q});
    } else {
      p.insert(p.end(), {e.x, e.y, e.q});
    }
  }
  return p;
}

PointSourceSet SourceParameterization::decode(std::span<const double> params) const {
  if (params.empty() || params.size() % 3 != 0) throw ConfigError("source parameter vector must hold 3 values per emitter");
  PointSourceSet set;
  set.size = size_;
  for (std::size_t f = 0; f < params.size() / 3; ++f) {
    Emitter e{params[3 * f], params[3 * f + 1], params[3 * f + 2]};
    if (contraction_) e = {contract(e.x, size_), contract(e.y, size_), std::abs(e.q)};
    for (int c = 0; c < copies(); ++c) {
      const double sx = symmetry_ == Symmetry::Quadrant ? kMirrorX[c] : 1.0;
      const double sy = symmetry_ == Symmetry::Quadrant ? kMirrorY[c] : 1.0;
      set.emitters.push_back({sx * e.x, sy * e.y, e.q});
    }
  }
  return set;
}

std::vector<double> SourceParameterization::pull_back(std::span<const double> params,
                                                      std::span<const Emitter> emitter_grad) const {
  const std::size_t free = params.size() / 3;
  if (emitter_grad.size() != free * copies()) throw ConfigError("pull_back: gradient size mismatch");
  std::vector<double> g(params.size(), 0.0);
  for (std::size_t f = 0; f < free; ++f) {
    double jx = 1, jy = 1, jq = 1;
    if (contraction_) {
      jx = contract_slope(params[3 * f], size_);
      jy = contract_slope(params[3 * f + 1], size_);
      const double qh = params[3 * f + 2];
      jq = qh > 0 ? 1.0 : (qh < 0 ? -1.0 : 0.0);
    }
    for (int c = 0; c < copies(); ++c) {
      const double sx = symmetry_ == Symmetry::Quadrant ? kMirrorX[c] : 1.0;
      const double sy = symmetry_ == Symmetry::Quadrant ? kMirrorY[c] : 1.0;
      const Emitter& ge = emitter_grad[f * copies() + c];
      g[3 * f] += sx * ge.x * jx;
      g[3 * f + 1] += sy * ge.y * jy;
      g[3 * f + 2] += ge.q * jq;
    }
  }
  return g;
}

BoundaryPenalties boundary_penalties(const PointSourceSet& set) {
  BoundaryPenalties p;
  const double h = 0.5 * set.size;
  for (const auto& e : set.emitters) {
    for (double c : {e.x, e.y}) {
      const double t = std::abs(c) - h;
      if (t > 0) p.position += t * t;
    }
    if (-e.q > 0) p.intensity += e.q * e.q;
  }
  return p;
}

std::vector<Emitter> boundary_penalty_gradient(const PointSourceSet& set, double w_pos, double w_int) {
  std::vector<Emitter> g(set.count());
  const double h = 0.5 * set.size;
  for (std::size_t k = 0; k < set.count(); ++k) {
    const auto& e = set.emitters[k];
    auto slope = [&](double c) {
      const double t = std::abs(c) - h;
      return t > 0 ? w_pos * 2 * t * (c > 0 ? 1.0 : -1.0) : 0.0;
    };
    g[k] = {slope(e.x), slope(e.y), -e.q > 0 ? w_int * 2 * e.q : 0.0};
  }
  return g;
}

}  // namespace caustic
