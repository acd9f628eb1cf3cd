#pragma once

// Point-emitter model of a square surface light source of side B on the
// plane z = 0, and its unconstrained parameterization.

#include <span>
#include <vector>

#include "caustic/error.hpp"
#include "caustic/vec.hpp"

namespace caustic {

struct Emitter {
  double x = 0;  ///< cm
  double y = 0;  ///< cm
  double q = 0;  ///< intensity weight
};

struct PointSourceSet {
  double size = 1.0;  ///< side B of the physical emitter square (cm)
  std::vector<Emitter> emitters;

  std::size_t count() const { return emitters.size(); }
  Vec3 position(std::size_t k) const { return {emitters[k].x, emitters[k].y, 0.0}; }
  double total_intensity() const;
  /// Copy with intensities scaled to sum to 1 (rendering is scale-invariant).
  PointSourceSet normalized() const;
};

/// Contraction T(|x|): B/2 (|x| - 1) for |x| <= 1, B/2 (1 - 1/|x|) beyond.
/// Maps R onto [-B/2, B/2).
double contract(double x, double size);
/// d/dx T(|x|), zero at x = 0.
double contract_slope(double x, double size);
/// Nonnegative preimage of x under contract. Throws ConfigError unless
/// |x| < B/2.
double uncontract(double x, double size);

enum class Symmetry {
  None,     ///< every emitter is free
  Quadrant  ///< each free emitter is mirrored into all four quadrants
};

enum class InitMode { Grid, QuadrantSymmetric };

/// Uniform initial layout with equal intensities 1/N.
/// Grid: sqrt(N) x sqrt(N) cell-centred lattice (N must be a perfect square).
/// QuadrantSymmetric: N/4 emitters on a cell-centred lattice of the first
/// quadrant; expanded to N by mirroring (N must be divisible by 4).
PointSourceSet init_sources(int n, double size, InitMode mode);

/// Maps an unconstrained parameter vector (3 values per free emitter) to an
/// emitter set. With contraction, (x^, y^, q^) -> (T(|x^|), T(|y^|), |q^|),
/// so every decoded set is physically valid. Without it the parameters are
/// the raw (x, y, q) and validity is only encouraged by boundary_penalties.
class SourceParameterization {
 public:
  SourceParameterization(double size, Symmetry symmetry, bool contraction)
      : size_(size), symmetry_(symmetry), contraction_(contraction) {
    if (!(size > 0)) throw ConfigError("source size must be positive");
  }

  double size() const { return size_; }
  Symmetry symmetry() const { return symmetry_; }
  bool contraction() const { return contraction_; }
  int copies() const { return symmetry_ == Symmetry::Quadrant ? 4 : 1; }

  /// Free emitters of an expanded set (every copies()-th emitter).
  std::vector<Emitter> free_emitters(const PointSourceSet& set) const;

  std::vector<double> encode(const PointSourceSet& set) const;
  PointSourceSet decode(std::span<const double> params) const;

  /// Chain rule from per-emitter gradients (dE/dx, dE/dy, dE/dq of the
  /// expanded set) to dE/dparams.
  std::vector<double> pull_back(std::span<const double> params, std::span<const Emitter> emitter_grad) const;

 private:
  double size_;
  Symmetry symmetry_;
  bool contraction_;
};

struct BoundaryPenalties {
  double position = 0;   ///< E_bp
  double intensity = 0;  ///< E_bi
};

/// E_bp = sum sigma(|x|-B/2)(|x|-B/2)^2 over x and y; E_bi = sum sigma(-q) q^2,
/// with sigma(t) = 1 for t > 0 and 0 otherwise.
BoundaryPenalties boundary_penalties(const PointSourceSet& set);

/// Per-emitter gradient of w_pos * E_bp + w_int * E_bi.
std::vector<Emitter> boundary_penalty_gradient(const PointSourceSet& set, double w_pos, double w_int);

}  // namespace caustic
