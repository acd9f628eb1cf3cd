#pragma once

#include <stdexcept>
#include <string>

namespace caustic {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid sizes, weights, paths or scene constants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Zero-area triangles, coincident points, missing roots.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Exit refraction with a negative discriminant.
class TotalInternalReflection : public GeometryError {
 public:
  TotalInternalReflection(const std::string& what, long triangle)
      : GeometryError(what), triangle_(triangle) {}
  long triangle() const noexcept { return triangle_; }

 private:
  long triangle_;
};

/// Ray that cannot reach the receiving plane.
class RayMissError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Quartic root too close to a double root for implicit differentiation.
class IllConditionedRoot : public GeometryError {
 public:
  IllConditionedRoot(const std::string& what, double condition)
      : GeometryError(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace caustic
