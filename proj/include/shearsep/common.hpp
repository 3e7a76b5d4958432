#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

namespace shearsep {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// A point (or displacement) in the plane.
struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  constexpr double operator[](int axis) const { return axis == 0 ? x1 : x2; }
  constexpr double& operator[](int axis) { return axis == 0 ? x1 : x2; }

  constexpr Vec2& operator+=(Vec2 o) {
    x1 += o.x1;
    x2 += o.x2;
    return *this;
  }
  constexpr Vec2& operator-=(Vec2 o) {
    x1 -= o.x1;
    x2 -= o.x2;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return a -= b; }
  friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x1, s * v.x2}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;

  double norm() const { return std::hypot(x1, x2); }
};

/// Shear orientation. `E1` moves the first coordinate and reads the second.
enum class Direction : int { E1 = 1, E2 = 2 };

/// Index (0 or 1) of the coordinate a shear moves.
constexpr int moved_axis(Direction d) { return d == Direction::E1 ? 0 : 1; }
/// Index (0 or 1) of the coordinate a shear reads.
constexpr int read_axis(Direction d) { return d == Direction::E1 ? 1 : 0; }

/// Raised when a sampler cannot honour the requested size.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a theorem hypothesis required by an operation does not hold
/// and the caller did not request an override.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shearsep
