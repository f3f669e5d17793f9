#pragma once

#include <cmath>

#include "mmfb/mesh.hpp"

namespace mmfb {

// Diffusive flux a(grad u) * grad u. Covers the Laplacian (a = 1), the
// p-Laplacian (a = |g|^(p-2), regularized) and the minimal-surface operator
// (a = (1+|g|^2)^(-1/2)).
struct PdeFlux {
  enum class Kind { Laplace, PLaplace, MinimalSurface };

  Kind kind = Kind::Laplace;
  double p = 2.0;
  // Regularization for the p-Laplacian: a(g) = (|g|^2 + eps^2)^((p-2)/2).
  // Required for p < 2 where the unregularized coefficient blows up at g = 0.
  double epsilon = 1e-8;

  static PdeFlux laplace() { return {}; }
  static PdeFlux p_laplace(double p, double eps = 1e-8) {
    if (!(p > 1.0)) throw InvalidParameter("p-Laplacian needs p > 1");
    return {Kind::PLaplace, p, eps};
  }
  static PdeFlux minimal_surface() { return {Kind::MinimalSurface, 2.0, 0.0}; }

  double a(const Vec2& g) const {
    switch (kind) {
      case Kind::Laplace:
        return 1.0;
      case Kind::PLaplace:
        return std::pow(g.squaredNorm() + epsilon * epsilon, 0.5 * (p - 2.0));
      case Kind::MinimalSurface:
        return 1.0 / std::sqrt(1.0 + g.squaredNorm());
    }
    return 1.0;
  }

  // Gradient of a with respect to g (for Newton Jacobians).
  Vec2 da_dg(const Vec2& g) const {
    switch (kind) {
      case Kind::Laplace:
        return Vec2::Zero();
      case Kind::PLaplace:
        return (p - 2.0) * std::pow(g.squaredNorm() + epsilon * epsilon, 0.5 * (p - 4.0)) * g;
      case Kind::MinimalSurface:
        return -std::pow(1.0 + g.squaredNorm(), -1.5) * g;
    }
    return Vec2::Zero();
  }
};

}  // namespace mmfb
