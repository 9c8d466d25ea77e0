#pragma once

#include <vector>

#include "towlab/types.hpp"

namespace towlab {

/// Equal- or positive-weight cubature on a ball. Nodes are stored column-wise
/// (dim x count); weights sum to 1. Every rule produced here is closed under
/// zeta -> -zeta with equal weights, so odd moments vanish identically.
struct QuadratureRule {
  Mat nodes;
  std::vector<double> weights;

  int dim() const { return static_cast<int>(nodes.rows()); }
  int size() const { return static_cast<int>(nodes.cols()); }
};

/// Rule for averages over the (n-1)-ball {zeta_1 = 0, |zeta| < 1} in R^n.
///  n = 2: composite midpoint rule on {(0, t) : |t| <= 1}.
///  n = 3: equal-area polar rings when m is a multiple of 4, otherwise a
///         symmetrized Halton set.
///  n > 3: symmetrized Halton set (rejection from the cube).
/// Requires n >= 2 and m >= 2 even.
QuadratureRule ball_quadrature(int n, int m);

/// Rule for averages over the full unit n-ball (used by the full-ball DPP).
///  n = 2: equal-area polar rings with a multiple of 4 sectors; exact for
///         polynomials of degree <= 3 and for x1^2 - x2^2.
///  n = 3: midpoint shells in r^3 times the 26-point Lebedev sphere rule.
///  n > 3: symmetrized Halton set.
/// The node count is approximately m; query size() for the exact count.
QuadratureRule full_ball_quadrature(int n, int m);

/// Antipodally closed set of unit directions used to discretize sup/inf over
/// the unit sphere.
struct DirectionSet {
  Mat dirs;  // dim x count
  /// Largest angle from a probe direction to its nearest member (covering
  /// radius estimate).
  double covering_angle = 0.0;

  int dim() const { return static_cast<int>(dirs.rows()); }
  int size() const { return static_cast<int>(dirs.cols()); }
};

DirectionSet direction_set(int n, int m);

/// Sum_i w_i g(node_i) for a scalar callback.
template <class Fn>
double integrate(const QuadratureRule& rule, Fn&& g) {
  double acc = 0.0;
  for (int i = 0; i < rule.size(); ++i) acc += rule.weights[i] * g(rule.nodes.col(i));
  return acc;
}

}  // namespace towlab
