#pragma once

#include <vector>

#include "towlab/types.hpp"

namespace towlab {

/// A direction in R^n with |v| = 1 (checked to 1e-12 at construction).
class UnitVector {
 public:
  static constexpr double kTolerance = 1e-12;

  explicit UnitVector(Vec coords);

  /// Rescales `v` to unit length; throws DomainError for the zero vector.
  static UnitVector normalized(const Vec& v);
  /// The signed standard basis vector sign * e_{axis+1}.
  static UnitVector axis(int dim, int axis, double sign = 1.0);

  const Vec& coords() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }
  double operator[](int i) const { return v_[i]; }
  UnitVector operator-() const;

 private:
  struct Unchecked {};
  UnitVector(Vec coords, Unchecked) : v_(std::move(coords)) {}
  Vec v_;
};

/// Decomposition of h relative to span{v}: the signed component along v and
/// the (nonnegative) length of the orthogonal remainder.
struct Projection {
  double along;
  double across;
};

Projection project(const Vec& h, const UnitVector& v);

/// Orthogonal matrix whose first column is a prescribed unit vector.
class OrthogonalFrame {
 public:
  OrthogonalFrame(Mat matrix, int det_sign);

  const Mat& matrix() const { return m_; }
  int det_sign() const { return det_sign_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  Vec column(int j) const { return m_.col(j); }
  /// Frame applied to a vector, P * zeta.
  Vec apply(const Vec& zeta) const { return m_ * zeta; }
  /// max_{ij} |P P^T - I|_{ij}
  double orthogonality_residual() const;

 private:
  Mat m_;
  int det_sign_;
};

/// Deterministic orthonormal completion: given k orthonormal columns, returns
/// n-k further orthonormal columns by largest-pivot Gram-Schmidt over the
/// standard basis (ties go to the lowest index).
Mat complete_orthonormal(const Mat& columns);

/// P with P e_1 = nu and det P = det_sign.
OrthogonalFrame frame_for(const UnitVector& nu, int det_sign);

/// The pair of frames (P_x, P_z) sharing the trailing n-2 columns, with
/// det P_x = +1, det P_z = -1, so that |P_x zeta - P_z zeta| <= |nu_x + nu_z|
/// whenever zeta_1 = 0 and |zeta| <= 1.
struct CoupledRotation {
  OrthogonalFrame p_x;
  OrthogonalFrame p_z;
  UnitVector nu_x;
  UnitVector nu_z;

  Vec rho_x() const { return p_x.column(1); }
  Vec rho_z() const { return p_z.column(1); }
};

CoupledRotation coupled_rotation(const UnitVector& nu_x, const UnitVector& nu_z);

/// Rotates v by theta inside span{v, w}, toward w; the orthogonal complement
/// of the plane is fixed.
UnitVector rotate_in_plane(const UnitVector& v, const UnitVector& w, double theta);

// Sampling helpers (uniform laws).
Vec sample_unit_sphere(int dim, Rng& rng);
/// Uniform on the (n-1)-ball {zeta_1 = 0, |zeta| <= 1} embedded in R^n.
Vec sample_orthogonal_ball(int dim, Rng& rng);
/// Uniform on the closed unit n-ball.
Vec sample_unit_ball(int dim, Rng& rng);

}  // namespace towlab
