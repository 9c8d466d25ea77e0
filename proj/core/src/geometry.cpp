#include "towlab/geometry.hpp"

#include <cmath>

namespace towlab {

UnitVector::UnitVector(Vec coords) : v_(std::move(coords)) {
  if (v_.size() == 0) {
    throw DomainError("UnitVector: empty coordinate vector");
  }
  const double norm = v_.norm();
  if (!(std::abs(norm - 1.0) <= kTolerance)) {
    throw DomainError("UnitVector: norm " + std::to_string(norm) + " is not 1");
  }
}

UnitVector UnitVector::normalized(const Vec& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DomainError("UnitVector::normalized: zero or non-finite vector");
  }
  Vec u = v / norm;
  // A second pass removes the last ulp of drift so |u| = 1 to ~1e-16.
  u /= u.norm();
  return UnitVector(std::move(u), Unchecked{});
}

UnitVector UnitVector::axis(int dim, int axis, double sign) {
  if (dim < 1 || axis < 0 || axis >= dim) {
    throw DomainError("UnitVector::axis: axis out of range");
  }
  Vec e = Vec::Zero(dim);
  e[axis] = sign < 0 ? -1.0 : 1.0;
  return UnitVector(std::move(e), Unchecked{});
}

UnitVector UnitVector::operator-() const { return UnitVector(Vec(-v_), Unchecked{}); }

Projection project(const Vec& h, const UnitVector& v) {
  require_same_dim(h, v.coords(), "project");
  const double along = v.coords().dot(h);
  const double total = h.squaredNorm();
  double radicand = total - along * along;
  if (radicand < 0.0) {
    // Round-off clamp, scaled with |h|^2 so that the tolerance is relative.
    if (radicand < -1e-14 * std::max(1.0, total)) {
      throw ConsistencyError("project: negative radicand " + std::to_string(radicand));
    }
    radicand = 0.0;
  }
  return {along, std::sqrt(radicand)};
}

OrthogonalFrame::OrthogonalFrame(Mat matrix, int det_sign)
    : m_(std::move(matrix)), det_sign_(det_sign) {
  if (m_.rows() != m_.cols()) {
    throw DimensionMismatch("OrthogonalFrame: matrix is not square");
  }
  if (det_sign != 1 && det_sign != -1) {
    throw DomainError("OrthogonalFrame: det_sign must be +1 or -1");
  }
}

double OrthogonalFrame::orthogonality_residual() const {
  const Mat r = m_ * m_.transpose() - Mat::Identity(m_.rows(), m_.cols());
  return r.cwiseAbs().maxCoeff();
}

Mat complete_orthonormal(const Mat& columns) {
  const Eigen::Index n = columns.rows();
  const Eigen::Index k = columns.cols();
  if (k > n) {
    throw DimensionMismatch("complete_orthonormal: more columns than rows");
  }
  Mat basis(n, n);
  basis.leftCols(k) = columns;
  for (Eigen::Index filled = k; filled < n; ++filled) {
    const auto current = basis.leftCols(filled);
    Eigen::Index best = -1;
    double best_norm = -1.0;
    Vec best_residual;
    for (Eigen::Index j = 0; j < n; ++j) {
      Vec r = Vec::Unit(n, j);
      r -= current * (current.transpose() * r);
      r -= current * (current.transpose() * r);
      const double norm = r.norm();
      if (norm > best_norm) {
        best_norm = norm;
        best = j;
        best_residual = std::move(r);
      }
    }
    if (best < 0 || best_norm < 1e-8) {
      throw ConsistencyError("complete_orthonormal: input columns are not independent");
    }
    Vec q = best_residual / best_norm;
    q -= current * (current.transpose() * q);
    q /= q.norm();
    basis.col(filled) = q;
  }
  return basis.rightCols(n - k);
}

namespace {

int determinant_sign(const Mat& m) {
  const double det = m.partialPivLu().determinant();
  return det < 0.0 ? -1 : 1;
}

}  // namespace

OrthogonalFrame frame_for(const UnitVector& nu, int det_sign) {
  if (det_sign != 1 && det_sign != -1) {
    throw DomainError("frame_for: det_sign must be +1 or -1");
  }
  const int n = nu.dim();
  Mat p(n, n);
  p.col(0) = nu.coords();
  if (n > 1) {
    p.rightCols(n - 1) = complete_orthonormal(nu.coords());
  }
  if (determinant_sign(p) != det_sign) {
    if (n == 1) {
      throw DomainError("frame_for: in one dimension the determinant is fixed by nu");
    }
    p.col(n - 1) = -p.col(n - 1);
  }
  return OrthogonalFrame(std::move(p), det_sign);
}

CoupledRotation coupled_rotation(const UnitVector& nu_x, const UnitVector& nu_z) {
  require_same_dim(nu_x.coords(), nu_z.coords(), "coupled_rotation");
  const int n = nu_x.dim();
  if (n < 2) {
    throw DomainError("coupled_rotation: dimension must be at least 2");
  }
  const Vec& a = nu_x.coords();
  const Vec& b = nu_z.coords();

  // Second vector u2 of an orthonormal basis {a, u2} of a plane containing
  // both directions. For b = +-a any unit vector of {a}^perp will do.
  Vec u2;
  Vec r = b - a.dot(b) * a;
  if (r.norm() > 1e-12) {
    u2 = r / r.norm();
    u2 -= a.dot(u2) * a;
    u2 /= u2.norm();
  } else {
    u2 = complete_orthonormal(a).col(0);
  }

  Mat plane(n, 2);
  plane.col(0) = a;
  plane.col(1) = u2;
  const Mat rest = complete_orthonormal(plane);  // R, n x (n-2)

  Mat base(n, n);
  base.leftCols(2) = plane;
  base.rightCols(n - 2) = rest;
  const int sign_b = determinant_sign(base);

  // With b = c a + s u2: det[a, t u2, R] = t det(base) and
  // det[b, t(-s a + c u2), R] = t det(base) (c^2 + s^2).
  double c = a.dot(b);
  double s = u2.dot(b);
  const double cs = std::hypot(c, s);
  c /= cs;
  s /= cs;
  Vec rho_x = sign_b * u2;
  Vec rho_z = -sign_b * (-s * a + c * u2);

  Mat px(n, n);
  px.col(0) = a;
  px.col(1) = rho_x;
  px.rightCols(n - 2) = rest;
  Mat pz(n, n);
  pz.col(0) = b;
  pz.col(1) = rho_z;
  pz.rightCols(n - 2) = rest;

  return CoupledRotation{OrthogonalFrame(std::move(px), 1), OrthogonalFrame(std::move(pz), -1),
                         nu_x, nu_z};
}

UnitVector rotate_in_plane(const UnitVector& v, const UnitVector& w, double theta) {
  require_same_dim(v.coords(), w.coords(), "rotate_in_plane");
  const Vec& a = v.coords();
  Vec u = w.coords() - a.dot(w.coords()) * a;
  const double norm = u.norm();
  if (norm < 1e-12) {
    throw DomainError("rotate_in_plane: v and w are parallel; rotation plane undefined");
  }
  u /= norm;
  u -= a.dot(u) * a;
  u /= u.norm();
  return UnitVector::normalized(std::cos(theta) * a + std::sin(theta) * u);
}

Vec sample_unit_sphere(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec g(dim);
  double norm = 0.0;
  do {
    for (int i = 0; i < dim; ++i) g[i] = normal(rng);
    norm = g.norm();
  } while (norm < 1e-300);
  return g / norm;
}

Vec sample_orthogonal_ball(int dim, Rng& rng) {
  if (dim < 2) {
    throw DomainError("sample_orthogonal_ball: dimension must be at least 2");
  }
  const int d = dim - 1;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Vec dir = sample_unit_sphere(d, rng);
  const double radius = std::pow(uniform(rng), 1.0 / d);
  Vec zeta = Vec::Zero(dim);
  zeta.tail(d) = radius * dir;
  return zeta;
}

Vec sample_unit_ball(int dim, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Vec dir = sample_unit_sphere(dim, rng);
  return std::pow(uniform(rng), 1.0 / dim) * dir;
}

}  // namespace towlab
