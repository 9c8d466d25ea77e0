#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "towlab/types.hpp"

namespace towlab {

/// Bounded open set: an axis-aligned box {|x_i - c_i| < a_i} or a ball
/// {|x - c| < R}, together with the step radius epsilon.
class Domain {
 public:
  enum class Kind { box, ball };

  static Domain box(Vec center, Vec half_widths, double epsilon);
  static Domain ball(Vec center, double radius, double epsilon);
  /// Box [lo_1, hi_1] x ... given by corners.
  static Domain box_from_corners(const Vec& lo, const Vec& hi, double epsilon);

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(center_.size()); }
  const Vec& center() const { return center_; }
  /// Half-widths for a box, a single radius for a ball.
  const Vec& size() const { return size_; }
  double epsilon() const { return epsilon_; }

  /// x lies in the open set by more than `inset`.
  bool contains(const Vec& x, double inset = 0.0) const;
  /// Smallest side length (box) or the diameter (ball).
  double characteristic_size() const;
  /// Axis-aligned bounding box of the closure.
  Vec lower() const;
  Vec upper() const;

  Domain with_epsilon(double epsilon) const;
  nlohmann::json to_json() const;

 private:
  Domain(Kind kind, Vec center, Vec size, double epsilon);
  Kind kind_;
  Vec center_;
  Vec size_;
  double epsilon_;
};

/// Regular lattice origin + h * i, i in [0, counts) per axis, flattened with
/// axis 0 fastest.
class Lattice {
 public:
  Lattice(Vec origin, double h, std::vector<int> counts);
  /// Smallest lattice with spacing h, aligned with the domain center, whose
  /// hull contains the closure of the domain enlarged by `margin`.
  static Lattice covering(const Domain& domain, double h, double margin);

  int dim() const { return static_cast<int>(origin_.size()); }
  double h() const { return h_; }
  const Vec& origin() const { return origin_; }
  const std::vector<int>& counts() const { return counts_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  Vec point(std::size_t index) const;
  std::vector<int> multi_index(std::size_t index) const;
  std::size_t flat(const std::vector<int>& idx) const;
  bool in_hull(const Vec& y, double slack = 1e-12) const;

  /// Multilinear interpolation stencil of y: up to 2^n (index, weight)
  /// pairs, weights nonnegative and summing to 1. Throws StripError when y
  /// leaves the hull.
  void stencil(const Vec& y, std::vector<std::int32_t>& idx, std::vector<double>& w) const;

 private:
  Vec origin_;
  double h_;
  std::vector<int> counts_;
  std::vector<std::size_t> strides_;
  std::size_t size_;
};

/// Exterior datum g. Named closed forms are serializable; `custom` wraps a
/// callback and serializes only its label.
class BoundaryDatum {
 public:
  using Fn = std::function<double(const Vec&)>;
  struct Term {
    double coef;
    std::vector<int> powers;
  };

  static BoundaryDatum constant(double c);
  static BoundaryDatum affine(double c0, Vec gradient);
  /// scale * (x1^2 - x2^2)
  static BoundaryDatum quadratic_harmonic(double scale = 1.0);
  /// Sum of coef * prod x_k^{powers_k}.
  static BoundaryDatum polynomial(std::vector<Term> terms);
  static BoundaryDatum custom(Fn fn, std::string label);

  double operator()(const Vec& x) const { return fn_(x); }
  const std::string& kind() const { return kind_; }
  nlohmann::json to_json() const { return json_; }

 private:
  BoundaryDatum(Fn fn, std::string kind, nlohmann::json json)
      : fn_(std::move(fn)), kind_(std::move(kind)), json_(std::move(json)) {}
  Fn fn_;
  std::string kind_;
  nlohmann::json json_;
};

enum class Region : std::uint8_t { interior = 0, strip = 1 };

/// u_eps on the lattice. Interior nodes are those inside the open domain;
/// every other node belongs to the strip and carries g.
class GridField {
 public:
  GridField(std::shared_ptr<const Lattice> lattice, Domain domain);

  /// Lattice covering the domain plus an epsilon strip (with one extra cell
  /// of margin so interpolation stencils near the strip edge stay inside).
  static GridField make(const Domain& domain, double h);

  const Lattice& lattice() const { return *lattice_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lattice_; }
  const Domain& domain() const { return domain_; }
  std::size_t size() const { return values_.size(); }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  Region region(std::size_t i) const { return regions_[i]; }
  const std::vector<std::size_t>& interior() const { return interior_; }
  const std::vector<std::size_t>& strip() const { return strip_; }
  Vec point(std::size_t i) const { return lattice_->point(i); }

  /// Writes g on all strip nodes (and nowhere else).
  void impose(const BoundaryDatum& g);
  /// Sets every node (strip included) from fn.
  void fill(const std::function<double(const Vec&)>& fn);
  /// Multilinear interpolation.
  double interpolate(const Vec& y) const;

  double strip_min() const;
  double strip_max() const;
  double sup_abs() const;

 private:
  std::shared_ptr<const Lattice> lattice_;
  Domain domain_;
  std::vector<double> values_;
  std::vector<Region> regions_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> strip_;
};

}  // namespace towlab
