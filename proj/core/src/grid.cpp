#include "towlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace towlab {

namespace {

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

Domain::Domain(Kind kind, Vec center, Vec size, double epsilon)
    : kind_(kind), center_(std::move(center)), size_(std::move(size)), epsilon_(epsilon) {
  if (center_.size() < 1) throw DomainError("Domain: empty center");
  if (!(size_.array() > 0.0).all()) throw DomainError("Domain: sizes must be positive");
  if (!(epsilon_ > 0.0)) throw DomainError("Domain: epsilon must be positive");
  if (!(epsilon_ < characteristic_size() / 4.0)) {
    throw DomainError("Domain: epsilon must be below a quarter of the characteristic size");
  }
}

Domain Domain::box(Vec center, Vec half_widths, double epsilon) {
  require_same_dim(center, half_widths, "Domain::box");
  return Domain(Kind::box, std::move(center), std::move(half_widths), epsilon);
}

Domain Domain::ball(Vec center, double radius, double epsilon) {
  Vec r(1);
  r[0] = radius;
  return Domain(Kind::ball, std::move(center), std::move(r), epsilon);
}

Domain Domain::box_from_corners(const Vec& lo, const Vec& hi, double epsilon) {
  require_same_dim(lo, hi, "Domain::box_from_corners");
  return box((lo + hi) / 2.0, (hi - lo) / 2.0, epsilon);
}

bool Domain::contains(const Vec& x, double inset) const {
  require_same_dim(x, center_, "Domain::contains");
  if (kind_ == Kind::box) {
    return ((x - center_).cwiseAbs().array() < size_.array() - inset).all();
  }
  return (x - center_).norm() < size_[0] - inset;
}

double Domain::characteristic_size() const {
  return kind_ == Kind::box ? 2.0 * size_.minCoeff() : 2.0 * size_[0];
}

Vec Domain::lower() const {
  if (kind_ == Kind::box) return center_ - size_;
  return center_.array() - size_[0];
}

Vec Domain::upper() const {
  if (kind_ == Kind::box) return center_ + size_;
  return center_.array() + size_[0];
}

Domain Domain::with_epsilon(double epsilon) const { return Domain(kind_, center_, size_, epsilon); }

nlohmann::json Domain::to_json() const {
  nlohmann::json j = {{"kind", kind_ == Kind::box ? "box" : "ball"},
                      {"center", vec_json(center_)},
                      {"epsilon", epsilon_}};
  if (kind_ == Kind::box) {
    j["half_widths"] = vec_json(size_);
  } else {
    j["radius"] = size_[0];
  }
  return j;
}

Lattice::Lattice(Vec origin, double h, std::vector<int> counts)
    : origin_(std::move(origin)), h_(h), counts_(std::move(counts)) {
  if (!(h_ > 0.0)) throw DomainError("Lattice: spacing must be positive");
  if (static_cast<Eigen::Index>(counts_.size()) != origin_.size()) {
    throw DimensionMismatch("Lattice: counts and origin differ in dimension");
  }
  strides_.resize(counts_.size());
  size_ = 1;
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    if (counts_[k] < 2) throw DomainError("Lattice: need at least two nodes per axis");
    strides_[k] = size_;
    size_ *= static_cast<std::size_t>(counts_[k]);
  }
  if (size_ > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
    throw DomainError("Lattice: too many nodes");
  }
}

Lattice Lattice::covering(const Domain& domain, double h, double margin) {
  const int n = domain.dim();
  const Vec lo = domain.lower().array() - margin;
  const Vec hi = domain.upper().array() + margin;
  Vec origin(n);
  std::vector<int> counts(n);
  for (int k = 0; k < n; ++k) {
    const double c = domain.center()[k];
    const auto k_lo = static_cast<long>(std::floor((lo[k] - c) / h + 1e-9));
    const auto k_hi = static_cast<long>(std::ceil((hi[k] - c) / h - 1e-9));
    origin[k] = c + static_cast<double>(k_lo) * h;
    counts[k] = static_cast<int>(k_hi - k_lo + 1);
  }
  return Lattice(std::move(origin), h, std::move(counts));
}

Vec Lattice::point(std::size_t index) const {
  Vec p(origin_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    const auto i = static_cast<int>((index / strides_[k]) % static_cast<std::size_t>(counts_[k]));
    p[static_cast<Eigen::Index>(k)] = origin_[static_cast<Eigen::Index>(k)] + i * h_;
  }
  return p;
}

std::vector<int> Lattice::multi_index(std::size_t index) const {
  std::vector<int> idx(counts_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    idx[k] = static_cast<int>((index / strides_[k]) % static_cast<std::size_t>(counts_[k]));
  }
  return idx;
}

std::size_t Lattice::flat(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (std::size_t k = 0; k < counts_.size(); ++k) f += strides_[k] * static_cast<std::size_t>(idx[k]);
  return f;
}

bool Lattice::in_hull(const Vec& y, double slack) const {
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double t = (y[k] - origin_[k]) / h_;
    if (t < -slack || t > counts_[static_cast<std::size_t>(k)] - 1 + slack) return false;
  }
  return true;
}

void Lattice::stencil(const Vec& y, std::vector<std::int32_t>& idx, std::vector<double>& w) const {
  const int n = dim();
  if (y.size() != n) throw DimensionMismatch("Lattice::stencil: dimension mismatch");
  int base[16];
  double frac[16];
  if (n > 16) throw DomainError("Lattice::stencil: dimension above 16");
  for (int k = 0; k < n; ++k) {
    const double t = (y[k] - origin_[k]) / h_;
    const int top = counts_[static_cast<std::size_t>(k)] - 1;
    if (!(t >= -1e-9) || !(t <= top + 1e-9)) {
      throw StripError("evaluation point leaves the lattice hull (strip too thin)");
    }
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, top - 1);
    base[k] = i;
    frac[k] = std::clamp(t - i, 0.0, 1.0);
  }
  idx.clear();
  w.clear();
  const int corners = 1 << n;
  for (int c = 0; c < corners; ++c) {
    double weight = 1.0;
    std::size_t f = 0;
    for (int k = 0; k < n; ++k) {
      const bool up = (c >> k) & 1;
      weight *= up ? frac[k] : 1.0 - frac[k];
      f += strides_[static_cast<std::size_t>(k)] * static_cast<std::size_t>(base[k] + (up ? 1 : 0));
    }
    if (weight == 0.0) continue;
    idx.push_back(static_cast<std::int32_t>(f));
    w.push_back(weight);
  }
}

BoundaryDatum BoundaryDatum::constant(double c) {
  return BoundaryDatum([c](const Vec&) { return c; }, "constant", {{"kind", "constant"}, {"value", c}});
}

BoundaryDatum BoundaryDatum::affine(double c0, Vec gradient) {
  nlohmann::json j = {{"kind", "affine"}, {"c0", c0}, {"gradient", vec_json(gradient)}};
  return BoundaryDatum(
      [c0, gradient = std::move(gradient)](const Vec& x) { return c0 + gradient.dot(x); }, "affine",
      std::move(j));
}

BoundaryDatum BoundaryDatum::quadratic_harmonic(double scale) {
  return BoundaryDatum([scale](const Vec& x) { return scale * (x[0] * x[0] - x[1] * x[1]); },
                       "quadratic_harmonic", {{"kind", "quadratic_harmonic"}, {"scale", scale}});
}

BoundaryDatum BoundaryDatum::polynomial(std::vector<Term> terms) {
  nlohmann::json jt = nlohmann::json::array();
  for (const auto& t : terms) {
    for (int p : t.powers) {
      if (p < 0) throw DomainError("BoundaryDatum::polynomial: negative power");
    }
    jt.push_back({{"coef", t.coef}, {"powers", t.powers}});
  }
  return BoundaryDatum(
      [terms = std::move(terms)](const Vec& x) {
        double acc = 0.0;
        for (const auto& t : terms) {
          if (static_cast<Eigen::Index>(t.powers.size()) > x.size()) {
            throw DimensionMismatch("BoundaryDatum::polynomial: term has more powers than coordinates");
          }
          double m = t.coef;
          for (std::size_t k = 0; k < t.powers.size(); ++k) {
            for (int e = 0; e < t.powers[k]; ++e) m *= x[static_cast<Eigen::Index>(k)];
          }
          acc += m;
        }
        return acc;
      },
      "polynomial", {{"kind", "polynomial"}, {"terms", std::move(jt)}});
}

BoundaryDatum BoundaryDatum::custom(Fn fn, std::string label) {
  nlohmann::json j = {{"kind", "custom"}, {"label", label}};
  return BoundaryDatum(std::move(fn), "custom", std::move(j));
}

GridField::GridField(std::shared_ptr<const Lattice> lattice, Domain domain)
    : lattice_(std::move(lattice)), domain_(std::move(domain)) {
  if (lattice_->dim() != domain_.dim()) throw DimensionMismatch("GridField: lattice/domain dimension");
  const std::size_t total = lattice_->size();
  values_.assign(total, 0.0);
  regions_.resize(total);
  // Nodes within round-off of the boundary count as strip nodes.
  const double inset = 1e-9 * lattice_->h();
  for (std::size_t i = 0; i < total; ++i) {
    const bool inside = domain_.contains(lattice_->point(i), inset);
    regions_[i] = inside ? Region::interior : Region::strip;
    (inside ? interior_ : strip_).push_back(i);
  }
}

GridField GridField::make(const Domain& domain, double h) {
  if (!(h > 0.0)) throw DomainError("GridField::make: h must be positive");
  auto lattice = std::make_shared<const Lattice>(Lattice::covering(domain, h, domain.epsilon() + h));
  return GridField(std::move(lattice), domain);
}

void GridField::impose(const BoundaryDatum& g) {
  for (std::size_t i : strip_) values_[i] = g(lattice_->point(i));
}

void GridField::fill(const std::function<double(const Vec&)>& fn) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = fn(lattice_->point(i));
}

double GridField::interpolate(const Vec& y) const {
  thread_local std::vector<std::int32_t> idx;
  thread_local std::vector<double> w;
  lattice_->stencil(y, idx, w);
  // offsets from the first corner: constants are reproduced exactly
  const double base = values_[static_cast<std::size_t>(idx[0])];
  double acc = 0.0;
  for (std::size_t k = 1; k < idx.size(); ++k) acc += w[k] * (values_[static_cast<std::size_t>(idx[k])] - base);
  return base + acc;
}

double GridField::strip_min() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i : strip_) m = std::min(m, values_[i]);
  return m;
}

double GridField::strip_max() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i : strip_) m = std::max(m, values_[i]);
  return m;
}

double GridField::sup_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace towlab
