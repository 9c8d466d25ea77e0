#include "towlab/coefficients.hpp"

#include <cmath>

namespace towlab {

std::string to_string(Variant v) { return v == Variant::orthogonal ? "orthogonal" : "fullball"; }

Variant variant_from_string(const std::string& name) {
  if (name == "orthogonal") return Variant::orthogonal;
  if (name == "fullball") return Variant::fullball;
  throw DomainError("unknown variant '" + name + "'");
}

namespace {

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json p_json(double p) {
  if (std::isinf(p)) return "inf";
  return p;
}

}  // namespace

ExponentField::ExponentField(Fn fn, double s, double c_p, double p_min, std::string kind,
                             nlohmann::json params)
    : fn_(std::move(fn)), s_(s), c_p_(c_p), p_min_(p_min), kind_(std::move(kind)),
      params_(std::move(params)) {
  if (!(s_ > 0.0 && s_ <= 1.0)) throw DomainError("ExponentField: s must lie in (0, 1]");
  if (!(c_p_ >= 0.0)) throw DomainError("ExponentField: c_p must be nonnegative");
  if (!(p_min_ > 1.0)) throw DomainError("ExponentField: p_min must exceed 1");
}

ExponentField ExponentField::constant(double p) {
  if (!(p > 1.0)) throw DomainError("ExponentField::constant: p must exceed 1");
  return ExponentField([p](const Vec&) { return p; }, 1.0, 0.0, p, "constant",
                       {{"p", p_json(p)}});
}

ExponentField ExponentField::affine(double p0, Vec gradient, Vec center, double radius, double s) {
  require_same_dim(gradient, center, "ExponentField::affine");
  if (!(radius > 0.0)) throw DomainError("ExponentField::affine: radius must be positive");
  const double slope = gradient.norm();
  const double p_min = p0 - slope * radius;
  nlohmann::json params = {{"p0", p0}, {"gradient", vec_json(gradient)},
                           {"center", vec_json(center)}, {"radius", radius}, {"s", s}};
  return ExponentField(
      [p0, gradient = std::move(gradient), center = std::move(center)](const Vec& x) {
        return p0 + gradient.dot(x - center);
      },
      s, slope * std::pow(2.0 * radius, 1.0 - s), p_min, "affine", std::move(params));
}

ExponentField ExponentField::radial_holder(double p0, double amp, Vec center, double s) {
  if (!(amp >= 0.0)) throw DomainError("ExponentField::radial_holder: amp must be nonnegative");
  nlohmann::json params = {{"p0", p0}, {"amp", amp}, {"center", vec_json(center)}, {"s", s}};
  // ||a|^s - |b|^s| <= |a - b|^s for s in (0, 1], hence c_p = amp.
  return ExponentField(
      [p0, amp, s, center = std::move(center)](const Vec& x) {
        return p0 + amp * std::pow((x - center).norm(), s);
      },
      s, amp, p0, "radial_holder", std::move(params));
}

ExponentField ExponentField::custom(Fn fn, double s, double c_p, double p_min, std::string label) {
  nlohmann::json params = {{"label", label}};
  return ExponentField(std::move(fn), s, c_p, p_min, "custom", std::move(params));
}

double ExponentField::operator()(const Vec& x) const { return fn_(x); }

nlohmann::json ExponentField::to_json() const {
  return {{"kind", kind_}, {"params", params_}, {"s", s_}, {"c_p", c_p_}, {"p_min", p_json(p_min_)}};
}

CoefficientPair coeffs(Variant variant, double p, int n) {
  if (n < 1) throw DomainError("coeffs: dimension must be positive");
  if (std::isnan(p)) throw DomainError("coeffs: p is NaN");
  if (variant == Variant::orthogonal) {
    if (!(p > 1.0)) throw DomainError("coeffs: orthogonal variant needs p > 1, got " + std::to_string(p));
    if (std::isinf(p)) return {1.0, 0.0};
    const double alpha = (p - 1.0) / (n + p);
    return {alpha, 1.0 - alpha};
  }
  if (!(p > 2.0)) throw DomainError("coeffs: fullball variant needs p > 2, got " + std::to_string(p));
  if (std::isinf(p)) return {1.0, 0.0};
  const double alpha = (p - 2.0) / (n + p);
  return {alpha, 1.0 - alpha};
}

CoefficientPair coeffs_orthogonal_variant(const ExponentField& field, const Vec& x) {
  return coeffs(Variant::orthogonal, field(x), static_cast<int>(x.size()));
}

CoefficientPair coeffs_fullball_variant(const ExponentField& field, const Vec& x) {
  return coeffs(Variant::fullball, field(x), static_cast<int>(x.size()));
}

CoefficientPair coeffs(Variant variant, const ExponentField& field, const Vec& x) {
  return coeffs(variant, field(x), static_cast<int>(x.size()));
}

CoefficientPair coeffs_closed(Variant variant, const ExponentField& field, const Vec& x) {
  const double p = field(x);
  if (variant == Variant::fullball && p == 2.0) return {0.0, 1.0};
  return coeffs(variant, p, static_cast<int>(x.size()));
}

double alpha_min(const ExponentField& field, Variant variant, int n) {
  return coeffs(variant, field.p_min(), n).alpha;
}

double alpha_chain_factor(Variant variant, double p_min, int n) {
  if (std::isinf(p_min)) return 0.0;
  const double num = variant == Variant::orthogonal ? n + 1.0 : n + 2.0;
  return num / ((n + p_min) * (n + p_min));
}

double alpha_holder_constant(const ExponentField& field, Variant variant, int n) {
  if (field.c_p() == 0.0) return 0.0;
  return alpha_chain_factor(variant, field.p_min(), n) * field.c_p();
}

PowerFit fit_power_law(const std::vector<double>& dist, const std::vector<double>& diff) {
  if (dist.size() != diff.size()) throw DimensionMismatch("fit_power_law: size mismatch");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (!(diff[i] > 0.0) || !(dist[i] > 0.0)) continue;
    const double lx = std::log(dist[i]);
    const double ly = std::log(diff[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++used;
  }
  PowerFit fit;
  fit.used = used;
  if (used < 2) return fit;
  const double denom = used * sxx - sx * sx;
  if (!(std::abs(denom) > 1e-300)) return fit;
  fit.exponent = (used * sxy - sx * sy) / denom;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (!(diff[i] > 0.0) || !(dist[i] > 0.0)) continue;
    fit.constant = std::max(fit.constant, diff[i] / std::pow(dist[i], fit.exponent));
  }
  return fit;
}

PowerFit estimate_holder(const ExponentField& field, Variant variant,
                         const std::vector<std::pair<Vec, Vec>>& samples) {
  if (samples.size() < 10) throw DomainError("estimate_holder: need at least 10 pairs");
  std::vector<double> dist, diff;
  dist.reserve(samples.size());
  diff.reserve(samples.size());
  for (const auto& [x, z] : samples) {
    require_same_dim(x, z, "estimate_holder");
    dist.push_back((x - z).norm());
    diff.push_back(std::abs(coeffs(variant, field, x).alpha - coeffs(variant, field, z).alpha));
  }
  PowerFit fit = fit_power_law(dist, diff);
  if (fit.used < 2) return {field.s(), 0.0, fit.used};
  return fit;
}

}  // namespace towlab
