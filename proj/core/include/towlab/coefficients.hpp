#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "towlab/types.hpp"

namespace towlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Which tug-of-war DPP is in play.
///  orthogonal: alpha = (p-1)/(n+p), noise uniform on the (n-1)-ball orthogonal to the move.
///  fullball:   alpha = (p-2)/(n+p), noise uniform on the full ball; needs p > 2.
enum class Variant { orthogonal, fullball };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// p : Omega -> (1, inf] together with its declared Hoelder data
/// |p(x) - p(z)| <= c_p |x - z|^s and the lower bound p_min.
class ExponentField {
 public:
  using Fn = std::function<double(const Vec&)>;

  /// p(x) = p (p may be kInfinity).
  static ExponentField constant(double p);
  /// p(x) = p0 + <gradient, x - center>, declared on the ball |x - center| <= radius.
  /// The Hoelder constant is |gradient| (2 radius)^(1-s).
  static ExponentField affine(double p0, Vec gradient, Vec center, double radius, double s = 1.0);
  /// p(x) = p0 + amp |x - center|^s, amp >= 0.
  static ExponentField radial_holder(double p0, double amp, Vec center, double s);
  /// Any closed form; the caller vouches for s, c_p and p_min.
  static ExponentField custom(Fn fn, double s, double c_p, double p_min, std::string label = "custom");

  double operator()(const Vec& x) const;

  double s() const { return s_; }
  double c_p() const { return c_p_; }
  double p_min() const { return p_min_; }
  bool is_constant() const { return c_p_ == 0.0; }
  const std::string& kind() const { return kind_; }
  const nlohmann::json& params() const { return params_; }
  nlohmann::json to_json() const;

 private:
  ExponentField(Fn fn, double s, double c_p, double p_min, std::string kind, nlohmann::json params);

  Fn fn_;
  double s_;
  double c_p_;
  double p_min_;
  std::string kind_;
  nlohmann::json params_;
};

/// alpha + beta == 1 exactly (beta is 1 - alpha).
struct CoefficientPair {
  double alpha;
  double beta;
};

/// Coefficients for a given p-value in dimension n.
CoefficientPair coeffs(Variant variant, double p, int n);
CoefficientPair coeffs_orthogonal_variant(const ExponentField& field, const Vec& x);
CoefficientPair coeffs_fullball_variant(const ExponentField& field, const Vec& x);
CoefficientPair coeffs(Variant variant, const ExponentField& field, const Vec& x);
/// As coeffs, but the full-ball variant also accepts p = 2 as the limit
/// p -> 2+ (alpha = 0, pure ball averaging). Used by the solver and the games.
CoefficientPair coeffs_closed(Variant variant, const ExponentField& field, const Vec& x);

/// alpha evaluated at p_min (alpha is increasing in p for both variants).
double alpha_min(const ExponentField& field, Variant variant, int n);

/// Hoelder constant of alpha from the chain bound
/// |alpha(x) - alpha(z)| <= (n+1)/(n+p_min)^2 |p(x) - p(z)|   (orthogonal)
///                       <= (n+2)/(n+p_min)^2 |p(x) - p(z)|   (fullball)
double alpha_holder_constant(const ExponentField& field, Variant variant, int n);
/// The Lipschitz factor of p -> alpha at p_min used above.
double alpha_chain_factor(Variant variant, double p_min, int n);

/// Least-squares slope of log(diff) against log(dist) over pairs with
/// diff > 0, plus the largest ratio diff / dist^slope.
struct PowerFit {
  double exponent = 0.0;
  double constant = 0.0;
  int used = 0;
};

PowerFit fit_power_law(const std::vector<double>& dist, const std::vector<double>& diff);

/// Empirical Hoelder data of alpha over the given pairs. With no nonzero
/// difference the result is (declared s, 0).
PowerFit estimate_holder(const ExponentField& field, Variant variant,
                         const std::vector<std::pair<Vec, Vec>>& samples);

}  // namespace towlab
