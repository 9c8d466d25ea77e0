#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "towlab/coefficients.hpp"
#include "towlab/geometry.hpp"
#include "towlab/quadrature.hpp"

namespace towlab {

/// Constants of the comparison function f = f1 - f2,
///   f1(x, z) = C omega(|x - z|) + M |x + z|^2,
///   f2(x, z) = C^{2(N-i)} eps on the annulus A_i, 0 beyond N eps / 10.
struct ComparisonParams {
  double s = 0.5;
  double gamma = 1.5;
  double omega0 = 1.0;
  double omega1 = 0.0;
  double C = 1.0;
  double M = 0.0;
  long N = 40;
  double r = 1.0;
  double c_alpha = 0.0;
  double alpha_min = 1.0;
  double sup_u = 0.0;
  double C_u = 0.0;
  double delta = 1.0;
  /// Constant added to omega beyond the knee so that C omega(r) > 2 sup_u.
  double omega_offset = 0.0;
  /// Which lower bound fixed omega0, C and N.
  std::string binding_omega0, binding_C, binding_N;

  /// Recomputes gamma and omega1 from s and omega0.
  void finalize();
  nlohmann::json to_json() const;
};

struct RecipeInputs {
  double s;
  double c_alpha;
  double alpha_min;
  double r;
  double sup_u;
  double C_u;
  double delta;
};

/// omega0 = 1.01 max(its three lower bounds), C = 1.01 max(its five lower
/// bounds, the quadratic one through its larger root), N the smallest
/// integer >= 40 beyond both N bounds, M = 2 sup_u / (3 r^2).
ComparisonParams constants_recipe(const RecipeInputs& in);

struct Predicate {
  std::string name;
  double lhs;
  double rhs;
  bool ok;
};

/// Every admissibility inequality as a named arithmetic predicate.
std::vector<Predicate> admissibility(const ComparisonParams& p);
bool admissible(const ComparisonParams& p);

struct OmegaValue {
  double value;
  double d1;
  double d2;
};

/// omega(t) = t - omega0 t^gamma on [0, knee] with knee = 1.5^{1/s} omega1
/// (so omega' falls from 1/2 at omega1 to 1/4 at the knee); beyond the knee
/// the linear continuation with slope 1/4 plus omega_offset (d2 = 0 there).
OmegaValue omega_eval(const ComparisonParams& p, double t);
double omega_knee(const ComparisonParams& p);
/// omega(t + dt) - omega(t) without cancellation when both arguments lie in
/// [0, knee].
double omega_increment(const ComparisonParams& p, double t, double dt);

/// Annulus index: 0 on the diagonal, i with (i-1) eps/10 < d <= i eps/10 for
/// i <= N, and N + 1 beyond N eps / 10 (where f2 = 0).
long annulus_index(const ComparisonParams& p, double eps, double d);

struct FValue {
  double f;
  double f1;
  double f2;  // may be +inf when C^{2N} eps overflows
  double log_f2;  // -inf when f2 = 0
  long annulus;
};

class ComparisonFunction {
 public:
  ComparisonFunction(ComparisonParams params, double eps);

  const ComparisonParams& params() const { return p_; }
  double epsilon() const { return eps_; }

  double f1(const Vec& x, const Vec& z) const;
  /// log(C^{2(N-i)} eps) for annulus i, -inf beyond N.
  double log_f2_index(long i) const;
  FValue eval(const Vec& x, const Vec& z) const;
  /// f1(x + hx, z + hz) - f1(x, z) computed from the displacements.
  double f1_increment(const Vec& x, const Vec& z, const Vec& hx, const Vec& hz) const;
  /// log sup f2 = log(C^{2N} eps).
  double log_sup_f2() const { return log_f2_index(0); }

 private:
  ComparisonParams p_;
  double eps_;
};

/// f_eval(p, x, z) -> (f, f1, f2).
FValue f_eval(const ComparisonParams& p, double eps, const Vec& x, const Vec& z);

/// Weighted displacement pairs (hx, hz) realizing the three coupled terms:
/// alpha(z) * (eps nu_x, eps nu_z), beta(x) * rule over (eps P_x zeta, eps P_z zeta),
/// (alpha(x) - alpha(z)) * rule over (eps nu_x, eps P_z zeta). For the full-ball
/// variant the rule is the full-ball rule and the noise displacements are eps zeta.
/// Labels are swapped internally when alpha(x) < alpha(z); the output is in
/// the caller's labels.
struct CouplingPoints {
  std::vector<Vec> hx, hz;
  std::vector<double> weight;
  std::vector<int> branch;  // 0, 1, 2 as above
  std::array<double, 3> branch_weight{};
  bool swapped = false;
};

CouplingPoints coupling_points(const UnitVector& nu_x, const UnitVector& nu_z, double alpha_x, double alpha_z,
                               Variant variant, const QuadratureRule& rule, double eps);

/// F for an arbitrary test functional f(x, z).
double F_eval(const std::function<double(const Vec&, const Vec&)>& f, const Vec& x, const Vec& z,
              const CouplingPoints& pts);

/// F - f(x, z) for the comparison function, split into the f1 and f2 parts.
struct FIncrement {
  std::array<double, 3> g1_terms{};  // weighted f1 increments per branch
  double g1 = 0.0;                   // G1 - f1(x, z)
  double log_g2 = 0.0;               // log G2 (-inf when G2 = 0)
  double log_f2 = 0.0;               // log f2(x, z)
  long annulus = 0;
  /// F - f as a double (may be -inf when G2 overflows).
  double value() const;
};

FIncrement F_increment(const ComparisonFunction& cf, const Vec& x, const Vec& z, const CouplingPoints& pts);

/// Convenience: F(f, x, z, nu_x, nu_z) for the comparison function, with
/// coefficients taken from the exponent field.
double F_eval(const ComparisonFunction& cf, const ExponentField& field, Variant variant, const QuadratureRule& rule,
              const Vec& x, const Vec& z, const UnitVector& nu_x, const UnitVector& nu_z);

/// log(exp(a) + exp(b)) with -inf handling.
double log_add(double a, double b);
/// log(exp(a) - exp(b)) for a >= b; -inf when equal.
double log_sub(double a, double b);

}  // namespace towlab
