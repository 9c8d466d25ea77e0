#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "towlab/coefficients.hpp"
#include "towlab/comparison.hpp"
#include "towlab/game.hpp"
#include "towlab/quadrature.hpp"

namespace towlab {

/// Second-order Taylor bound for f1 at separations beyond N eps / 10.
struct TaylorCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
  double along = 0.0;   // (h_x - h_z)_V
  double across = 0.0;  // |(h_x - h_z)_{V-perp}|
  double omega = 0.0, omega_d1 = 0.0, omega_d2 = 0.0;
  double remainder = 0.0;  // (4M + 1) t^{gamma - 2} eps^2
  /// True when every moved separation stays inside [0, knee], where omega
  /// is the polynomial branch.
  bool polynomial_range = false;
  nlohmann::json to_json() const;
};

/// Throws DomainError unless N eps/10 < |x - z| <= omega1 and |h| <= eps.
TaylorCheck taylor_bound_check(const ComparisonFunction& cf, const Vec& x, const Vec& z, const Vec& hx,
                               const Vec& hz);

/// Opponent move (nu_x, nu_z) against the threshold-angle response.
struct CaseCheck {
  double lhs = 0.0;     // F(nu) + F(response) - 2 f
  double g1 = 0.0;      // f1 part of lhs
  double log_g2 = 0.0;  // log of the f2 part subtracted from g1
  double theta = 0.0;   // |x - z|^s
  double along = 0.0;   // (nu_x - nu_z)_V
  double bound = 0.0;   // analytic bound (case 2 only)
  bool in_regime = true;
  bool ok = false;
  std::string status;  // "pass", "fail", "outside_regime"
  nlohmann::json to_json() const;
};

/// Reversal response (-nu_x, -nu_z); requires (nu_x - nu_z)_V^2 >= 4 - |x - z|^s.
CaseCheck case1_verify(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                       const QuadratureRule& rule, const Vec& x, const Vec& z, const UnitVector& nu_x,
                       const UnitVector& nu_z);
/// Straight pull (-v, v); requires (nu_x - nu_z)_V^2 <= 4 - |x - z|^s. Uses
/// C_u and delta from the parameters.
CaseCheck case2_verify(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                       const QuadratureRule& rule, const Vec& x, const Vec& z, const UnitVector& nu_x,
                       const UnitVector& nu_z);

/// The chain for |x - z| <= N eps / 10: rough G1 bound, G2 lower bound and
/// the final inequality sup F + inf F < 2 f - C eps.
struct AnnularCheck {
  long index = 0;
  bool diagonal = false;
  double g1_sup = 0.0;       // bound on sup_nu G1 - f1
  double g1_limit = 0.0;     // 3 C eps
  bool g1_ok = false;
  double g1_move = 0.0;      // G1 - f1 for the pulling move
  long moved_index = 0;      // annulus reached by the deterministic branch
  double log_g2 = 0.0;       // log G2 for the pulling move
  double log_g2_floor = 0.0; // log(alpha_min C^{2(N-i+1)} eps)
  bool g2_floor_ok = false;
  double log_g2_need = 0.0;  // log(7 C eps + 2 f2)
  bool g2_ok = false;
  bool final_ok = false;
  double final_margin_log = 0.0;  // log(G2 - 2 f2) - log(G1 excess + C eps) when defined
  bool ok = false;
  std::string failed_link;
  nlohmann::json to_json() const;
};

AnnularCheck annular_verify(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                            const QuadratureRule& rule, const Vec& x, const Vec& z);

// ---- batches ---------------------------------------------------------------

/// x, z in B_r(center) with |x - z| = t, midpoint uniform in B_{r - t/2}.
std::pair<Vec, Vec> sample_pair(const Vec& center, double r, double t, Rng& rng);
/// Random opponent move with (nu_x - nu_z)_V^2 >= 4 - theta.
Move sample_case1_move(const Vec& x, const Vec& z, double theta, Rng& rng);
/// Random opponent move with (nu_x - nu_z)_V^2 < 4 - theta.
Move sample_case2_move(const Vec& x, const Vec& z, double theta, Rng& rng);

struct BatchSummary {
  std::string name;
  long total = 0;
  long passed = 0;
  long failed = 0;
  long skipped = 0;  // outside a proof regime, not counted as failures
  double worst = 0.0;  // largest violation measure (lhs - rhs, or lhs)
  nlohmann::json worst_case;
  nlohmann::json extra;
  bool ok() const { return total > 0 && failed == 0; }
  nlohmann::json to_json() const;
};

struct BatchOptions {
  int dim = 2;
  long count = 1000;
  std::uint64_t seed = 1;
  /// Separation range; t_max <= 0 means omega1.
  double t_min = 0.0;
  double t_max = 0.0;
  Vec center;  // empty: origin
  int threads = 0;  // 0: hardware concurrency
};

BatchSummary taylor_batch(const ComparisonFunction& cf, const BatchOptions& opt);
BatchSummary case1_batch(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                         const QuadratureRule& rule, const BatchOptions& opt);
BatchSummary case2_batch(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                         const QuadratureRule& rule, const BatchOptions& opt);
/// `count` configurations per annulus index i = 1..N.
BatchSummary annular_batch(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                           const QuadratureRule& rule, const BatchOptions& opt);

}  // namespace towlab
