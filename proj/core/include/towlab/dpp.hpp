#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "towlab/coefficients.hpp"
#include "towlab/geometry.hpp"
#include "towlab/grid.hpp"
#include "towlab/quadrature.hpp"

namespace towlab {

/// (max + min) / 2; throws DomainError on an empty list.
double midrange(const std::vector<double>& values);

/// Discretization knobs. Zero means "use the default for this dimension".
struct DppSetup {
  Variant variant = Variant::orthogonal;
  int directions = 0;      // 64 (n=2), 256 (n=3), 512 otherwise
  int quad_nodes = 0;      // orthogonal-ball rule: 16 (n=2), 64 otherwise
  int ball_nodes = 0;      // full-ball rule: 64 (n=2), 104 (n=3), 256 otherwise
  int sphere_samples = 0;  // full-ball sup/inf sphere candidates; defaults to `directions`
};

DppSetup resolve_defaults(DppSetup setup, int n);

/// A_eps u(x, nu) = alpha u(x + eps nu) + beta * avg_i u(x + eps P_nu zeta_i)
/// for the orthogonal variant; the full-ball variant replaces the second term
/// by the full-ball average. Off-lattice values are multilinear
/// interpolations.
double avg_operator(const GridField& u, const Vec& x, const UnitVector& nu, const CoefficientPair& ab,
                    Variant variant, const QuadratureRule& quad);
double avg_operator(const GridField& u, const Vec& x, const UnitVector& nu, const ExponentField& field,
                    Variant variant, const QuadratureRule& quad);

/// One DPP sweep, compiled: every interior node stores the linear stencils
/// of its candidate values so a sweep is a sequence of sparse dot products.
class DppScheme {
 public:
  DppScheme(const GridField& layout, const ExponentField& field, DppSetup setup);

  /// Jacobi sweep: interior nodes of `out` from `in`, strip copied.
  void apply(const std::vector<double>& in, std::vector<double>& out) const;
  GridField apply(const GridField& u) const;

  Variant variant() const { return setup_.variant; }
  const DppSetup& setup() const { return setup_; }
  const DirectionSet& directions() const { return dirs_; }
  const QuadratureRule& quadrature() const { return quad_; }
  const QuadratureRule& ball_rule() const { return ball_; }
  const std::vector<std::size_t>& interior() const { return interior_; }
  double alpha_at(std::size_t pos) const { return alpha_[pos]; }
  std::size_t stencil_entries() const { return idx_.size(); }

  /// Candidate values at interior position `pos` (index into interior()).
  /// Orthogonal: A_eps u(x, nu_k) for every direction. Full ball: the sup/inf
  /// candidates u(y), y in B_eps(x).
  std::vector<double> candidates(const std::vector<double>& u, std::size_t pos) const;

  nlohmann::json to_json() const;

 private:
  double dot(std::size_t stencil, const std::vector<double>& u) const {
    double acc = 0.0;
    for (std::size_t k = offs_[stencil]; k < offs_[stencil + 1]; ++k) acc += w_[k] * u[static_cast<std::size_t>(idx_[k])];
    return acc;
  }
  std::size_t push_stencil(std::vector<std::pair<std::int32_t, double>>& entries);

  DppSetup setup_;
  DirectionSet dirs_;
  QuadratureRule quad_;
  QuadratureRule ball_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> strip_;
  std::vector<double> alpha_;
  // Per interior node: [cand_begin, cand_end) stencil ids, plus (full ball) an average stencil.
  std::vector<std::size_t> cand_begin_;
  std::vector<std::size_t> cand_end_;
  std::vector<std::size_t> avg_stencil_;
  std::vector<std::size_t> offs_{0};
  std::vector<std::int32_t> idx_;
  std::vector<double> w_;
};

GridField dpp_apply(const GridField& u, const DppScheme& scheme);

struct SolveOptions {
  double tol = 0.0;  // <= 0: 1e-9 * sup|g|
  long max_iter = 200000;
  /// Optional start for interior nodes (same layout); otherwise the strip
  /// midrange constant.
  std::optional<std::vector<double>> initial;
};

struct SolveResult {
  GridField field;
  long iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // sup-norm change per sweep
  double tol = 0.0;
  /// Last ratio of successive changes and the implied a-posteriori bound
  /// change * rho / (1 - rho) on the distance to the fixed point.
  double contraction = 0.0;
  double error_bound = 0.0;
};

/// Value iteration u_{k+1} = apply(u_k) with g imposed on the strip. Every
/// iterate is checked against the maximum principle.
SolveResult solve_fixed_point(const BoundaryDatum& g, const GridField& layout, const DppScheme& scheme,
                              const SolveOptions& options = {});

}  // namespace towlab
