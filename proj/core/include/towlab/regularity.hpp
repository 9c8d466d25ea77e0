#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "towlab/coefficients.hpp"
#include "towlab/comparison.hpp"
#include "towlab/dpp.hpp"
#include "towlab/grid.hpp"

namespace towlab {

struct PairSample {
  double dist;
  double diff;  // |u(x) - u(z)|
};

/// Empirical moduli of a solved field on B_r(center).
struct ModulusReport {
  double epsilon = 0.0;
  long pairs = 0;
  double L = 0.0;  // sup |u(x) - u(z)| / (|x - z| + eps)
  Vec arg_x, arg_z;
  double holder_delta = 1.0;  // fitted exponent, clamped to [0.05, 1]
  double holder_C = 0.0;      // max |u(x) - u(z)| / (|x - z|^delta + eps^delta)
  double raw_exponent = 0.0;  // unclamped least-squares slope
  double sup_u = 0.0;         // sup |u| over lattice nodes of B_{2r}
  std::vector<PairSample> scatter;  // kept only when requested
  nlohmann::json to_json() const;
};

struct ModulusOptions {
  long random_pairs = 20000;  // at least 1000
  std::uint64_t seed = 1;
  bool keep_scatter = false;
};

/// Maximizes the quotient over all nearest-neighbour lattice pairs inside
/// B_r(center) and over random pairs (interpolated) in B_r(center). Throws
/// StripError when B_{2r}(center) leaves the lattice.
ModulusReport lipschitz_modulus(const GridField& u, const Vec& center, double r, const ModulusOptions& options = {});

/// Counter-assumption gap K = sup_{x, z in B_r} u(x) - u(z) - f(x, z), over
/// lattice nodes of B_r (all pairs up to `max_nodes` nodes, else random
/// pairs). Evaluated in the log domain since sup f2 = C^{2N} eps overflows.
struct GapReport {
  double log10_K = 0.0;          // log10 of K (-inf when K <= 0)
  double log10_threshold = 0.0;  // log10(C^{2N} eps)
  bool pass = false;             // K <= C^{2N} eps
  double f1_gap = 0.0;           // sup u(x) - u(z) - f1(x, z), no f2
  Vec arg_x, arg_z;              // witness of K
  long pairs = 0;
  bool sampled = false;
  nlohmann::json to_json() const;
};

GapReport gap_K(const GridField& u, const ComparisonFunction& cf, const Vec& center, double r,
                long max_nodes = 2500, long sampled_pairs = 2000000, std::uint64_t seed = 1);

/// Recipe inputs for a solved problem: s = min(field s, delta / 2), c_alpha
/// rescaled to that exponent on B_{2r}, alpha_min of the field, sup_u and
/// (C_u, delta) from a modulus report.
RecipeInputs recipe_inputs(const ExponentField& field, Variant variant, int n, double r, const ModulusReport& fit);

struct SweepProblem {
  Domain domain;  // epsilon replaced per row
  ExponentField field;
  BoundaryDatum g;
  DppSetup setup;
  double tol = 0.0;  // <= 0: solver default
  long max_iter = 200000;
  Vec center;
  double r = 0.25;
  ModulusOptions modulus;
  bool warm_start = true;
  bool gap = true;
};

struct SweepRow {
  double epsilon = 0.0;
  double h = 0.0;
  long iterations = 0;
  bool converged = false;
  double error_bound = 0.0;
  double seconds = 0.0;
  ModulusReport modulus;
  std::optional<GapReport> gap;
  nlohmann::json to_json() const;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<double> ratios;  // L(eps_{k+1}) / L(eps_k)
  std::optional<ComparisonParams> params;  // recipe constants used for the gap
  nlohmann::json to_json() const;
};

/// Solves on h = eps / 2 for every eps (decreasing), measures each field and
/// forms the ratio table. Finer solves start from the interpolated coarser
/// solution when warm_start is set.
SweepResult scale_sweep(const SweepProblem& problem, const std::vector<double>& eps_list);

}  // namespace towlab
