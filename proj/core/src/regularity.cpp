#include "towlab/regularity.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "towlab/geometry.hpp"

namespace towlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

void require_ball_inside(const GridField& u, const Vec& center, double radius) {
  const Lattice& lat = u.lattice();
  if (center.size() != lat.dim()) throw DimensionMismatch("regularity: center dimension");
  for (int k = 0; k < lat.dim(); ++k) {
    const double lo = lat.origin()[k];
    const double hi = lo + lat.h() * (lat.counts()[static_cast<std::size_t>(k)] - 1);
    if (center[k] - radius < lo - 1e-12 || center[k] + radius > hi + 1e-12) {
      throw StripError("regularity: B_2r(center) leaves the lattice");
    }
  }
}

std::vector<std::size_t> nodes_in_ball(const GridField& u, const Vec& center, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if ((u.point(i) - center).norm() <= r * (1.0 + 1e-12)) out.push_back(i);
  }
  return out;
}

}  // namespace

nlohmann::json ModulusReport::to_json() const {
  return {{"epsilon", epsilon},
          {"pairs", pairs},
          {"L", L},
          {"arg_x", vec_json(arg_x)},
          {"arg_z", vec_json(arg_z)},
          {"holder_delta", holder_delta},
          {"holder_C", holder_C},
          {"raw_exponent", raw_exponent},
          {"sup_u", sup_u}};
}

ModulusReport lipschitz_modulus(const GridField& u, const Vec& center, double r, const ModulusOptions& options) {
  if (!(r > 0.0)) throw DomainError("lipschitz_modulus: r must be positive");
  if (options.random_pairs < 1000) throw DomainError("lipschitz_modulus: need at least 1000 random pairs");
  require_ball_inside(u, center, 2.0 * r);
  const double eps = u.domain().epsilon();
  const Lattice& lat = u.lattice();
  const int n = lat.dim();

  ModulusReport rep;
  rep.epsilon = eps;
  rep.arg_x = center;
  rep.arg_z = center;
  std::vector<double> dist, diff;

  auto consider = [&](const Vec& x, const Vec& z, double ux, double uz) {
    const double d = (x - z).norm();
    const double du = std::abs(ux - uz);
    ++rep.pairs;
    dist.push_back(d);
    diff.push_back(du);
    const double q = du / (d + eps);
    if (q > rep.L) {
      rep.L = q;
      rep.arg_x = x;
      rep.arg_z = z;
    }
  };

  for (std::size_t i : nodes_in_ball(u, center, 2.0 * r)) rep.sup_u = std::max(rep.sup_u, std::abs(u[i]));

  // nearest-neighbour lattice pairs
  const std::vector<std::size_t> nodes = nodes_in_ball(u, center, r);
  for (std::size_t i : nodes) {
    const Vec x = u.point(i);
    const std::vector<int> mi = lat.multi_index(i);
    for (int k = 0; k < n; ++k) {
      std::vector<int> nj(mi);
      if (++nj[static_cast<std::size_t>(k)] >= lat.counts()[static_cast<std::size_t>(k)]) continue;
      const std::size_t j = lat.flat(nj);
      const Vec z = u.point(j);
      if ((z - center).norm() > r * (1.0 + 1e-12)) continue;
      consider(x, z, u[i], u[j]);
    }
  }

  // random pairs: half uniform in B_r x B_r, half at separations up to 2 eps
  Rng rng(mix_seed(options.seed));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const long half = options.random_pairs / 2;
  for (long k = 0; k < options.random_pairs; ++k) {
    const Vec x = center + r * sample_unit_ball(n, rng);
    Vec z;
    if (k < half) {
      z = center + r * sample_unit_ball(n, rng);
    } else {
      do {
        z = x + 2.0 * eps * unif(rng) * sample_unit_sphere(n, rng);
      } while ((z - center).norm() > r);
    }
    consider(x, z, u.interpolate(x), u.interpolate(z));
  }

  std::vector<double> fd, fu;
  for (std::size_t k = 0; k < dist.size(); ++k) {
    if (dist[k] >= eps) {
      fd.push_back(dist[k]);
      fu.push_back(diff[k]);
    }
  }
  const PowerFit fit = fit_power_law(fd, fu);
  rep.raw_exponent = fit.exponent;
  rep.holder_delta = fit.used >= 2 ? std::clamp(fit.exponent, 0.05, 1.0) : 1.0;
  const double ed = std::pow(eps, rep.holder_delta);
  for (std::size_t k = 0; k < dist.size(); ++k) {
    rep.holder_C = std::max(rep.holder_C, diff[k] / (std::pow(dist[k], rep.holder_delta) + ed));
  }
  if (options.keep_scatter) {
    rep.scatter.reserve(dist.size());
    for (std::size_t k = 0; k < dist.size(); ++k) rep.scatter.push_back({dist[k], diff[k]});
  }
  return rep;
}

nlohmann::json GapReport::to_json() const {
  return {{"log10_K", finite_or_null(log10_K)},
          {"log10_threshold", log10_threshold},
          {"pass", pass},
          {"f1_gap", f1_gap},
          {"arg_x", vec_json(arg_x)},
          {"arg_z", vec_json(arg_z)},
          {"pairs", pairs},
          {"sampled", sampled}};
}

GapReport gap_K(const GridField& u, const ComparisonFunction& cf, const Vec& center, double r, long max_nodes,
                long sampled_pairs, std::uint64_t seed) {
  const std::vector<std::size_t> nodes = nodes_in_ball(u, center, r);
  if (nodes.empty()) throw DomainError("gap_K: no lattice node in B_r");
  const ComparisonParams& p = cf.params();
  const double log_sup = cf.log_sup_f2();

  GapReport rep;
  rep.log10_threshold = log_sup / std::log(10.0);
  rep.log10_K = kNegInf;
  rep.f1_gap = -std::numeric_limits<double>::infinity();
  rep.pass = true;
  double log_K = kNegInf;
  rep.arg_x = u.point(nodes[0]);
  rep.arg_z = rep.arg_x;

  std::vector<Vec> pts;
  pts.reserve(nodes.size());
  for (std::size_t i : nodes) pts.push_back(u.point(i));

  auto consider = [&](std::size_t a, std::size_t b) {
    const Vec& x = pts[a];
    const Vec& z = pts[b];
    const double du = u[nodes[a]] - u[nodes[b]];
    const double gap = du - cf.f1(x, z);
    ++rep.pairs;
    rep.f1_gap = std::max(rep.f1_gap, gap);
    const long idx = annulus_index(p, cf.epsilon(), (x - z).norm());
    const double log_f2 = cf.log_f2_index(idx);
    // K_pair = gap + f2
    double lk;
    if (gap >= 0.0) {
      lk = log_add(gap > 0.0 ? std::log(gap) : kNegInf, log_f2);
    } else if (log_f2 > std::log(-gap)) {
      lk = log_sub(log_f2, std::log(-gap));
    } else {
      lk = kNegInf;
    }
    if (lk > log_K) {
      log_K = lk;
      rep.arg_x = x;
      rep.arg_z = z;
    }
    // K_pair <= sup f2  <=>  gap <= sup f2 - f2
    if (gap > 0.0) {
      const double room = idx == 0 ? kNegInf : log_sub(log_sup, log_f2);
      if (!(std::log(gap) <= room)) rep.pass = false;
    }
  };

  const std::size_t m = pts.size();
  if (static_cast<long>(m) <= max_nodes) {
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) consider(a, b);
    }
  } else {
    rep.sampled = true;
    Rng rng(mix_seed(seed));
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    for (std::size_t a = 0; a < m; ++a) consider(a, a);
    for (long k = 0; k < sampled_pairs; ++k) consider(pick(rng), pick(rng));
  }
  rep.log10_K = log_K / std::log(10.0);
  return rep;
}

RecipeInputs recipe_inputs(const ExponentField& field, Variant variant, int n, double r, const ModulusReport& fit) {
  RecipeInputs in{};
  const double sf = field.s();
  in.delta = fit.holder_delta;
  in.s = std::min({sf, in.delta / 2.0, 0.5});
  in.c_alpha = alpha_holder_constant(field, variant, n) * std::max(1.0, std::pow(4.0 * r, sf - in.s));
  in.alpha_min = alpha_min(field, variant, n);
  in.r = r;
  in.sup_u = fit.sup_u;
  in.C_u = fit.holder_C;
  return in;
}

nlohmann::json SweepRow::to_json() const {
  nlohmann::json j = {{"epsilon", epsilon},     {"h", h},
                      {"iterations", iterations}, {"converged", converged},
                      {"error_bound", error_bound}, {"seconds", seconds},
                      {"modulus", modulus.to_json()}};
  if (gap) j["gap"] = gap->to_json();
  return j;
}

nlohmann::json SweepResult::to_json() const {
  nlohmann::json rows_j = nlohmann::json::array();
  for (const auto& row : rows) rows_j.push_back(row.to_json());
  nlohmann::json j = {{"rows", rows_j}, {"ratios", ratios}};
  if (params) j["params"] = params->to_json();
  return j;
}

SweepResult scale_sweep(const SweepProblem& problem, const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw DomainError("scale_sweep: empty eps list");
  for (std::size_t k = 1; k < eps_list.size(); ++k) {
    if (!(eps_list[k] < eps_list[k - 1])) throw DomainError("scale_sweep: eps list must be decreasing");
  }
  const int n = problem.domain.dim();
  const Vec center = problem.center.size() > 0 ? problem.center : problem.domain.center();
  SweepResult out;
  std::optional<GridField> previous;
  for (double eps : eps_list) {
    const auto t0 = std::chrono::steady_clock::now();
    const Domain dom = problem.domain.with_epsilon(eps);
    const double h = eps / 2.0;
    const GridField layout = GridField::make(dom, h);
    const DppScheme scheme(layout, problem.field, problem.setup);
    SolveOptions so;
    so.tol = problem.tol;
    so.max_iter = problem.max_iter;
    if (problem.warm_start && previous) {
      std::vector<double> init(layout.size(), 0.0);
      for (std::size_t i = 0; i < layout.size(); ++i) {
        const Vec y = layout.point(i);
        if (previous->lattice().in_hull(y, 1e-9)) init[i] = previous->interpolate(y);
      }
      so.initial = std::move(init);
    }
    SolveResult res = solve_fixed_point(problem.g, layout, scheme, so);
    SweepRow row;
    row.epsilon = eps;
    row.h = h;
    row.iterations = res.iterations;
    row.converged = res.converged;
    row.error_bound = res.error_bound;
    row.modulus = lipschitz_modulus(res.field, center, problem.r, problem.modulus);
    if (problem.gap) {
      if (!out.params) {
        out.params = constants_recipe(recipe_inputs(problem.field, problem.setup.variant, n, problem.r, row.modulus));
      }
      row.gap = gap_K(res.field, ComparisonFunction(*out.params, eps), center, problem.r);
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.rows.empty()) {
      const double prev = out.rows.back().modulus.L;
      out.ratios.push_back(prev > 0.0 ? row.modulus.L / prev : (row.modulus.L > 0.0 ? INFINITY : 1.0));
    }
    out.rows.push_back(std::move(row));
    previous = std::move(res.field);
  }
  return out;
}

}  // namespace towlab
