#include "towlab/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace towlab {

double midrange(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("midrange: empty list");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return 0.5 * (*hi + *lo);
}

DppSetup resolve_defaults(DppSetup s, int n) {
  if (s.directions <= 0) s.directions = n == 2 ? 64 : (n == 3 ? 256 : 512);
  if (s.quad_nodes <= 0) s.quad_nodes = n == 2 ? 16 : 64;
  if (s.ball_nodes <= 0) s.ball_nodes = n == 2 ? 64 : (n == 3 ? 104 : 256);
  if (s.sphere_samples <= 0) s.sphere_samples = s.directions;
  return s;
}

double avg_operator(const GridField& u, const Vec& x, const UnitVector& nu, const CoefficientPair& ab,
                    Variant variant, const QuadratureRule& quad) {
  require_same_dim(x, nu.coords(), "avg_operator");
  const double eps = u.domain().epsilon();
  double acc = ab.alpha * u.interpolate(x + eps * nu.coords());
  if (ab.beta == 0.0) return acc;
  double avg = 0.0;
  if (variant == Variant::orthogonal) {
    const OrthogonalFrame frame = frame_for(nu, 1);
    for (int i = 0; i < quad.size(); ++i) {
      avg += quad.weights[i] * u.interpolate(x + eps * frame.apply(quad.nodes.col(i)));
    }
  } else {
    for (int i = 0; i < quad.size(); ++i) avg += quad.weights[i] * u.interpolate(x + eps * quad.nodes.col(i));
  }
  return acc + ab.beta * avg;
}

double avg_operator(const GridField& u, const Vec& x, const UnitVector& nu, const ExponentField& field,
                    Variant variant, const QuadratureRule& quad) {
  return avg_operator(u, x, nu, coeffs_closed(variant, field, x), variant, quad);
}

std::size_t DppScheme::push_stencil(std::vector<std::pair<std::int32_t, double>>& entries) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t k = 0;
  while (k < entries.size()) {
    const std::int32_t id = entries[k].first;
    double weight = 0.0;
    while (k < entries.size() && entries[k].first == id) weight += entries[k++].second;
    idx_.push_back(id);
    w_.push_back(weight);
  }
  offs_.push_back(idx_.size());
  entries.clear();
  return offs_.size() - 2;
}

DppScheme::DppScheme(const GridField& layout, const ExponentField& field, DppSetup setup)
    : setup_(resolve_defaults(setup, layout.lattice().dim())),
      interior_(layout.interior()),
      strip_(layout.strip()) {
  const Lattice& lat = layout.lattice();
  const int n = lat.dim();
  if (n < 2) throw DomainError("DppScheme: dimension must be at least 2");
  const double eps = layout.domain().epsilon();
  const Variant variant = setup_.variant;

  dirs_ = direction_set(n, setup_.directions);
  std::vector<OrthogonalFrame> frames;
  if (variant == Variant::orthogonal) {
    quad_ = ball_quadrature(n, setup_.quad_nodes);
    frames.reserve(static_cast<std::size_t>(dirs_.size()));
    for (int k = 0; k < dirs_.size(); ++k) {
      frames.push_back(frame_for(UnitVector::normalized(dirs_.dirs.col(k)), 1));
    }
  } else {
    ball_ = full_ball_quadrature(n, setup_.ball_nodes);
  }

  // Lattice offsets inside the closed eps-ball (full-ball sup/inf candidates).
  std::vector<std::vector<int>> offsets;
  DirectionSet sphere;
  if (variant == Variant::fullball) {
    const int reach = static_cast<int>(std::floor(eps / lat.h() + 1e-9));
    std::vector<int> o(static_cast<std::size_t>(n), -reach);
    while (true) {
      double r2 = 0.0;
      for (int v : o) r2 += static_cast<double>(v) * v;
      if (std::sqrt(r2) * lat.h() <= eps * (1.0 + 1e-12)) offsets.push_back(o);
      int k = 0;
      while (k < n && ++o[static_cast<std::size_t>(k)] > reach) o[static_cast<std::size_t>(k++)] = -reach;
      if (k == n) break;
    }
    sphere = direction_set(n, setup_.sphere_samples % 2 == 0 ? setup_.sphere_samples : setup_.sphere_samples + 1);
  }

  std::vector<std::pair<std::int32_t, double>> entries;
  std::vector<std::int32_t> sidx;
  std::vector<double> sw;
  auto add_point = [&](const Vec& y, double weight) {
    lat.stencil(y, sidx, sw);
    for (std::size_t k = 0; k < sidx.size(); ++k) entries.emplace_back(sidx[k], weight * sw[k]);
  };

  alpha_.reserve(interior_.size());
  cand_begin_.reserve(interior_.size());
  cand_end_.reserve(interior_.size());
  for (std::size_t node : interior_) {
    const Vec x = lat.point(node);
    const CoefficientPair ab = coeffs_closed(variant, field, x);
    alpha_.push_back(ab.alpha);
    if (variant == Variant::orthogonal) {
      cand_begin_.push_back(offs_.size() - 1);
      for (int k = 0; k < dirs_.size(); ++k) {
        if (ab.alpha > 0.0) add_point(x + eps * dirs_.dirs.col(k), ab.alpha);
        if (ab.beta > 0.0) {
          const Mat& p = frames[static_cast<std::size_t>(k)].matrix();
          for (int i = 0; i < quad_.size(); ++i) {
            add_point(x + eps * (p * quad_.nodes.col(i)), ab.beta * quad_.weights[static_cast<std::size_t>(i)]);
          }
        }
        push_stencil(entries);
      }
      cand_end_.push_back(offs_.size() - 1);
    } else {
      for (int i = 0; i < ball_.size(); ++i) {
        add_point(x + eps * ball_.nodes.col(i), ab.beta * ball_.weights[static_cast<std::size_t>(i)]);
      }
      avg_stencil_.push_back(push_stencil(entries));
      cand_begin_.push_back(offs_.size() - 1);
      if (ab.alpha > 0.0) {
        const std::vector<int> base = lat.multi_index(node);
        for (const auto& o : offsets) {
          std::vector<int> idx(base);
          bool inside = true;
          for (int k = 0; k < n; ++k) {
            idx[static_cast<std::size_t>(k)] += o[static_cast<std::size_t>(k)];
            if (idx[static_cast<std::size_t>(k)] < 0 || idx[static_cast<std::size_t>(k)] >= lat.counts()[static_cast<std::size_t>(k)]) inside = false;
          }
          if (!inside) throw StripError("DppScheme: eps-ball leaves the lattice (strip too thin)");
          entries.emplace_back(static_cast<std::int32_t>(lat.flat(idx)), 1.0);
          push_stencil(entries);
        }
        for (int k = 0; k < sphere.size(); ++k) {
          add_point(x + eps * sphere.dirs.col(k), 1.0);
          push_stencil(entries);
        }
      }
      cand_end_.push_back(offs_.size() - 1);
    }
  }
}

void DppScheme::apply(const std::vector<double>& in, std::vector<double>& out) const {
  out.resize(in.size());
  for (std::size_t i : strip_) out[i] = in[i];
  const bool orthogonal = setup_.variant == Variant::orthogonal;
  for (std::size_t pos = 0; pos < interior_.size(); ++pos) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t c = cand_begin_[pos]; c < cand_end_[pos]; ++c) {
      const double v = dot(c, in);
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    double value;
    if (orthogonal) {
      value = 0.5 * (hi + lo);
    } else {
      value = dot(avg_stencil_[pos], in);
      if (alpha_[pos] > 0.0) value += alpha_[pos] * 0.5 * (hi + lo);
    }
    out[interior_[pos]] = value;
  }
}

GridField DppScheme::apply(const GridField& u) const {
  GridField out(u);
  apply(u.values(), out.values());
  return out;
}

std::vector<double> DppScheme::candidates(const std::vector<double>& u, std::size_t pos) const {
  std::vector<double> out;
  for (std::size_t c = cand_begin_.at(pos); c < cand_end_.at(pos); ++c) out.push_back(dot(c, u));
  return out;
}

nlohmann::json DppScheme::to_json() const {
  return {{"variant", to_string(setup_.variant)},
          {"directions", setup_.directions},
          {"direction_covering_angle", dirs_.covering_angle},
          {"quad_nodes", setup_.variant == Variant::orthogonal ? quad_.size() : 0},
          {"ball_nodes", setup_.variant == Variant::fullball ? ball_.size() : 0},
          {"sphere_samples", setup_.variant == Variant::fullball ? setup_.sphere_samples : 0},
          {"stencil_entries", idx_.size()}};
}

GridField dpp_apply(const GridField& u, const DppScheme& scheme) { return scheme.apply(u); }

SolveResult solve_fixed_point(const BoundaryDatum& g, const GridField& layout, const DppScheme& scheme,
                              const SolveOptions& options) {
  if (options.max_iter < 1) throw DomainError("solve_fixed_point: max_iter must be positive");
  GridField u(layout);
  u.impose(g);
  const double lo = u.strip_min();
  const double hi = u.strip_max();
  double sup_g = 0.0;
  for (std::size_t i : u.strip()) sup_g = std::max(sup_g, std::abs(u[i]));
  const double tol = options.tol > 0.0 ? options.tol : 1e-9 * sup_g;

  if (options.initial) {
    if (options.initial->size() != u.size()) throw DimensionMismatch("solve_fixed_point: initial guess size");
    for (std::size_t i : u.interior()) u[i] = std::clamp((*options.initial)[i], lo, hi);
  } else {
    const double start = 0.5 * (lo + hi);
    for (std::size_t i : u.interior()) u[i] = start;
  }

  const double slack = 1e-10 * std::max(1.0, sup_g);
  SolveResult result{u, 0, false, {}, tol, 0.0, 0.0};
  std::vector<double> cur = u.values();
  std::vector<double> next(cur.size());
  double prev_change = -1.0;
  for (long it = 1; it <= options.max_iter; ++it) {
    scheme.apply(cur, next);
    double change = 0.0;
    for (std::size_t i : u.interior()) {
      const double v = next[i];
      if (!(v >= lo - slack && v <= hi + slack)) {
        throw ConsistencyError("solve_fixed_point: maximum principle violated at iteration " + std::to_string(it));
      }
      change = std::max(change, std::abs(v - cur[i]));
    }
    cur.swap(next);
    result.residual_history.push_back(change);
    result.iterations = it;
    if (prev_change > 0.0) result.contraction = std::min(change / prev_change, 1.0);
    prev_change = change;
    if (change <= tol) {
      result.converged = true;
      break;
    }
  }
  const double last = result.residual_history.empty() ? 0.0 : result.residual_history.back();
  const double rho = result.contraction;
  result.error_bound = last == 0.0 ? 0.0
                       : rho < 1.0 ? last * rho / (1.0 - rho)
                                   : std::numeric_limits<double>::infinity();
  result.field.values() = std::move(cur);
  return result;
}

}  // namespace towlab
