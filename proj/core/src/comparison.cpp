#include "towlab/comparison.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

namespace towlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (b > a) throw DomainError("log_sub: negative difference");
  if (a == b) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

void ComparisonParams::finalize() {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("ComparisonParams: s must lie in (0, 1)");
  if (!(omega0 > 0.0)) throw DomainError("ComparisonParams: omega0 must be positive");
  gamma = 1.0 + s;
  omega1 = std::pow(1.0 / (2.0 * gamma * omega0), 1.0 / s);
}

nlohmann::json ComparisonParams::to_json() const {
  return {{"s", s},
          {"gamma", gamma},
          {"omega0", omega0},
          {"omega1", omega1},
          {"C", C},
          {"M", M},
          {"N", N},
          {"r", r},
          {"c_alpha", c_alpha},
          {"alpha_min", alpha_min},
          {"sup_u", sup_u},
          {"C_u", C_u},
          {"delta", delta},
          {"omega_offset", omega_offset},
          {"log10_C_pow_2N", 2.0 * static_cast<double>(N) * std::log10(C)},
          {"binding", {{"omega0", binding_omega0}, {"C", binding_C}, {"N", binding_N}}}};
}

ComparisonParams constants_recipe(const RecipeInputs& in) {
  if (!(in.s > 0.0 && in.s < 1.0)) throw DomainError("constants_recipe: s must lie in (0, 1)");
  if (!(in.alpha_min > 0.0 && in.alpha_min <= 1.0)) throw DomainError("constants_recipe: alpha_min must lie in (0, 1]");
  if (!(in.r > 0.0)) throw DomainError("constants_recipe: r must be positive");
  if (!(in.c_alpha >= 0.0) || !(in.sup_u >= 0.0) || !(in.C_u >= 0.0)) {
    throw DomainError("constants_recipe: c_alpha, sup_u and C_u must be nonnegative");
  }
  if (!(in.delta > 0.0 && in.delta <= 1.0)) throw DomainError("constants_recipe: delta must lie in (0, 1]");

  ComparisonParams p;
  p.s = in.s;
  p.r = in.r;
  p.c_alpha = in.c_alpha;
  p.alpha_min = in.alpha_min;
  p.sup_u = in.sup_u;
  p.C_u = in.C_u;
  p.delta = in.delta;
  p.M = 2.0 / (3.0 * in.r * in.r) * in.sup_u;

  auto pick = [](const std::vector<std::pair<std::string, double>>& bounds, std::string& name) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [label, value] : bounds) {
      if (value > best) {
        best = value;
        name = label;
      }
    }
    return best;
  };

  const double s = in.s;
  const double a = in.alpha_min;
  const double c = in.c_alpha;
  p.omega0 = 1.01 * pick({{"omega0_half", 0.5},
                          {"omega0_radius", 1.0 / (2.0 * std::pow(in.r, s))},
                          {"omega0_holder", (c + 2.0) / (3.0 * a * s * (1.0 + s))}},
                         p.binding_omega0);
  const double M = p.M;
  p.C = 1.01 * pick({{"C_range", std::pow(16.0 * p.omega0, 1.0 / s) * in.sup_u},
                     {"C_reversal", 2.0 * (4.0 * M + 1.0)},
                     {"C_straight_pull", 8.0 * ((4.0 * M + 1.0) / (3.0 * c + 1.0) + 12.0 * std::sqrt(M * in.C_u) / a)},
                     {"C_rough", 8.0 * M * in.r + 1.0},
                     {"C_annular", (7.0 + std::sqrt(49.0 + 8.0 * a)) / (2.0 * a)}},
                    p.binding_C);
  const double n1 = std::pow(2.0, 5.5) * 10.0 * p.C * p.omega0;
  const double n2 = 40.0 * (3.0 * c + 1.0) / a;
  if (!(std::max(n1, n2) < 0x1p53)) {
    throw DomainError("constants_recipe: N would exceed 2^53; inputs outside the representable range");
  }
  const long k1 = static_cast<long>(std::floor(n1)) + 1;
  const long k2 = static_cast<long>(std::floor(n2)) + 1;
  p.N = 40;
  p.binding_N = "N_floor";
  if (k1 > p.N) {
    p.N = k1;
    p.binding_N = "N_remainder";
  }
  if (k2 > p.N) {
    p.N = k2;
    p.binding_N = "N_pull";
  }
  p.finalize();
  const double reach = p.C * omega_eval(p, p.r).value;
  if (!(reach > 2.0 * in.sup_u)) {
    p.omega_offset = 1.01 * (2.0 * in.sup_u / p.C - omega_eval(p, p.r).value) + 1e-12;
  }
  return p;
}

std::vector<Predicate> admissibility(const ComparisonParams& p) {
  const double s = p.s;
  const double a = p.alpha_min;
  const double c = p.c_alpha;
  const double M = p.M;
  const double C = p.C;
  const double N = static_cast<double>(p.N);
  auto gt = [](std::string name, double lhs, double rhs) { return Predicate{std::move(name), lhs, rhs, lhs > rhs}; };
  auto ge = [](std::string name, double lhs, double rhs) { return Predicate{std::move(name), lhs, rhs, lhs >= rhs}; };
  const double m_ref = 2.0 / (3.0 * p.r * p.r) * p.sup_u;
  const double omega_r = p.omega1 > 0.0 ? omega_eval(p, p.r).value : 0.0;
  return {
      ge("omega0_half", p.omega0, 0.5),
      gt("omega0_radius", p.omega0, 1.0 / (2.0 * std::pow(p.r, s))),
      ge("omega0_holder", p.omega0, (c + 2.0) / (3.0 * a * s * (1.0 + s))),
      gt("C_range", C, std::pow(16.0 * p.omega0, 1.0 / s) * p.sup_u),
      gt("C_reversal", C, 2.0 * (4.0 * M + 1.0)),
      gt("C_straight_pull", C, 8.0 * ((4.0 * M + 1.0) / (3.0 * c + 1.0) + 12.0 * std::sqrt(M * p.C_u) / a)),
      gt("C_rough", C, 8.0 * M * p.r + 1.0),
      gt("C_annular", a * C * C - 2.0, 7.0 * C),
      ge("N_floor", N, 40.0),
      gt("N_remainder", N, std::pow(2.0, 5.5) * 10.0 * C * p.omega0),
      gt("N_pull", N, 40.0 * (3.0 * c + 1.0) / a),
      Predicate{"M_boundary", M, m_ref, std::abs(M - m_ref) <= 1e-12 * std::max(1.0, m_ref)},
      gt("omega_reach", C * omega_r, 2.0 * p.sup_u),
  };
}

bool admissible(const ComparisonParams& p) {
  for (const auto& q : admissibility(p)) {
    if (!q.ok) return false;
  }
  return true;
}

double omega_knee(const ComparisonParams& p) { return std::pow(1.5, 1.0 / p.s) * p.omega1; }

OmegaValue omega_eval(const ComparisonParams& p, double t) {
  if (!(t >= 0.0)) throw DomainError("omega_eval: negative argument");
  const double w0 = p.omega0;
  const double g = p.gamma;
  const double knee = omega_knee(p);
  if (t <= knee) {
    if (t == 0.0) return {0.0, 1.0, p.s < 1.0 ? kNegInf : -g * p.s * w0};
    const double ts = std::pow(t, p.s);
    return {t - w0 * ts * t, 1.0 - g * w0 * ts, -g * p.s * w0 * ts / t};
  }
  // omega'(knee) = 1/4 since gamma omega0 knee^s = 3/4
  const double top = knee * (1.0 - 0.75 / g);
  return {top + 0.25 * (t - knee) + p.omega_offset, 0.25, 0.0};
}

double omega_increment(const ComparisonParams& p, double t, double dt) {
  if (!(t >= 0.0) || !(t + dt >= -1e-12 * std::max(t, std::abs(dt)))) {
    throw DomainError("omega_increment: negative argument");
  }
  dt = std::max(dt, -t);  // round-off below the diagonal
  const double t2 = t + dt;
  const double knee = omega_knee(p);
  if (t > 0.0 && t <= knee && t2 <= knee) {
    return dt - p.omega0 * std::pow(t, p.gamma) * std::expm1(p.gamma * std::log1p(dt / t));
  }
  return omega_eval(p, std::max(t2, 0.0)).value - omega_eval(p, t).value;
}

long annulus_index(const ComparisonParams& p, double eps, double d) {
  if (!(d >= 0.0)) throw DomainError("annulus_index: negative distance");
  if (d == 0.0) return 0;
  const double q = 10.0 * d / eps;
  if (q > static_cast<double>(p.N)) return p.N + 1;
  long i = static_cast<long>(std::ceil(q));
  // ceil can land one off when 10 d / eps rounds across an integer
  if (static_cast<double>(i - 1) * eps / 10.0 >= d) --i;
  if (static_cast<double>(i) * eps / 10.0 < d) ++i;
  return std::clamp(i, 1L, p.N);
}

ComparisonFunction::ComparisonFunction(ComparisonParams params, double eps) : p_(std::move(params)), eps_(eps) {
  if (!(eps > 0.0)) throw DomainError("ComparisonFunction: eps must be positive");
  if (!(p_.C > 1.0)) throw DomainError("ComparisonFunction: C must exceed 1");
  if (p_.N < 1) throw DomainError("ComparisonFunction: N must be positive");
  p_.finalize();
}

double ComparisonFunction::f1(const Vec& x, const Vec& z) const {
  require_same_dim(x, z, "f1");
  return p_.C * omega_eval(p_, (x - z).norm()).value + p_.M * (x + z).squaredNorm();
}

double ComparisonFunction::log_f2_index(long i) const {
  if (i < 0) throw DomainError("log_f2_index: negative annulus");
  if (i > p_.N) return kNegInf;
  return 2.0 * static_cast<double>(p_.N - i) * std::log(p_.C) + std::log(eps_);
}

FValue ComparisonFunction::eval(const Vec& x, const Vec& z) const {
  FValue v{};
  v.f1 = f1(x, z);
  v.annulus = annulus_index(p_, eps_, (x - z).norm());
  v.log_f2 = log_f2_index(v.annulus);
  v.f2 = std::exp(v.log_f2);
  v.f = v.f1 - v.f2;
  return v;
}

double ComparisonFunction::f1_increment(const Vec& x, const Vec& z, const Vec& hx, const Vec& hz) const {
  const Vec a = x - z;
  const Vec dd = hx - hz;
  const Vec b = x + z;
  const Vec ds = hx + hz;
  const double t = a.norm();
  double dt;
  if (t == 0.0) {
    dt = dd.norm();
  } else {
    const double den = (a + dd).norm() + t;
    dt = den == 0.0 ? 0.0 : (2.0 * a.dot(dd) + dd.squaredNorm()) / den;
  }
  return p_.C * omega_increment(p_, t, dt) + p_.M * (2.0 * b.dot(ds) + ds.squaredNorm());
}

FValue f_eval(const ComparisonParams& p, double eps, const Vec& x, const Vec& z) {
  return ComparisonFunction(p, eps).eval(x, z);
}

CouplingPoints coupling_points(const UnitVector& nu_x, const UnitVector& nu_z, double alpha_x, double alpha_z,
                               Variant variant, const QuadratureRule& rule, double eps) {
  if (nu_x.dim() != nu_z.dim() || rule.dim() != nu_x.dim()) throw DimensionMismatch("coupling_points");
  CouplingPoints out;
  out.swapped = alpha_x < alpha_z;
  const UnitVector& nX = out.swapped ? nu_z : nu_x;
  const UnitVector& nZ = out.swapped ? nu_x : nu_z;
  const double aX = std::max(alpha_x, alpha_z);
  const double aZ = std::min(alpha_x, alpha_z);
  out.branch_weight = {aZ, 1.0 - aX, aX - aZ};

  auto push = [&](Vec hx, Vec hz, double w, int br) {
    if (out.swapped) std::swap(hx, hz);
    out.hx.push_back(std::move(hx));
    out.hz.push_back(std::move(hz));
    out.weight.push_back(w);
    out.branch.push_back(br);
  };

  const Vec detX = eps * nX.coords();
  const Vec detZ = eps * nZ.coords();
  if (aZ > 0.0) push(detX, detZ, aZ, 0);
  const bool need_noise = out.branch_weight[1] > 0.0 || out.branch_weight[2] > 0.0;
  if (!need_noise) return out;

  if (variant == Variant::orthogonal) {
    const CoupledRotation cr = coupled_rotation(nX, nZ);
    for (int i = 0; i < rule.size(); ++i) {
      const Vec zeta = rule.nodes.col(i);
      const double w = rule.weights[static_cast<std::size_t>(i)];
      const Vec pz = eps * cr.p_z.apply(zeta);
      if (out.branch_weight[1] > 0.0) push(eps * cr.p_x.apply(zeta), pz, out.branch_weight[1] * w, 1);
      if (out.branch_weight[2] > 0.0) push(detX, pz, out.branch_weight[2] * w, 2);
    }
  } else {
    for (int i = 0; i < rule.size(); ++i) {
      const Vec h = eps * rule.nodes.col(i);
      const double w = rule.weights[static_cast<std::size_t>(i)];
      if (out.branch_weight[1] > 0.0) push(h, h, out.branch_weight[1] * w, 1);
      if (out.branch_weight[2] > 0.0) push(detX, h, out.branch_weight[2] * w, 2);
    }
  }
  return out;
}

double F_eval(const std::function<double(const Vec&, const Vec&)>& f, const Vec& x, const Vec& z,
              const CouplingPoints& pts) {
  // Normalizing by the summed weights makes F(1) == 1 exactly in floating point.
  double acc = 0.0, total = 0.0;
  for (std::size_t k = 0; k < pts.weight.size(); ++k) {
    acc += pts.weight[k] * f(x + pts.hx[k], z + pts.hz[k]);
    total += pts.weight[k];
  }
  return acc / total;
}

double FIncrement::value() const {
  const double g2 = std::exp(log_g2);
  const double f2 = std::exp(log_f2);
  if (std::isinf(g2) || std::isinf(f2)) {
    // both huge: compare in the log domain
    if (log_g2 >= log_f2) return -std::exp(log_sub(log_g2, log_f2)) + g1;
    return std::exp(log_sub(log_f2, log_g2)) + g1;
  }
  return g1 - g2 + f2;
}

FIncrement F_increment(const ComparisonFunction& cf, const Vec& x, const Vec& z, const CouplingPoints& pts) {
  FIncrement out;
  const ComparisonParams& p = cf.params();
  const double eps = cf.epsilon();
  const Vec a = x - z;
  out.annulus = annulus_index(p, eps, a.norm());
  out.log_f2 = cf.log_f2_index(out.annulus);
  out.log_g2 = kNegInf;
  for (std::size_t k = 0; k < pts.weight.size(); ++k) {
    const double w = pts.weight[k];
    const double d1 = cf.f1_increment(x, z, pts.hx[k], pts.hz[k]);
    out.g1_terms[static_cast<std::size_t>(pts.branch[k])] += w * d1;
    const Vec dd = pts.hx[k] - pts.hz[k];
    double moved = (a + dd).norm();
    // pairs meant to coincide: treat round-off residue as the diagonal
    if (moved <= 64.0 * DBL_EPSILON * (a.norm() + dd.norm())) moved = 0.0;
    const long j = annulus_index(p, eps, moved);
    if (j <= p.N && w > 0.0) out.log_g2 = log_add(out.log_g2, std::log(w) + cf.log_f2_index(j));
  }
  out.g1 = out.g1_terms[0] + out.g1_terms[1] + out.g1_terms[2];
  return out;
}

double F_eval(const ComparisonFunction& cf, const ExponentField& field, Variant variant, const QuadratureRule& rule,
              const Vec& x, const Vec& z, const UnitVector& nu_x, const UnitVector& nu_z) {
  const double ax = coeffs(variant, field, x).alpha;
  const double az = coeffs(variant, field, z).alpha;
  const CouplingPoints pts = coupling_points(nu_x, nu_z, ax, az, variant, rule, cf.epsilon());
  const FIncrement inc = F_increment(cf, x, z, pts);
  const FValue f = cf.eval(x, z);
  return f.f + inc.value();
}

}  // namespace towlab
