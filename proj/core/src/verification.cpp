#include "towlab/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <thread>

namespace towlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

nlohmann::json vec_json(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

double json_number(double v) { return std::isfinite(v) ? v : (v > 0 ? 1e308 : -1e308); }

void check_section3_range(const ComparisonFunction& cf, double t, const char* who) {
  const ComparisonParams& p = cf.params();
  const double lo = static_cast<double>(p.N) * cf.epsilon() / 10.0;
  if (!(t > lo)) throw DomainError(std::string(who) + ": |x - z| must exceed N eps / 10");
  if (!(t <= p.omega1)) throw DomainError(std::string(who) + ": |x - z| must not exceed omega1");
}

Vec random_perpendicular(const Vec& v, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (int tries = 0; tries < 64; ++tries) {
    Vec w(v.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = g(rng);
    w -= w.dot(v) * v;
    const double n = w.norm();
    if (n > 1e-8) return w / n;
  }
  throw ConsistencyError("random_perpendicular: sampling failed");
}

Vec unit_dir(const Vec& x, const Vec& z, const char* who) {
  const Vec d = x - z;
  const double t = d.norm();
  if (t == 0.0) throw DomainError(std::string(who) + ": x and z coincide");
  return d / t;
}

/// Runs `count` items in fixed-size chunks, each chunk with its own seeded
/// stream, and merges chunk summaries in chunk order.
using ChunkFn = std::function<void(long begin, long end, Rng& rng, BatchSummary& out)>;

void merge_into(BatchSummary& acc, const BatchSummary& part) {
  const bool first = acc.total == 0;
  if (part.total > 0 && (first || part.worst > acc.worst)) {
    acc.worst = part.worst;
    acc.worst_case = part.worst_case;
  }
  acc.total += part.total;
  acc.passed += part.passed;
  acc.failed += part.failed;
  acc.skipped += part.skipped;
}

BatchSummary run_chunked(const std::string& name, long count, std::uint64_t seed, int threads, const ChunkFn& fn) {
  constexpr long kChunk = 512;
  const long chunks = (count + kChunk - 1) / kChunk;
  std::vector<BatchSummary> parts(static_cast<std::size_t>(chunks));
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<long>(workers, std::max<long>(chunks, 1)));
  auto work = [&](int w) {
    for (long c = w; c < chunks; c += workers) {
      Rng rng(mix_seed(seed + static_cast<std::uint64_t>(c)));
      fn(c * kChunk, std::min(count, (c + 1) * kChunk), rng, parts[static_cast<std::size_t>(c)]);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work, w);
  work(0);
  for (auto& th : pool) th.join();
  BatchSummary out;
  out.name = name;
  for (const auto& part : parts) merge_into(out, part);
  return out;
}

void record(BatchSummary& s, bool pass, bool skipped, double measure, const nlohmann::json& detail) {
  const bool first = s.total == 0;
  ++s.total;
  if (skipped) {
    ++s.skipped;
  } else if (pass) {
    ++s.passed;
  } else {
    ++s.failed;
  }
  if (first || measure > s.worst) {
    s.worst = measure;
    s.worst_case = detail;
  }
}

double t_range_min(const ComparisonFunction& cf, const BatchOptions& opt) {
  const double lo = static_cast<double>(cf.params().N) * cf.epsilon() / 10.0;
  return std::max(lo, opt.t_min);
}

double t_range_max(const ComparisonFunction& cf, const BatchOptions& opt) {
  return opt.t_max > 0.0 ? std::min(opt.t_max, cf.params().omega1) : cf.params().omega1;
}

/// Uniform on (lo, hi].
double sample_t(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return hi - (hi - lo) * u(rng);
}

Vec center_of(const BatchOptions& opt) { return opt.center.size() > 0 ? opt.center : Vec::Zero(opt.dim); }

}  // namespace

// ---- Taylor -----------------------------------------------------------------

nlohmann::json TaylorCheck::to_json() const {
  return {{"lhs", lhs},
          {"rhs", rhs},
          {"ok", ok},
          {"along", along},
          {"across", across},
          {"omega", omega},
          {"omega_d1", omega_d1},
          {"omega_d2", omega_d2},
          {"remainder", remainder},
          {"polynomial_range", polynomial_range}};
}

TaylorCheck taylor_bound_check(const ComparisonFunction& cf, const Vec& x, const Vec& z, const Vec& hx,
                               const Vec& hz) {
  require_same_dim(x, z, "taylor_bound_check");
  require_same_dim(x, hx, "taylor_bound_check");
  require_same_dim(x, hz, "taylor_bound_check");
  const ComparisonParams& p = cf.params();
  const double eps = cf.epsilon();
  const double t = (x - z).norm();
  check_section3_range(cf, t, "taylor_bound_check");
  const double hmax = eps * (1.0 + 1e-12);
  if (hx.norm() > hmax || hz.norm() > hmax) throw DomainError("taylor_bound_check: |h| must not exceed eps");

  TaylorCheck c;
  const UnitVector v = UnitVector::normalized(x - z);
  const Projection pr = project(hx - hz, v);
  c.along = pr.along;
  c.across = pr.across;
  const OmegaValue w = omega_eval(p, t);
  c.omega = w.value;
  c.omega_d1 = w.d1;
  c.omega_d2 = w.d2;
  c.remainder = (4.0 * p.M + 1.0) * std::pow(t, p.gamma - 2.0) * eps * eps;
  c.lhs = cf.f1_increment(x, z, hx, hz);
  c.rhs = p.C * w.d1 * c.along + 2.0 * p.M * (x + z).dot(hx + hz) + 0.5 * p.C * w.d2 * c.along * c.along +
          0.5 * p.C * (w.d1 / t) * c.across * c.across + c.remainder;
  c.ok = c.lhs <= c.rhs + 1e-10;
  c.polynomial_range = t + 2.0 * eps <= omega_knee(p);
  return c;
}

// ---- Case 1 / Case 2 ---------------------------------------------------------------

nlohmann::json CaseCheck::to_json() const {
  return {{"lhs", json_number(lhs)},
          {"g1", g1},
          {"log_g2", json_number(log_g2)},
          {"theta", theta},
          {"along", along},
          {"bound", bound},
          {"in_regime", in_regime},
          {"ok", ok},
          {"status", status}};
}

namespace {

CaseCheck pair_lhs(const ComparisonFunction& cf, const ExponentField& field, Variant variant, const QuadratureRule& rule,
                   const Vec& x, const Vec& z, const Move& opp, const Move& resp) {
  const double eps = cf.epsilon();
  const double ax = coeffs(variant, field, x).alpha;
  const double az = coeffs(variant, field, z).alpha;
  const FIncrement a = F_increment(cf, x, z, coupling_points(opp.nu_x, opp.nu_z, ax, az, variant, rule, eps));
  const FIncrement b = F_increment(cf, x, z, coupling_points(resp.nu_x, resp.nu_z, ax, az, variant, rule, eps));
  CaseCheck c;
  c.g1 = a.g1 + b.g1;
  c.log_g2 = log_add(a.log_g2, b.log_g2);
  // f2(x, z) = 0 beyond N eps / 10, so F + F - 2f = G1 terms - G2 terms
  c.lhs = c.g1 - std::exp(c.log_g2);
  return c;
}

}  // namespace

CaseCheck case1_verify(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                       const QuadratureRule& rule, const Vec& x, const Vec& z, const UnitVector& nu_x,
                       const UnitVector& nu_z) {
  require_same_dim(x, z, "case1_verify");
  const double t = (x - z).norm();
  check_section3_range(cf, t, "case1_verify");
  const double theta = std::pow(t, cf.params().s);
  const Vec v = unit_dir(x, z, "case1_verify");
  const double along = (nu_x.coords() - nu_z.coords()).dot(v);
  if (!(along * along >= 4.0 - theta)) throw DomainError("case1_verify: move is not in the reversal case");
  CaseCheck c = pair_lhs(cf, field, variant, rule, x, z, Move{nu_x, nu_z}, Move{-nu_x, -nu_z});
  c.theta = theta;
  c.along = along;
  c.ok = c.lhs < 0.0;
  c.status = c.ok ? "pass" : "fail";
  return c;
}

CaseCheck case2_verify(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                       const QuadratureRule& rule, const Vec& x, const Vec& z, const UnitVector& nu_x,
                       const UnitVector& nu_z) {
  require_same_dim(x, z, "case2_verify");
  const ComparisonParams& p = cf.params();
  const double t = (x - z).norm();
  check_section3_range(cf, t, "case2_verify");
  const double theta = std::pow(t, p.s);
  const Vec v = unit_dir(x, z, "case2_verify");
  const double along = (nu_x.coords() - nu_z.coords()).dot(v);
  if (!(along * along <= 4.0 - theta)) throw DomainError("case2_verify: move is not in the straight-pull case");
  const UnitVector uv = UnitVector::normalized(v);
  CaseCheck c = pair_lhs(cf, field, variant, rule, x, z, Move{nu_x, nu_z}, Move{-uv, uv});
  c.theta = theta;
  c.along = along;
  const double eps = cf.epsilon();
  c.bound = 6.0 * std::sqrt(p.M * p.C_u) * std::pow(t, p.delta / 2.0) * eps +
            0.5 * p.alpha_min * ((4.0 * p.M + 1.0) / (3.0 * p.c_alpha + 1.0) - p.C / 8.0) * std::pow(t, p.s) * eps;
  c.in_regime = p.M <= 0.0 || (x + z).norm() <= 1.5 * std::sqrt(p.C_u / p.M) * std::pow(t, p.delta / 2.0);
  if (c.in_regime) {
    c.ok = c.lhs < c.bound + 1e-10 && c.bound < 0.0;
    c.status = c.ok ? "pass" : "fail";
  } else {
    c.ok = true;
    c.status = "outside_regime";
  }
  return c;
}

// ---- annular chain ---------------------------------------------------------------

nlohmann::json AnnularCheck::to_json() const {
  return {{"index", index},
          {"diagonal", diagonal},
          {"g1_sup", g1_sup},
          {"g1_limit", g1_limit},
          {"g1_ok", g1_ok},
          {"g1_move", g1_move},
          {"moved_index", moved_index},
          {"log_g2", json_number(log_g2)},
          {"log_g2_floor", json_number(log_g2_floor)},
          {"g2_floor_ok", g2_floor_ok},
          {"log_g2_need", json_number(log_g2_need)},
          {"g2_ok", g2_ok},
          {"final_ok", final_ok},
          {"final_margin_log", json_number(final_margin_log)},
          {"ok", ok},
          {"failed_link", failed_link}};
}

AnnularCheck annular_verify(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                            const QuadratureRule& rule, const Vec& x, const Vec& z) {
  require_same_dim(x, z, "annular_verify");
  const ComparisonParams& p = cf.params();
  const double eps = cf.epsilon();
  const double t = (x - z).norm();
  if (t > static_cast<double>(p.N) * eps / 10.0) throw DomainError("annular_verify: |x - z| exceeds N eps / 10");

  AnnularCheck c;
  c.index = annulus_index(p, eps, t);
  if (c.index == 0) {
    // the diagonal carries the peak of f2; nothing to prove there
    c.diagonal = true;
    c.ok = true;
    return c;
  }
  const double C = p.C;
  const double bn = (x + z).norm();
  c.g1_sup = C * omega_increment(p, t, 2.0 * eps) + p.M * (4.0 * eps * bn + 4.0 * eps * eps);
  c.g1_limit = 3.0 * C * eps;
  c.g1_ok = c.g1_sup < c.g1_limit;

  const Move pull = Strategy::pull_together().propose(x, z, eps);
  const double ax = coeffs(variant, field, x).alpha;
  const double az = coeffs(variant, field, z).alpha;
  const CouplingPoints pts = coupling_points(pull.nu_x, pull.nu_z, ax, az, variant, rule, eps);
  const FIncrement inc = F_increment(cf, x, z, pts);
  c.g1_move = inc.g1;
  c.log_g2 = inc.log_g2;
  c.moved_index = annulus_index(p, eps, 0.0);
  {
    const Vec dd = eps * (pull.nu_x.coords() - pull.nu_z.coords());
    double moved = (x - z + dd).norm();
    if (moved <= 64.0 * std::numeric_limits<double>::epsilon() * (t + dd.norm())) moved = 0.0;
    c.moved_index = annulus_index(p, eps, moved);
  }

  c.log_g2_floor = std::log(p.alpha_min) + cf.log_f2_index(c.index - 1);
  c.g2_floor_ok = c.log_g2 >= c.log_g2_floor - 1e-12 * std::max(1.0, std::abs(c.log_g2_floor));
  const double log_2f2 = std::log(2.0) + inc.log_f2;
  c.log_g2_need = log_add(std::log(7.0 * C * eps), log_2f2);
  c.g2_ok = c.log_g2 > c.log_g2_need;

  // sup F + inf F - 2 f + C eps <= X - (G2 - 2 f2), X = sup G1 excess + G1 excess of the pull + C eps
  const double X = c.g1_sup + inc.g1 + C * eps;
  if (c.log_g2 > log_2f2) {
    const double room = log_sub(c.log_g2, log_2f2);
    c.final_margin_log = X > 0.0 ? room - std::log(X) : std::numeric_limits<double>::infinity();
    c.final_ok = X <= 0.0 || std::log(X) < room;
  } else {
    const double deficit = log_sub(log_2f2, c.log_g2);
    c.final_margin_log = X < 0.0 ? std::log(-X) - deficit : kNegInf;
    c.final_ok = X < 0.0 && std::log(-X) > deficit;
  }
  // the rough bound must dominate the pull's own G1 excess
  const bool consistent = inc.g1 <= c.g1_sup + 1e-12 * std::max(1.0, c.g1_limit);

  if (!c.g1_ok) {
    c.failed_link = "g1_rough_bound";
  } else if (!consistent) {
    c.failed_link = "g1_consistency";
  } else if (c.moved_index >= c.index) {
    c.failed_link = "move_into_inner_annulus";
  } else if (!c.g2_floor_ok) {
    c.failed_link = "g2_lower_bound";
  } else if (!c.g2_ok) {
    c.failed_link = "g2_step_inequality";
  } else if (!c.final_ok) {
    c.failed_link = "final_inequality";
  }
  c.ok = c.failed_link.empty();
  return c;
}

// ---- samplers --------------------------------------------------------------------

std::pair<Vec, Vec> sample_pair(const Vec& center, double r, double t, Rng& rng) {
  if (!(t >= 0.0) || !(t < 2.0 * r)) throw DomainError("sample_pair: need 0 <= t < 2r");
  const int n = static_cast<int>(center.size());
  const Vec mid = center + (r - t / 2.0) * sample_unit_ball(n, rng);
  const Vec v = sample_unit_sphere(n, rng);
  return {mid + 0.5 * t * v, mid - 0.5 * t * v};
}

Move sample_case1_move(const Vec& x, const Vec& z, double theta, Rng& rng) {
  const Vec v = unit_dir(x, z, "sample_case1_move");
  const double q = std::sqrt(std::max(0.0, 4.0 - theta));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double cx = (q - 1.0) + (2.0 - q) * u(rng);
  const double lo = q - cx;
  const double cz = lo + (1.0 - lo) * u(rng);
  const double sigma = u(rng) < 0.5 ? 1.0 : -1.0;
  const Vec wx = random_perpendicular(v, rng);
  const Vec wz = random_perpendicular(v, rng);
  const Vec nx = sigma * (cx * v + std::sqrt(std::max(0.0, 1.0 - cx * cx)) * wx);
  const Vec nz = -sigma * (cz * v + std::sqrt(std::max(0.0, 1.0 - cz * cz)) * wz);
  Move m{UnitVector::normalized(nx), UnitVector::normalized(nz)};
  const double along = (m.nu_x.coords() - m.nu_z.coords()).dot(v);
  if (along * along < 4.0 - theta) {
    // renormalization nudged the pair across the threshold: use the exact opposition
    const UnitVector uv = UnitVector::normalized(sigma * v);
    m = Move{uv, -uv};
  }
  return m;
}

Move sample_case2_move(const Vec& x, const Vec& z, double theta, Rng& rng) {
  const Vec v = unit_dir(x, z, "sample_case2_move");
  const int n = static_cast<int>(x.size());
  for (int tries = 0; tries < 10000; ++tries) {
    Move m{UnitVector::normalized(sample_unit_sphere(n, rng)), UnitVector::normalized(sample_unit_sphere(n, rng))};
    const double along = (m.nu_x.coords() - m.nu_z.coords()).dot(v);
    if (along * along <= 4.0 - theta) return m;
  }
  throw ConsistencyError("sample_case2_move: rejection sampling failed");
}

// ---- batches -------------------------------------------------------------------

nlohmann::json BatchSummary::to_json() const {
  return {{"name", name},     {"total", total},          {"passed", passed}, {"failed", failed},
          {"skipped", skipped}, {"worst", json_number(worst)}, {"worst_case", worst_case},
          {"extra", extra},   {"ok", ok()}};
}

BatchSummary taylor_batch(const ComparisonFunction& cf, const BatchOptions& opt) {
  const double lo = t_range_min(cf, opt);
  const double hi = t_range_max(cf, opt);
  if (!(hi > lo)) throw DomainError("taylor_batch: empty separation range");
  const Vec center = center_of(opt);
  const double r = cf.params().r;
  const double eps = cf.epsilon();
  const int n = opt.dim;
  BatchSummary out = run_chunked("taylor", opt.count, opt.seed, opt.threads,
                                 [&](long b, long e, Rng& rng, BatchSummary& s) {
                                   for (long k = b; k < e; ++k) {
                                     const double t = sample_t(lo, hi, rng);
                                     const auto [x, z] = sample_pair(center, r, t, rng);
                                     const Vec hx = eps * sample_unit_ball(n, rng);
                                     const Vec hz = eps * sample_unit_ball(n, rng);
                                     const TaylorCheck c = taylor_bound_check(cf, x, z, hx, hz);
                                     nlohmann::json d = c.to_json();
                                     d["x"] = vec_json(x);
                                     d["z"] = vec_json(z);
                                     d["hx"] = vec_json(hx);
                                     d["hz"] = vec_json(hz);
                                     record(s, c.ok, false, c.lhs - c.rhs, d);
                                   }
                                 });
  out.extra = {{"dim", n}, {"t_min", lo}, {"t_max", hi}, {"eps", eps}};
  return out;
}

namespace {

BatchSummary case_batch(const std::string& name, bool reversal, const ComparisonFunction& cf,
                        const ExponentField& field, Variant variant, const QuadratureRule& rule,
                        const BatchOptions& opt) {
  const double lo = t_range_min(cf, opt);
  const double hi = t_range_max(cf, opt);
  if (!(hi > lo)) throw DomainError(name + "_batch: empty separation range");
  const Vec center = center_of(opt);
  const double r = cf.params().r;
  const double s_exp = cf.params().s;
  BatchSummary out = run_chunked(name, opt.count, opt.seed, opt.threads,
                                 [&](long b, long e, Rng& rng, BatchSummary& s) {
                                   for (long k = b; k < e; ++k) {
                                     const double t = sample_t(lo, hi, rng);
                                     const auto [x, z] = sample_pair(center, r, t, rng);
                                     const double theta = std::pow(t, s_exp);
                                     const Move m = reversal ? sample_case1_move(x, z, theta, rng)
                                                             : sample_case2_move(x, z, theta, rng);
                                     const CaseCheck c =
                                         reversal ? case1_verify(cf, field, variant, rule, x, z, m.nu_x, m.nu_z)
                                                  : case2_verify(cf, field, variant, rule, x, z, m.nu_x, m.nu_z);
                                     nlohmann::json d = c.to_json();
                                     d["x"] = vec_json(x);
                                     d["z"] = vec_json(z);
                                     d["nu_x"] = vec_json(m.nu_x.coords());
                                     d["nu_z"] = vec_json(m.nu_z.coords());
                                     const double measure = reversal ? c.lhs : c.lhs - c.bound;
                                     const bool skip = c.status == "outside_regime";
                                     record(s, c.ok, skip, skip ? -INFINITY : measure, d);
                                   }
                                 });
  out.extra = {{"dim", opt.dim}, {"t_min", lo}, {"t_max", hi}, {"eps", cf.epsilon()}, {"variant", to_string(variant)}};
  return out;
}

}  // namespace

BatchSummary case1_batch(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                         const QuadratureRule& rule, const BatchOptions& opt) {
  return case_batch("case1", true, cf, field, variant, rule, opt);
}

BatchSummary case2_batch(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                         const QuadratureRule& rule, const BatchOptions& opt) {
  return case_batch("case2", false, cf, field, variant, rule, opt);
}

BatchSummary annular_batch(const ComparisonFunction& cf, const ExponentField& field, Variant variant,
                           const QuadratureRule& rule, const BatchOptions& opt) {
  const ComparisonParams& p = cf.params();
  const double eps = cf.epsilon();
  const long per = std::max<long>(1, opt.count);
  const Vec center = center_of(opt);
  BatchSummary out = run_chunked("annular", p.N * per, opt.seed, opt.threads,
                                 [&](long b, long e, Rng& rng, BatchSummary& s) {
                                   for (long k = b; k < e; ++k) {
                                     const long i = k / per + 1;
                                     const double t = (static_cast<double>(i) - 0.5) * eps / 10.0;
                                     const auto [x, z] = sample_pair(center, p.r, t, rng);
                                     const AnnularCheck c = annular_verify(cf, field, variant, rule, x, z);
                                     nlohmann::json d = c.to_json();
                                     d["x"] = vec_json(x);
                                     d["z"] = vec_json(z);
                                     // violation measure: minus the final-inequality log margin
                                     record(s, c.ok && c.index == i, false, -c.final_margin_log, d);
                                   }
                                 });
  out.extra = {{"dim", opt.dim}, {"per_index", per}, {"N", p.N}, {"eps", eps}, {"variant", to_string(variant)}};
  return out;
}

}  // namespace towlab
