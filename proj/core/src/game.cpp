#include "towlab/game.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "towlab/dpp.hpp"

namespace towlab {

namespace {

nlohmann::json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vec json_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Unit vector along x - z, or nullopt on the diagonal.
std::optional<UnitVector> separation(const Vec& x, const Vec& z) {
  const Vec d = x - z;
  if (!(d.norm() > 0.0)) return std::nullopt;
  return UnitVector::normalized(d);
}

Vec perpendicular(const UnitVector& v) { return complete_orthonormal(v.coords()).col(0); }

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

std::string to_string(Strategy::Kind k) {
  switch (k) {
    case Strategy::Kind::pull_together: return "pull_together";
    case Strategy::Kind::slight_turn: return "slight_turn";
    case Strategy::Kind::threshold_angle: return "threshold_angle";
    case Strategy::Kind::fixed_direction: return "fixed_direction";
    case Strategy::Kind::responder_wrapper: return "responder_wrapper";
  }
  return "unknown";
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::det_det: return "det-det";
    case Branch::common_noise: return "common-noise";
    case Branch::det_noise: return "det-noise";
  }
  return "unknown";
}

std::string to_string(StopCause c) {
  switch (c) {
    case StopCause::diagonal: return "diagonal";
    case StopCause::exit: return "exit";
    case StopCause::cap: return "cap";
  }
  return "unknown";
}

Strategy Strategy::pull_together() { return Strategy(Kind::pull_together); }

Strategy Strategy::slight_turn(double scale, double power) {
  if (!(scale >= 0.0)) throw DomainError("slight_turn: scale must be nonnegative");
  Strategy s(Kind::slight_turn);
  s.a_ = scale;
  s.b_ = power;
  return s;
}

Strategy Strategy::threshold_angle(double s) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("threshold_angle: s must lie in (0, 1)");
  Strategy st(Kind::threshold_angle);
  st.a_ = s;
  return st;
}

Strategy Strategy::fixed_direction(const Vec& dx, const Vec& dz) {
  require_same_dim(dx, dz, "fixed_direction");
  Strategy s(Kind::fixed_direction);
  s.dx_ = UnitVector::normalized(dx).coords();
  s.dz_ = UnitVector::normalized(dz).coords();
  return s;
}

Strategy Strategy::responder_wrapper() { return Strategy(Kind::responder_wrapper); }

Strategy Strategy::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "pull_together") return pull_together();
  if (kind == "slight_turn") return slight_turn(j.value("scale", 1.0), j.value("power", 0.75));
  if (kind == "threshold_angle") return threshold_angle(j.at("s").get<double>());
  if (kind == "fixed_direction") return fixed_direction(json_vec(j.at("dx")), json_vec(j.at("dz")));
  if (kind == "responder_wrapper") return responder_wrapper();
  throw DomainError("unknown strategy kind '" + kind + "'");
}

nlohmann::json Strategy::to_json() const {
  nlohmann::json j = {{"kind", to_string(kind_)}};
  if (kind_ == Kind::slight_turn) {
    j["scale"] = a_;
    j["power"] = b_;
  } else if (kind_ == Kind::threshold_angle) {
    j["s"] = a_;
  } else if (kind_ == Kind::fixed_direction) {
    j["dx"] = vec_json(dx_);
    j["dz"] = vec_json(dz_);
  }
  return j;
}

double Strategy::theta(double eps) const { return kind_ == Kind::slight_turn ? a_ * std::pow(eps, b_) : 0.0; }

Move Strategy::propose(const Vec& x, const Vec& z, double eps) const {
  require_same_dim(x, z, "Strategy::propose");
  const int n = static_cast<int>(x.size());
  const auto v = separation(x, z);
  switch (kind_) {
    case Kind::fixed_direction:
      return {UnitVector(dx_), UnitVector(dz_)};
    case Kind::slight_turn: {
      if (!v) return {UnitVector::axis(n, 0), UnitVector::axis(n, 0, -1.0)};
      const double th = theta(eps);
      const Vec t = std::cos(th) * v->coords() + std::sin(th) * perpendicular(*v);
      const UnitVector tv = UnitVector::normalized(t);
      return {tv, -tv};
    }
    case Kind::pull_together:
    case Kind::threshold_angle:
    case Kind::responder_wrapper: {
      if (!v) return {UnitVector::axis(n, 0), UnitVector::axis(n, 0)};
      const double d = (x - z).norm();
      if (d > 2.0 * eps) return {-*v, *v};
      const double c = d / eps;
      const double tang = std::sqrt(std::max(0.0, 1.0 - 0.25 * c * c));
      const Vec w = perpendicular(*v);
      return {UnitVector::normalized(-0.5 * c * v->coords() + tang * w),
              UnitVector::normalized(0.5 * c * v->coords() + tang * w)};
    }
  }
  throw ConsistencyError("Strategy::propose: unhandled kind");
}

Move Strategy::respond(const Vec& x, const Vec& z, double eps, const Move& opponent) const {
  switch (kind_) {
    case Kind::responder_wrapper:
      return {-opponent.nu_x, -opponent.nu_z};
    case Kind::threshold_angle:
      if (!separation(x, z)) return propose(x, z, eps);
      return threshold_response(x, z, opponent, a_);
    default:
      return propose(x, z, eps);
  }
}

bool threshold_case1(const Vec& x, const Vec& z, const Move& opponent, double s) {
  const auto v = separation(x, z);
  if (!v) throw DomainError("threshold_response: x == z, direction v undefined");
  const double big_theta = std::pow((x - z).norm(), s);
  const double along = project(opponent.nu_x.coords() - opponent.nu_z.coords(), *v).along;
  return along * along >= 4.0 - big_theta;
}

Move threshold_response(const Vec& x, const Vec& z, const Move& opponent, double s) {
  if (threshold_case1(x, z, opponent, s)) return {-opponent.nu_x, -opponent.nu_z};
  const UnitVector v = *separation(x, z);
  return {-v, v};
}

double doubled_payoff_bound(const BoundaryDatum& g, const Domain& domain, double h) {
  GridField field = GridField::make(domain, h);
  field.impose(g);
  double sup = 0.0;
  for (std::size_t i : field.strip()) sup = std::max(sup, std::abs(field[i]));
  return 2.0 * sup;
}

SingleStep step_single(const Vec& x, const UnitVector& nu_I, const UnitVector& nu_II, const CoefficientPair& ab,
                       Variant variant, double eps, Rng& rng) {
  require_same_dim(x, nu_I.coords(), "step_single");
  require_same_dim(x, nu_II.coords(), "step_single");
  SingleStep out;
  out.winner = uniform01(rng) < 0.5 ? 0 : 1;
  const UnitVector& nu = out.winner == 0 ? nu_I : nu_II;
  if (uniform01(rng) < ab.alpha) {
    out.x = x + eps * nu.coords();
    return out;
  }
  out.noise = true;
  const int n = static_cast<int>(x.size());
  if (variant == Variant::orthogonal) {
    out.zeta = sample_orthogonal_ball(n, rng);
    out.x = x + eps * frame_for(nu, 1).apply(out.zeta);
  } else {
    out.zeta = sample_unit_ball(n, rng);
    out.x = x + eps * out.zeta;
  }
  return out;
}

Policy fixed_policy(const UnitVector& nu) {
  return [nu](const Vec&) { return nu; };
}

Policy greedy_policy(const GridField& u, const ExponentField& field, Variant variant, DirectionSet dirs,
                     QuadratureRule quad, bool maximize) {
  return [&u, &field, variant, dirs = std::move(dirs), quad = std::move(quad), maximize](const Vec& x) {
    const CoefficientPair ab = coeffs_closed(variant, field, x);
    int best = 0;
    double best_value = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (int k = 0; k < dirs.size(); ++k) {
      const UnitVector nu = UnitVector::normalized(dirs.dirs.col(k));
      const double value = variant == Variant::orthogonal
                               ? avg_operator(u, x, nu, ab, variant, quad)
                               : u.interpolate(x + u.domain().epsilon() * nu.coords());
      if (maximize ? value > best_value : value < best_value) {
        best_value = value;
        best = k;
      }
    }
    return UnitVector::normalized(dirs.dirs.col(best));
  };
}

SingleTrace play_single(const GameConfig& config, const Policy& player_I, const Policy& player_II, const Vec& start,
                        Rng& rng, bool record) {
  if (!config.g) throw DomainError("play_single: the single game needs a boundary datum g");
  SingleTrace trace;
  Vec x = start;
  if (record) trace.positions.push_back(x);
  while (true) {
    if (!config.domain.contains(x)) {
      trace.cause = StopCause::exit;
      trace.payoff = (*config.g)(x);
      return trace;
    }
    if (trace.turns >= config.max_turns) {
      trace.cause = StopCause::cap;
      trace.payoff = std::numeric_limits<double>::quiet_NaN();
      return trace;
    }
    const CoefficientPair ab = coeffs_closed(config.variant, config.field, x);
    x = step_single(x, player_I(x), player_II(x), ab, config.variant, config.epsilon(), rng).x;
    ++trace.turns;
    if (record) trace.positions.push_back(x);
  }
}

CoupledStep step_coupled(const Vec& x, const Vec& z, const Strategy& ours, const Strategy& opp,
                         const GameConfig& config, Rng& rng, const Move* previous_opp) {
  require_same_dim(x, z, "step_coupled");
  const double eps = config.epsilon();
  const int n = static_cast<int>(x.size());

  const bool ours_moved = uniform01(rng) < 0.5;
  const Move opp_move = opp.is_responder() ? opp.respond(x, z, eps, ours.propose(x, z, eps)) : opp.propose(x, z, eps);
  Move move = opp_move;
  if (ours_moved) {
    if (!ours.is_responder()) {
      move = ours.propose(x, z, eps);
    } else if (config.mode == ResponseMode::announce_then_respond) {
      move = ours.respond(x, z, eps, opp_move);
    } else {
      move = previous_opp ? ours.respond(x, z, eps, *previous_opp) : ours.propose(x, z, eps);
    }
  }

  const double ax = coeffs_closed(config.variant, config.field, x).alpha;
  const double az = coeffs_closed(config.variant, config.field, z).alpha;
  const bool swapped = ax < az;
  // Working labels: X carries the larger alpha.
  const Vec& X = swapped ? z : x;
  const Vec& Z = swapped ? x : z;
  const UnitVector& nX = swapped ? move.nu_z : move.nu_x;
  const UnitVector& nZ = swapped ? move.nu_x : move.nu_z;
  const double aX = swapped ? az : ax;
  const double aZ = swapped ? ax : az;

  Vec Xn, Zn, zeta;
  Branch branch;
  const double u = uniform01(rng);
  if (u < aZ) {
    branch = Branch::det_det;
    Xn = X + eps * nX.coords();
    Zn = Z + eps * nZ.coords();
  } else if (u < aZ + (1.0 - aX)) {
    branch = Branch::common_noise;
    if (config.variant == Variant::orthogonal) {
      zeta = sample_orthogonal_ball(n, rng);
      const CoupledRotation cr = coupled_rotation(nX, nZ);
      Xn = X + eps * cr.p_x.apply(zeta);
      Zn = Z + eps * cr.p_z.apply(zeta);
    } else {
      zeta = sample_unit_ball(n, rng);
      Xn = X + eps * zeta;
      Zn = Z + eps * zeta;
    }
  } else {
    branch = Branch::det_noise;
    Xn = X + eps * nX.coords();
    if (config.variant == Variant::orthogonal) {
      zeta = sample_orthogonal_ball(n, rng);
      Zn = Z + eps * coupled_rotation(nX, nZ).p_z.apply(zeta);
    } else {
      zeta = sample_unit_ball(n, rng);
      Zn = Z + eps * zeta;
    }
  }
  return CoupledStep{swapped ? Zn : Xn, swapped ? Xn : Zn, ours_moved, move, branch, zeta, swapped};
}

GameTrace play_episode(const GameConfig& config, const Strategy& ours, const Strategy& opp, const Vec& x0,
                       const Vec& z0, Rng& rng, bool record) {
  require_same_dim(x0, z0, "play_episode");
  GameTrace trace;
  Vec x = x0, z = z0;
  std::optional<Move> prev_opp;
  while (true) {
    if ((x - z).norm() <= config.stop()) {
      trace.cause = StopCause::diagonal;
      trace.payoff = 0.0;
      break;
    }
    if (!config.domain.contains(x) || !config.domain.contains(z)) {
      trace.cause = StopCause::exit;
      trace.payoff = config.doubled_payoff;
      break;
    }
    if (trace.turn_count >= config.max_turns) {
      trace.cause = StopCause::cap;
      trace.payoff = std::numeric_limits<double>::quiet_NaN();
      break;
    }
    CoupledStep step = step_coupled(x, z, ours, opp, config, rng, prev_opp ? &*prev_opp : nullptr);
    if (!step.ours_moved) prev_opp = step.move;
    if (record) trace.turns.push_back(TurnRecord{x, z, step});
    x = step.x;
    z = step.z;
    ++trace.turn_count;
  }
  trace.x_end = x;
  trace.z_end = z;
  return trace;
}

std::string trace_jsonl(const GameTrace& trace) {
  std::ostringstream os;
  for (std::size_t k = 0; k < trace.turns.size(); ++k) {
    const TurnRecord& t = trace.turns[k];
    nlohmann::json j = {{"turn", k},
                        {"x", vec_json(t.x)},
                        {"z", vec_json(t.z)},
                        {"mover", t.step.ours_moved ? "ours" : "opponent"},
                        {"nu_x", vec_json(t.step.move.nu_x.coords())},
                        {"nu_z", vec_json(t.step.move.nu_z.coords())},
                        {"branch", to_string(t.step.branch)},
                        {"swapped", t.step.swapped},
                        {"x_next", vec_json(t.step.x)},
                        {"z_next", vec_json(t.step.z)}};
    j["zeta"] = t.step.zeta.size() ? vec_json(t.step.zeta) : nlohmann::json(nullptr);
    os << j.dump() << '\n';
  }
  nlohmann::json end = {{"end", to_string(trace.cause)}, {"turns", trace.turn_count}};
  end["payoff"] = std::isnan(trace.payoff) ? nlohmann::json(nullptr) : nlohmann::json(trace.payoff);
  os << end.dump() << '\n';
  return os.str();
}

nlohmann::json ValueReport::to_json() const {
  return {{"mean", mean},       {"std_error", std_error}, {"episodes", episodes},
          {"capped", capped},   {"cap_fraction", cap_fraction},
          {"reliable", reliable}, {"diagonal", diagonal}, {"exits", exits}};
}

namespace {

struct Accumulator {
  double sum = 0.0, sum_sq = 0.0;
  long count = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++count;
  }
  double mean() const { return count ? sum / count : std::numeric_limits<double>::quiet_NaN(); }
  double stderr_() const {
    if (count < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean();
    const double var = std::max(0.0, (sum_sq - count * m * m) / (count - 1));
    return std::sqrt(var / count);
  }
};

void finish(ValueReport& r, const Accumulator& acc) {
  r.mean = acc.mean();
  r.std_error = acc.stderr_();
  r.cap_fraction = r.episodes ? static_cast<double>(r.capped) / r.episodes : 0.0;
  r.reliable = r.cap_fraction <= 0.10;
}

}  // namespace

ValueReport estimate_value(const GameConfig& config, const Strategy& ours, const Strategy& opp, const Vec& x0,
                           const Vec& z0, long episodes) {
  if (episodes < 100) throw DomainError("estimate_value: need at least 100 episodes");
  ValueReport r;
  Accumulator acc;
  for (long k = 0; k < episodes; ++k) {
    Rng rng(mix_seed(config.seed + static_cast<std::uint64_t>(k)));
    const GameTrace t = play_episode(config, ours, opp, x0, z0, rng);
    ++r.episodes;
    if (t.cause == StopCause::cap) {
      ++r.capped;
      continue;
    }
    (t.cause == StopCause::diagonal ? r.diagonal : r.exits)++;
    acc.add(t.payoff);
  }
  finish(r, acc);
  return r;
}

ValueReport estimate_single_value(const GameConfig& config, const Policy& player_I, const Policy& player_II,
                                  const Vec& start, long episodes) {
  if (episodes < 100) throw DomainError("estimate_single_value: need at least 100 episodes");
  ValueReport r;
  Accumulator acc;
  for (long k = 0; k < episodes; ++k) {
    Rng rng(mix_seed(config.seed + static_cast<std::uint64_t>(k)));
    const SingleTrace t = play_single(config, player_I, player_II, start, rng);
    ++r.episodes;
    if (t.cause == StopCause::cap) {
      ++r.capped;
      continue;
    }
    ++r.exits;
    acc.add(t.payoff);
  }
  finish(r, acc);
  return r;
}

TurnStatistics opponent_turn_statistics(const GameConfig& config, const Strategy& ours, const Strategy& opp,
                                        const Vec& x0, const Vec& z0, long steps) {
  const double eps = config.epsilon();
  Rng rng(mix_seed(config.seed));
  Accumulator loss, gain;
  Vec x = x0, z = z0;
  TurnStatistics st;
  std::optional<Move> prev_opp;
  for (long k = 0; k < steps; ++k) {
    if ((x - z).norm() <= config.stop() || !config.domain.contains(x) || !config.domain.contains(z)) {
      x = x0;
      z = z0;
      prev_opp.reset();
    }
    const CoupledStep step = step_coupled(x, z, ours, opp, config, rng, prev_opp ? &*prev_opp : nullptr);
    ++st.steps;
    const bool x_deterministic =
        step.branch == Branch::det_det || (step.branch == Branch::det_noise && !step.swapped);
    if (!step.ours_moved) {
      prev_opp = step.move;
      if (x_deterministic) {
        const UnitVector v = UnitVector::normalized(x - z);
        const Vec dx = step.x - x;
        const double along = dx.dot(v.coords());
        loss.add(eps - along);
        gain.add((dx - along * v.coords()).norm());
      }
    }
    x = step.x;
    z = step.z;
  }
  st.samples = loss.count;
  st.mean_loss = loss.mean();
  st.mean_gain = gain.mean();
  st.loss_stderr = loss.stderr_();
  st.gain_stderr = gain.stderr_();
  return st;
}

}  // namespace towlab
