#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "towlab/coefficients.hpp"
#include "towlab/geometry.hpp"
#include "towlab/grid.hpp"
#include "towlab/quadrature.hpp"

namespace towlab {

/// A pair of announced directions, one per token.
struct Move {
  UnitVector nu_x;
  UnitVector nu_z;
};

/// How a responder strategy learns the opponent's move.
///  announce_then_respond: the opponent's move for this turn is visible.
///  simultaneous: only the opponent's move from the previous turn is visible.
enum class ResponseMode { announce_then_respond, simultaneous };

class Strategy {
 public:
  enum class Kind { pull_together, slight_turn, threshold_angle, fixed_direction, responder_wrapper };

  /// (-v, v) with v = (x - z)/|x - z|; when |x - z| <= 2 eps the pair that
  /// lands both tokens on the same point.
  static Strategy pull_together();
  /// (T v, -T v) where T turns v by theta = scale * eps^power toward a fixed
  /// perpendicular direction.
  static Strategy slight_turn(double scale = 1.0, double power = 0.75);
  /// Responder: reversal of the opponent's move when (nu_x - nu_z)_V^2 >= 4 - |x - z|^s,
  /// otherwise (-v, v).
  static Strategy threshold_angle(double s);
  static Strategy fixed_direction(const Vec& dx, const Vec& dz);
  /// Responder: (-nu_x, -nu_z).
  static Strategy responder_wrapper();
  static Strategy from_json(const nlohmann::json& j);

  Kind kind() const { return kind_; }
  bool is_responder() const { return kind_ == Kind::threshold_angle || kind_ == Kind::responder_wrapper; }
  double theta(double eps) const;

  /// Move without information about the opponent (responders fall back to
  /// pull_together).
  Move propose(const Vec& x, const Vec& z, double eps) const;
  Move respond(const Vec& x, const Vec& z, double eps, const Move& opponent) const;
  nlohmann::json to_json() const;

 private:
  explicit Strategy(Kind k) : kind_(k) {}
  Kind kind_;
  double a_ = 0.0;  // slight_turn scale / threshold s
  double b_ = 0.0;  // slight_turn power
  Vec dx_, dz_;
};

std::string to_string(Strategy::Kind k);

/// Case split of the threshold-angle rule. Throws DomainError when x == z.
Move threshold_response(const Vec& x, const Vec& z, const Move& opponent, double s);
/// True when the opponent's move falls into the reversal case.
bool threshold_case1(const Vec& x, const Vec& z, const Move& opponent, double s);

enum class Branch { det_det, common_noise, det_noise };
std::string to_string(Branch b);

enum class StopCause { diagonal, exit, cap };
std::string to_string(StopCause c);

struct GameConfig {
  Variant variant = Variant::orthogonal;
  Domain domain;
  ExponentField field;
  /// Single game: payoff g at the exit point. Doubled game: payoff
  /// `doubled_payoff` on exit, 0 on the diagonal.
  std::optional<BoundaryDatum> g;
  double doubled_payoff = 0.0;
  double stop_distance = -1.0;  // < 0: eps / 10
  long max_turns = 100000;
  std::uint64_t seed = 1;
  ResponseMode mode = ResponseMode::announce_then_respond;

  double epsilon() const { return domain.epsilon(); }
  double stop() const { return stop_distance < 0.0 ? epsilon() / 10.0 : stop_distance; }
};

/// 2 sup|g| over the strip of a lattice of spacing h; dominates 2 sup|u_eps|
/// by the maximum principle.
double doubled_payoff_bound(const BoundaryDatum& g, const Domain& domain, double h);

// ---- single token -------------------------------------------------------

struct SingleStep {
  Vec x;
  int winner = 0;  // 0: player I, 1: player II
  bool noise = false;
  Vec zeta;  // empty unless noise
};

/// One turn of the single-token game at x given both players' directions.
SingleStep step_single(const Vec& x, const UnitVector& nu_I, const UnitVector& nu_II, const CoefficientPair& ab,
                       Variant variant, double eps, Rng& rng);

using Policy = std::function<UnitVector(const Vec& x)>;

Policy fixed_policy(const UnitVector& nu);
/// Picks the direction of `dirs` that maximizes (or minimizes) the
/// interpolated A_eps u(x, nu); for the full-ball variant u(x + eps nu).
Policy greedy_policy(const GridField& u, const ExponentField& field, Variant variant, DirectionSet dirs,
                     QuadratureRule quad, bool maximize);

struct SingleTrace {
  std::vector<Vec> positions;  // filled only when recording
  long turns = 0;
  StopCause cause = StopCause::exit;
  double payoff = 0.0;
};

SingleTrace play_single(const GameConfig& config, const Policy& player_I, const Policy& player_II, const Vec& start,
                        Rng& rng, bool record = false);

// ---- coupled game ---------------------------------------------------------

struct CoupledStep {
  Vec x, z;
  bool ours_moved = false;
  Move move;
  Branch branch = Branch::det_det;
  Vec zeta;  // empty for det_det
  bool swapped = false;
};

/// One turn of the game in Omega x Omega. Labels are swapped internally so
/// that alpha(x) >= alpha(z); the three branches have probabilities
/// alpha(z), beta(x), alpha(x) - alpha(z) in the swapped labels.
CoupledStep step_coupled(const Vec& x, const Vec& z, const Strategy& ours, const Strategy& opp,
                         const GameConfig& config, Rng& rng, const Move* previous_opp = nullptr);

struct TurnRecord {
  Vec x, z;
  CoupledStep step;
};

struct GameTrace {
  std::vector<TurnRecord> turns;  // filled only when recording
  long turn_count = 0;
  StopCause cause = StopCause::exit;
  double payoff = 0.0;
  Vec x_end, z_end;
};

GameTrace play_episode(const GameConfig& config, const Strategy& ours, const Strategy& opp, const Vec& x0,
                       const Vec& z0, Rng& rng, bool record = false);

/// JSON-lines export, one turn per line.
std::string trace_jsonl(const GameTrace& trace);

// ---- estimation -----------------------------------------------------------

struct ValueReport {
  double mean = 0.0;
  double std_error = 0.0;
  long episodes = 0;
  long capped = 0;
  double cap_fraction = 0.0;
  bool reliable = true;  // cap_fraction <= 10%
  long diagonal = 0;
  long exits = 0;
  nlohmann::json to_json() const;
};

/// Episodes use independent streams seeded by mix_seed(config.seed + k).
ValueReport estimate_value(const GameConfig& config, const Strategy& ours, const Strategy& opp, const Vec& x0,
                           const Vec& z0, long episodes);
ValueReport estimate_single_value(const GameConfig& config, const Policy& player_I, const Policy& player_II,
                                  const Vec& start, long episodes);

/// Opponent moves observed in a run of coupled steps: for every turn in which
/// the opponent won the toss and x moved deterministically, the loss
/// eps - <dx, v> along v and the gain |dx - <dx, v> v| across it.
struct TurnStatistics {
  long steps = 0;
  long samples = 0;
  double mean_loss = 0.0;
  double mean_gain = 0.0;
  double loss_stderr = 0.0;
  double gain_stderr = 0.0;
};

/// Plays `steps` coupled turns from (x0, z0), restarting there whenever the
/// episode would stop.
TurnStatistics opponent_turn_statistics(const GameConfig& config, const Strategy& ours, const Strategy& opp,
                                        const Vec& x0, const Vec& z0, long steps);

}  // namespace towlab
