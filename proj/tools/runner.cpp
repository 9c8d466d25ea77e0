#include "runner.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "towlab/dpp.hpp"
#include "towlab/game.hpp"
#include "towlab/io.hpp"
#include "towlab/regularity.hpp"
#include "towlab/verification.hpp"

namespace towlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- small parsing helpers --------------------------------------------------

double get_num(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j[key].get<double>();
}

long get_int(const json& j, const char* key, long fallback, const std::string& where, long min_value) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) throw ConfigError(where + "." + key + ": expected an integer");
  const long v = j[key].get<long>();
  if (v < min_value) throw ConfigError(where + "." + key + ": must be >= " + std::to_string(min_value));
  return v;
}

bool get_bool(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return j[key].get<bool>();
}

const json& section(const json& cfg, const char* key) {
  static const json empty = json::object();
  if (!cfg.contains(key)) return empty;
  if (!cfg[key].is_object()) throw ConfigError(std::string(key) + ": expected an object");
  return cfg[key];
}

double positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + ": must be positive");
  return v;
}

// ---- the parsed plan ----------------------------------------------------------

struct Problem {
  Variant variant = Variant::orthogonal;
  std::optional<Domain> domain;
  std::optional<ExponentField> field;
  std::optional<BoundaryDatum> datum;
  double h = 0.0;  // 0: eps / 2
  DppSetup setup;
  SolveOptions solve;
  std::uint64_t seed = 1;
};

Problem parse_problem(const json& cfg, bool need_domain, bool need_datum, double eps) {
  Problem p;
  if (cfg.contains("variant")) {
    if (!cfg["variant"].is_string()) throw ConfigError("variant: expected a string");
    try {
      p.variant = variant_from_string(cfg["variant"].get<std::string>());
    } catch (const DomainError& e) {
      throw ConfigError(std::string("variant: ") + e.what());
    }
  }
  if (need_domain) {
    if (!cfg.contains("domain")) throw ConfigError("missing key 'domain'");
    p.domain = domain_from_json(cfg["domain"], eps);
  }
  if (!cfg.contains("field")) throw ConfigError("missing key 'field'");
  p.field = field_from_json(cfg["field"]);
  if (p.variant == Variant::fullball && !(p.field->p_min() >= 2.0)) {
    throw ConfigError("field: the fullball variant needs p >= 2");
  }
  if (need_datum) {
    if (!cfg.contains("datum")) throw ConfigError("missing key 'datum'");
    p.datum = datum_from_json(cfg["datum"]);
  }
  const json& grid = section(cfg, "grid");
  check_keys(grid, {"h", "directions", "quad_nodes", "ball_nodes", "sphere_samples"}, {}, "grid");
  if (grid.contains("h")) p.h = positive(get_num(grid, "h", 0.0, "grid"), "grid.h");
  p.setup.variant = p.variant;
  p.setup.directions = static_cast<int>(get_int(grid, "directions", 0, "grid", 0));
  p.setup.quad_nodes = static_cast<int>(get_int(grid, "quad_nodes", 0, "grid", 0));
  p.setup.ball_nodes = static_cast<int>(get_int(grid, "ball_nodes", 0, "grid", 0));
  p.setup.sphere_samples = static_cast<int>(get_int(grid, "sphere_samples", 0, "grid", 0));
  const json& solver = section(cfg, "solver");
  check_keys(solver, {"tol", "max_iter"}, {}, "solver");
  p.solve.tol = get_num(solver, "tol", 0.0, "solver");
  p.solve.max_iter = get_int(solver, "max_iter", 200000, "solver", 1);
  p.seed = static_cast<std::uint64_t>(get_int(cfg, "seed", 1, "config", 0));
  return p;
}

double config_eps(const json& cfg) {
  if (!cfg.contains("epsilon")) throw ConfigError("missing key 'epsilon'");
  return positive(get_num(cfg, "epsilon", 0.0, "config"), "epsilon");
}

Vec get_point(const json& j, const char* key, const Vec& fallback, int dim, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const Vec v = vec_from_json(j[key], where + "." + key);
  if (v.size() != dim) throw ConfigError(where + "." + key + ": dimension mismatch");
  return v;
}

// ---- artifact writing -------------------------------------------------------

struct Artifacts {
  std::map<std::string, std::string> files;  // name -> content
  void add_json(const std::string& name, const json& j) { files[name] = j.dump(2) + "\n"; }
  void add_text(const std::string& name, std::string text) { files[name] = std::move(text); }
  void add_csv(const std::string& name, const std::string& hash, const std::string& body) {
    files[name] = "# config_hash: " + hash + "\n" + body;
  }
};

// Adds the config hash to every record of a JSON-lines block.
std::string hashed_jsonl(const std::string& lines, const std::string& hash, long episode) {
  std::istringstream in(lines);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json rec = json::parse(line);
    rec["episode"] = episode;
    rec["config_hash"] = hash;
    out += rec.dump() + "\n";
  }
  return out;
}

json stamped(json j, const std::string& hash) {
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = hash;
  return j;
}

SolveResult solve_problem(const Problem& p, double eps, GridField& layout_out) {
  const double h = p.h > 0.0 ? p.h : eps / 2.0;
  layout_out = GridField::make(*p.domain, h);
  const DppScheme scheme(layout_out, *p.field, p.setup);
  return solve_fixed_point(*p.datum, layout_out, scheme, p.solve);
}

json solve_summary(const SolveResult& r, const DppScheme* scheme) {
  json j = {{"iterations", r.iterations}, {"converged", r.converged},     {"tol", r.tol},
            {"contraction", r.contraction}, {"error_bound", r.error_bound}, {"residual_history", r.residual_history}};
  if (scheme) j["scheme"] = scheme->to_json();
  return j;
}

// ---- commands -----------------------------------------------------------------
// Each parse_* validates the whole config and returns a runner; the runner
// fills artifacts and reports whether all checks passed.

using Runner = std::function<bool(Artifacts&, json& checks)>;

const std::vector<const char*> kCommonKeys = {"schema_version", "command", "description", "variant", "field", "grid",
                                              "solver", "seed"};

void check_top(const json& cfg, std::initializer_list<const char*> extra) {
  std::vector<std::string> allowed(kCommonKeys.begin(), kCommonKeys.end());
  allowed.insert(allowed.end(), extra.begin(), extra.end());
  for (const auto& [key, value] : cfg.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
}

Runner parse_solve(const json& cfg, const std::string& hash) {
  check_top(cfg, {"epsilon", "domain", "datum"});
  const double eps = config_eps(cfg);
  Problem p = parse_problem(cfg, true, true, eps);
  return [p, eps, hash](Artifacts& art, json& checks) {
    GridField layout = GridField::make(*p.domain, p.h > 0.0 ? p.h : eps / 2.0);
    const DppScheme scheme(layout, *p.field, p.setup);
    const SolveResult r = solve_fixed_point(*p.datum, layout, scheme, p.solve);
    std::ostringstream csv;
    write_field_csv(r.field, csv);
    art.add_csv("field.csv", hash, csv.str());
    json header = field_header(r.field);
    header["epsilon"] = eps;
    header["variant"] = to_string(p.variant);
    header["field"] = p.field->to_json();
    header["datum"] = p.datum->to_json();
    header["solve"] = solve_summary(r, &scheme);
    art.add_json("field.json", stamped(header, hash));
    checks["converged"] = r.converged;
    return r.converged;
  };
}

Runner parse_simulate(const json& cfg, const std::string& hash) {
  check_top(cfg, {"epsilon", "domain", "datum", "simulate"});
  const double eps = config_eps(cfg);
  const json& sim = section(cfg, "simulate");
  check_keys(sim,
             {"game", "episodes", "start", "start_z", "ours", "opp", "player_I", "player_II", "traces", "stop_distance",
              "max_turns", "mode", "doubled_payoff", "compare_solved"},
             {"game", "start"}, "simulate");
  if (!sim["game"].is_string() || (sim["game"] != "single" && sim["game"] != "coupled")) {
    throw ConfigError("simulate.game: \"single\" or \"coupled\"");
  }
  const bool single = sim["game"] == "single";
  Problem p = parse_problem(cfg, true, single, eps);
  const int n = p.domain->dim();
  const long episodes = get_int(sim, "episodes", 10000, "simulate", 100);
  const long traces = get_int(sim, "traces", 0, "simulate", 0);
  const Vec start = get_point(sim, "start", Vec(), n, "simulate");
  GameConfig gc{.variant = p.variant, .domain = *p.domain, .field = *p.field, .g = p.datum, .seed = p.seed};
  gc.stop_distance = get_num(sim, "stop_distance", -1.0, "simulate");
  gc.max_turns = get_int(sim, "max_turns", 100000, "simulate", 1);
  if (sim.contains("mode")) {
    if (sim["mode"] == "announce_then_respond") gc.mode = ResponseMode::announce_then_respond;
    else if (sim["mode"] == "simultaneous") gc.mode = ResponseMode::simultaneous;
    else throw ConfigError("simulate.mode: \"announce_then_respond\" or \"simultaneous\"");
  }

  if (single) {
    if (sim.contains("ours") || sim.contains("opp") || sim.contains("start_z")) {
      throw ConfigError("simulate: ours/opp/start_z belong to the coupled game");
    }
    auto parse_policy = [&](const char* key) -> json {
      if (!sim.contains(key)) return json{{"kind", "greedy"}};
      const json& j = sim[key];
      if (!j.is_object() || !j.contains("kind")) throw ConfigError(std::string("simulate.") + key + ": missing kind");
      if (j["kind"] == "greedy") check_keys(j, {"kind"}, {}, std::string("simulate.") + key);
      else if (j["kind"] == "fixed") {
        check_keys(j, {"kind", "direction"}, {"direction"}, std::string("simulate.") + key);
        const Vec d = vec_from_json(j["direction"], std::string("simulate.") + key + ".direction");
        if (d.size() != n || d.norm() == 0.0) throw ConfigError(std::string("simulate.") + key + ".direction: bad vector");
      } else throw ConfigError(std::string("simulate.") + key + ": kind \"greedy\" or \"fixed\"");
      return j;
    };
    const json pol_I = parse_policy("player_I");
    const json pol_II = parse_policy("player_II");
    const bool compare = get_bool(sim, "compare_solved", true, "simulate");
    return [p, eps, gc, pol_I, pol_II, compare, start, episodes, traces, hash](Artifacts& art, json& checks) {
      GridField layout = GridField::make(*p.domain, p.h > 0.0 ? p.h : eps / 2.0);
      const DppScheme scheme(layout, *p.field, p.setup);
      const SolveResult solved = solve_fixed_point(*p.datum, layout, scheme, p.solve);
      auto make = [&](const json& j, bool maximize) -> Policy {
        if (j["kind"] == "fixed") return fixed_policy(UnitVector::normalized(vec_from_json(j["direction"], "direction")));
        return greedy_policy(solved.field, *p.field, p.variant, scheme.directions(),
                             p.variant == Variant::orthogonal ? scheme.quadrature() : scheme.ball_rule(), maximize);
      };
      const Policy I = make(pol_I, true), II = make(pol_II, false);
      const ValueReport rep = estimate_single_value(gc, I, II, start, episodes);
      json out = {{"game", "single"}, {"start", vec_to_json(start)}, {"report", rep.to_json()}};
      const double sv = solved.field.interpolate(start);
      out["solved_value"] = sv;
      out["solve"] = solve_summary(solved, nullptr);
      const double z = rep.std_error > 0.0 ? (rep.mean - sv) / rep.std_error : (rep.mean == sv ? 0.0 : INFINITY);
      out["z_score"] = std::isfinite(z) ? json(z) : json(nullptr);
      bool ok = rep.reliable;
      checks["reliable"] = rep.reliable;
      if (compare) {
        const bool agree = std::abs(rep.mean - sv) <= 3.0 * rep.std_error;
        checks["agrees_with_solved"] = agree;
        ok = ok && agree;
      }
      art.add_json("value_report.json", stamped(out, hash));
      if (traces > 0) {
        std::string lines;
        for (long k = 0; k < traces; ++k) {
          Rng rng(mix_seed(gc.seed + static_cast<std::uint64_t>(k)));
          const SingleTrace t = play_single(gc, I, II, start, rng, true);
          json rec = {{"episode", k}, {"turns", t.turns}, {"cause", to_string(t.cause)}, {"config_hash", hash}};
          rec["payoff"] = std::isfinite(t.payoff) ? json(t.payoff) : json(nullptr);
          json pos = json::array();
          for (const Vec& x : t.positions) pos.push_back(vec_to_json(x));
          rec["positions"] = pos;
          lines += rec.dump() + "\n";
        }
        art.add_text("traces.jsonl", lines);
      }
      return ok;
    };
  }

  if (sim.contains("player_I") || sim.contains("player_II") || sim.contains("compare_solved")) {
    throw ConfigError("simulate: player_I/player_II/compare_solved belong to the single game");
  }
  const Vec start_z = get_point(sim, "start_z", start, n, "simulate");
  const Strategy ours = sim.contains("ours") ? strategy_from_json(sim["ours"]) : Strategy::pull_together();
  const Strategy opp = sim.contains("opp") ? strategy_from_json(sim["opp"]) : Strategy::pull_together();
  if (sim.contains("doubled_payoff")) {
    gc.doubled_payoff = get_num(sim, "doubled_payoff", 0.0, "simulate");
  } else {
    if (!cfg.contains("datum")) throw ConfigError("simulate: coupled game needs 'datum' or 'simulate.doubled_payoff'");
    const BoundaryDatum g = datum_from_json(cfg["datum"]);
    gc.doubled_payoff = doubled_payoff_bound(g, *p.domain, p.h > 0.0 ? p.h : eps / 2.0);
  }
  return [gc, ours, opp, start, start_z, episodes, traces, hash](Artifacts& art, json& checks) {
    const ValueReport rep = estimate_value(gc, ours, opp, start, start_z, episodes);
    json out = {{"game", "coupled"},
                {"start", vec_to_json(start)},
                {"start_z", vec_to_json(start_z)},
                {"ours", ours.to_json()},
                {"opp", opp.to_json()},
                {"doubled_payoff", gc.doubled_payoff},
                {"stop_distance", gc.stop()},
                {"report", rep.to_json()}};
    art.add_json("value_report.json", stamped(out, hash));
    if (traces > 0) {
      std::string lines;
      for (long k = 0; k < traces; ++k) {
        Rng rng(mix_seed(gc.seed + static_cast<std::uint64_t>(k)));
        lines += hashed_jsonl(trace_jsonl(play_episode(gc, ours, opp, start, start_z, rng, true)), hash, k);
      }
      art.add_text("traces.jsonl", lines);
    }
    checks["reliable"] = rep.reliable;
    return rep.reliable;
  };
}

Runner parse_verify(const json& cfg, const std::string& hash) {
  check_top(cfg, {"epsilon", "verify"});
  const json& ver = section(cfg, "verify");
  check_keys(ver, {"checks", "recipe", "params", "count", "annular_count", "dim", "quad_nodes", "eps_fraction", "t_min",
                   "t_max", "center", "threads"},
             {"checks"}, "verify");
  if (ver.contains("recipe") == ver.contains("params")) throw ConfigError("verify: give exactly one of recipe, params");
  const ComparisonParams params =
      ver.contains("recipe") ? constants_recipe(recipe_from_json(ver["recipe"])) : params_from_json(ver["params"]);
  if (!ver["checks"].is_array() || ver["checks"].empty()) throw ConfigError("verify.checks: non-empty array");
  std::vector<std::string> names;
  for (const auto& c : ver["checks"]) {
    if (!c.is_string()) throw ConfigError("verify.checks: strings");
    const std::string s = c.get<std::string>();
    if (s != "taylor" && s != "case1" && s != "case2" && s != "annular" && s != "admissibility") {
      throw ConfigError("verify.checks: unknown check '" + s + "'");
    }
    names.push_back(s);
  }
  double eps = 0.0;
  if (cfg.contains("epsilon")) {
    if (ver.contains("eps_fraction")) throw ConfigError("verify: give epsilon or verify.eps_fraction, not both");
    eps = config_eps(cfg);
  } else {
    const double frac = positive(get_num(ver, "eps_fraction", 0.3, "verify"), "verify.eps_fraction");
    if (frac >= 1.0) throw ConfigError("verify.eps_fraction: must be < 1");
    eps = frac * params.omega1 * 10.0 / static_cast<double>(params.N);
  }
  Problem p = parse_problem(cfg, false, false, eps);
  BatchOptions bo;
  bo.dim = static_cast<int>(get_int(ver, "dim", 2, "verify", 2));
  bo.count = get_int(ver, "count", 10000, "verify", 1);
  bo.seed = p.seed;
  bo.t_min = get_num(ver, "t_min", 0.0, "verify");
  bo.t_max = get_num(ver, "t_max", 0.0, "verify");
  bo.threads = static_cast<int>(get_int(ver, "threads", 0, "verify", 0));
  bo.center = get_point(ver, "center", Vec::Zero(bo.dim), bo.dim, "verify");
  const long annular_count = get_int(ver, "annular_count", 1, "verify", 1);
  const int qn = static_cast<int>(get_int(ver, "quad_nodes", 16, "verify", 2));
  if (qn % 2) throw ConfigError("verify.quad_nodes: must be even");
  return [params, eps, p, bo, annular_count, qn, names, hash](Artifacts& art, json& checks) {
    const ComparisonFunction cf(params, eps);
    const QuadratureRule rule = p.variant == Variant::orthogonal ? ball_quadrature(bo.dim, qn)
                                                                 : full_ball_quadrature(bo.dim, std::max(qn, 64));
    json out = {{"params", params.to_json()}, {"epsilon", eps}, {"variant", to_string(p.variant)},
                {"field", p.field->to_json()}};
    json batches = json::object();
    bool ok = true;
    for (const std::string& name : names) {
      if (name == "admissibility") {
        json preds = json::array();
        bool all = true;
        for (const Predicate& q : admissibility(params)) {
          preds.push_back({{"name", q.name}, {"lhs", q.lhs}, {"rhs", q.rhs}, {"ok", q.ok}});
          all = all && q.ok;
        }
        batches[name] = {{"predicates", preds}, {"ok", all}};
        checks[name] = all;
        ok = ok && all;
        continue;
      }
      BatchSummary s;
      if (name == "taylor") s = taylor_batch(cf, bo);
      else if (name == "case1") s = case1_batch(cf, *p.field, p.variant, rule, bo);
      else if (name == "case2") s = case2_batch(cf, *p.field, p.variant, rule, bo);
      else {
        BatchOptions ao = bo;
        ao.count = annular_count;
        s = annular_batch(cf, *p.field, p.variant, rule, ao);
      }
      batches[name] = s.to_json();
      checks[name] = s.ok();
      ok = ok && s.ok();
    }
    out["checks"] = batches;
    art.add_json("verify_report.json", stamped(out, hash));
    return ok;
  };
}

ModulusOptions parse_modulus(const json& j, const std::string& where, std::uint64_t seed) {
  ModulusOptions m;
  m.random_pairs = get_int(j, "random_pairs", 20000, where, 1000);
  m.seed = seed;
  m.keep_scatter = get_bool(j, "scatter", false, where);
  return m;
}

std::string scatter_csv(const ModulusReport& m) {
  std::ostringstream os;
  os.precision(17);
  os << "dist,diff\n";
  for (const PairSample& s : m.scatter) os << s.dist << ',' << s.diff << '\n';
  return os.str();
}

Runner parse_measure(const json& cfg, const std::string& hash) {
  check_top(cfg, {"epsilon", "domain", "datum", "measure"});
  const double eps = config_eps(cfg);
  Problem p = parse_problem(cfg, true, true, eps);
  const json& mea = section(cfg, "measure");
  check_keys(mea, {"center", "r", "random_pairs", "scatter", "gap", "recipe", "params"}, {"r"}, "measure");
  const int n = p.domain->dim();
  const Vec center = get_point(mea, "center", p.domain->center(), n, "measure");
  const double r = positive(get_num(mea, "r", 0.0, "measure"), "measure.r");
  const ModulusOptions mo = parse_modulus(mea, "measure", p.seed);
  const bool gap = get_bool(mea, "gap", true, "measure");
  if (mea.contains("recipe") && mea.contains("params")) throw ConfigError("measure: give at most one of recipe, params");
  std::optional<ComparisonParams> fixed;
  if (mea.contains("recipe")) fixed = constants_recipe(recipe_from_json(mea["recipe"]));
  if (mea.contains("params")) fixed = params_from_json(mea["params"]);
  return [p, eps, center, r, mo, gap, fixed, hash](Artifacts& art, json& checks) {
    GridField layout = GridField::make(*p.domain, p.h > 0.0 ? p.h : eps / 2.0);
    const SolveResult solved = solve_problem(p, eps, layout);
    const ModulusReport m = lipschitz_modulus(solved.field, center, r, mo);
    json out = {{"epsilon", eps}, {"center", vec_to_json(center)}, {"r", r}, {"modulus", m.to_json()},
                {"solve", solve_summary(solved, nullptr)}};
    bool ok = solved.converged;
    checks["converged"] = solved.converged;
    if (gap) {
      const ComparisonParams params =
          fixed ? *fixed : constants_recipe(recipe_inputs(*p.field, p.variant, p.domain->dim(), r, m));
      const GapReport g = gap_K(solved.field, ComparisonFunction(params, eps), center, r);
      out["params"] = params.to_json();
      out["gap"] = g.to_json();
      checks["gap"] = g.pass;
      ok = ok && g.pass;
    }
    art.add_json("modulus_report.json", stamped(out, hash));
    if (mo.keep_scatter) art.add_csv("scatter.csv", hash, scatter_csv(m));
    return ok;
  };
}

Runner parse_sweep(const json& cfg, const std::string& hash) {
  check_top(cfg, {"eps_list", "domain", "datum", "sweep"});
  if (!cfg.contains("eps_list") || !cfg["eps_list"].is_array() || cfg["eps_list"].empty()) {
    throw ConfigError("eps_list: non-empty array of decreasing positive numbers");
  }
  std::vector<double> eps_list;
  for (const auto& e : cfg["eps_list"]) {
    if (!e.is_number() || !(e.get<double>() > 0.0)) throw ConfigError("eps_list: positive numbers");
    if (!eps_list.empty() && !(e.get<double>() < eps_list.back())) throw ConfigError("eps_list: must be decreasing");
    eps_list.push_back(e.get<double>());
  }
  Problem p = parse_problem(cfg, true, true, eps_list.front());
  // every scale must give a valid domain
  for (double e : eps_list) domain_from_json(cfg["domain"], e);
  if (p.h > 0.0) throw ConfigError("grid.h: the sweep always uses h = eps / 2");
  const json& sw = section(cfg, "sweep");
  check_keys(sw, {"center", "r", "random_pairs", "gap", "warm_start", "max_ratio"}, {"r"}, "sweep");
  SweepProblem sp{.domain = *p.domain, .field = *p.field, .g = *p.datum, .setup = p.setup};
  sp.tol = p.solve.tol;
  sp.max_iter = p.solve.max_iter;
  sp.center = get_point(sw, "center", p.domain->center(), p.domain->dim(), "sweep");
  sp.r = positive(get_num(sw, "r", 0.0, "sweep"), "sweep.r");
  sp.modulus = parse_modulus(sw, "sweep", p.seed);
  sp.modulus.keep_scatter = false;
  sp.gap = get_bool(sw, "gap", true, "sweep");
  sp.warm_start = get_bool(sw, "warm_start", true, "sweep");
  const double max_ratio = positive(get_num(sw, "max_ratio", 1.2, "sweep"), "sweep.max_ratio");
  return [sp, eps_list, max_ratio, hash](Artifacts& art, json& checks) {
    const SweepResult res = scale_sweep(sp, eps_list);
    json out = res.to_json();
    // wall-clock time stays out of the report so that reruns are byte-identical
    for (auto& row : out["rows"]) row.erase("seconds");
    out["max_ratio"] = max_ratio;
    bool conv = true, ratios = true, gaps = true;
    for (const SweepRow& row : res.rows) {
      conv = conv && row.converged;
      if (row.gap) gaps = gaps && row.gap->pass;
    }
    for (double q : res.ratios) ratios = ratios && q <= max_ratio;
    checks["converged"] = conv;
    checks["ratios"] = ratios;
    if (sp.gap) checks["gap"] = gaps;
    art.add_json("sweep_report.json", stamped(out, hash));
    std::ostringstream csv;
    csv.precision(17);
    csv << "epsilon,L,ratio\n";
    for (std::size_t k = 0; k < res.rows.size(); ++k) {
      csv << res.rows[k].epsilon << ',' << res.rows[k].modulus.L << ',';
      if (k > 0) csv << res.ratios[k - 1];
      csv << '\n';
    }
    art.add_csv("ratios.csv", hash, csv.str());
    return conv && ratios && gaps;
  };
}

}  // namespace

json load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

int run(const std::string& command, const json& config, const fs::path& out_dir, const std::string& timestamp,
        std::string& message) {
  Runner runner;
  std::string hash;
  try {
    if (!config.is_object()) throw ConfigError("config: expected a JSON object");
    if (!config.contains("schema_version") || config["schema_version"] != kSchemaVersion) {
      throw ConfigError("config: schema_version must be " + std::to_string(kSchemaVersion));
    }
    if (config.contains("command") && config["command"] != command) {
      throw ConfigError("config: command '" + config["command"].dump() + "' does not match subcommand '" + command + "'");
    }
    hash = config_hash(config);
    if (command == "solve") runner = parse_solve(config, hash);
    else if (command == "simulate") runner = parse_simulate(config, hash);
    else if (command == "verify") runner = parse_verify(config, hash);
    else if (command == "measure") runner = parse_measure(config, hash);
    else if (command == "sweep") runner = parse_sweep(config, hash);
    else throw ConfigError("unknown subcommand '" + command + "'");
  } catch (const ConfigError& e) {
    message = json{{"status", "config_error"}, {"error", e.what()}}.dump();
    return kConfigError;
  } catch (const json::exception& e) {
    message = json{{"status", "config_error"}, {"error", e.what()}}.dump();
    return kConfigError;
  } catch (const std::logic_error& e) {
    // DomainError / DimensionMismatch raised while building config objects
    message = json{{"status", "config_error"}, {"error", e.what()}}.dump();
    return kConfigError;
  }

  Artifacts art;
  json checks = json::object();
  bool ok = false;
  std::string failure;
  try {
    ok = runner(art, checks);
  } catch (const std::exception& e) {
    ok = false;
    failure = e.what();
  }
  art.add_json("config.json", {{"schema_version", kSchemaVersion}, {"config_hash", hash}, {"config", config}});
  if (!ok) {
    json f = {{"status", "check_failed"}, {"checks", checks}, {"config_hash", hash}};
    if (!failure.empty()) f["error"] = failure;
    art.add_json("failure.json", f);
  }

  fs::create_directories(out_dir);
  json listing = json::array();
  for (const auto& [name, content] : art.files) {
    std::ofstream os(out_dir / name, std::ios::binary);
    os << content;
    listing.push_back(name);
  }
  json manifest = {{"schema_version", kSchemaVersion}, {"command", command},   {"config_hash", hash},
                   {"timestamp", timestamp},           {"artifacts", listing}, {"checks", checks},
                   {"exit_code", ok ? kOk : kCheckFailed}};
  std::ofstream(out_dir / "run_manifest.json") << manifest.dump(2) << "\n";
  message = json{{"status", ok ? "ok" : "check_failed"}, {"checks", checks}, {"out", out_dir.string()}}.dump();
  if (!failure.empty()) message = json{{"status", "check_failed"}, {"error", failure}}.dump();
  return ok ? kOk : kCheckFailed;
}

}  // namespace towlab::cli
