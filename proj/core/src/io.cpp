#include "towlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

namespace towlab {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                std::initializer_list<const char*> required, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
  for (const char* r : required) {
    if (!j.contains(r)) throw ConfigError(where + ": missing key '" + std::string(r) + "'");
  }
}

Vec vec_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": expected numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

nlohmann::json vec_to_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

namespace {

double num(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

double num_or(const nlohmann::json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? num(j, key, where) : fallback;
}

std::string kind_of(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError(where + ": missing string 'kind'");
  }
  return j["kind"].get<std::string>();
}

double p_value(const nlohmann::json& v, const std::string& where) {
  if (v.is_string() && (v == "inf" || v == "infinity")) return kInfinity;
  if (!v.is_number()) throw ConfigError(where + ": p must be a number or \"inf\"");
  return v.get<double>();
}

}  // namespace

Domain domain_from_json(const nlohmann::json& j, double epsilon) {
  const std::string w = "domain";
  const std::string kind = kind_of(j, w);
  try {
    if (kind == "box") {
      if (j.contains("lower")) {
        check_keys(j, {"kind", "lower", "upper"}, {"lower", "upper"}, w);
        return Domain::box_from_corners(vec_from_json(j["lower"], w + ".lower"), vec_from_json(j["upper"], w + ".upper"),
                                        epsilon);
      }
      check_keys(j, {"kind", "center", "half_widths"}, {"center", "half_widths"}, w);
      return Domain::box(vec_from_json(j["center"], w + ".center"), vec_from_json(j["half_widths"], w + ".half_widths"),
                         epsilon);
    }
    if (kind == "ball") {
      check_keys(j, {"kind", "center", "radius"}, {"center", "radius"}, w);
      return Domain::ball(vec_from_json(j["center"], w + ".center"), num(j, "radius", w), epsilon);
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  } catch (const DimensionMismatch& e) {
    throw ConfigError(std::string("domain: ") + e.what());
  }
  throw ConfigError("domain: unknown kind '" + kind + "'");
}

ExponentField field_from_json(const nlohmann::json& j) {
  const std::string w = "field";
  const std::string kind = kind_of(j, w);
  try {
    if (kind == "constant") {
      check_keys(j, {"kind", "p"}, {"p"}, w);
      return ExponentField::constant(p_value(j["p"], w));
    }
    if (kind == "affine") {
      check_keys(j, {"kind", "p0", "gradient", "center", "radius", "s"}, {"p0", "gradient", "center", "radius"}, w);
      return ExponentField::affine(num(j, "p0", w), vec_from_json(j["gradient"], w + ".gradient"),
                                   vec_from_json(j["center"], w + ".center"), num(j, "radius", w), num_or(j, "s", 1.0, w));
    }
    if (kind == "radial_holder") {
      check_keys(j, {"kind", "p0", "amp", "center", "s"}, {"p0", "amp", "center", "s"}, w);
      return ExponentField::radial_holder(num(j, "p0", w), num(j, "amp", w), vec_from_json(j["center"], w + ".center"),
                                          num(j, "s", w));
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("field: ") + e.what());
  }
  throw ConfigError("field: unknown kind '" + kind + "'");
}

BoundaryDatum datum_from_json(const nlohmann::json& j) {
  const std::string w = "datum";
  const std::string kind = kind_of(j, w);
  if (kind == "constant") {
    check_keys(j, {"kind", "c"}, {"c"}, w);
    return BoundaryDatum::constant(num(j, "c", w));
  }
  if (kind == "affine") {
    check_keys(j, {"kind", "c0", "gradient"}, {"c0", "gradient"}, w);
    return BoundaryDatum::affine(num(j, "c0", w), vec_from_json(j["gradient"], w + ".gradient"));
  }
  if (kind == "quadratic_harmonic") {
    check_keys(j, {"kind", "scale"}, {}, w);
    return BoundaryDatum::quadratic_harmonic(num_or(j, "scale", 1.0, w));
  }
  if (kind == "polynomial") {
    check_keys(j, {"kind", "terms"}, {"terms"}, w);
    if (!j["terms"].is_array() || j["terms"].empty()) throw ConfigError("datum.terms: expected a non-empty array");
    std::vector<BoundaryDatum::Term> terms;
    for (const auto& t : j["terms"]) {
      check_keys(t, {"coef", "powers"}, {"coef", "powers"}, "datum.terms[]");
      if (!t["powers"].is_array()) throw ConfigError("datum.terms[].powers: expected an array");
      std::vector<int> powers;
      for (const auto& q : t["powers"]) {
        if (!q.is_number_integer() || q.get<int>() < 0) throw ConfigError("datum.terms[].powers: nonnegative integers");
        powers.push_back(q.get<int>());
      }
      terms.push_back({num(t, "coef", "datum.terms[]"), std::move(powers)});
    }
    return BoundaryDatum::polynomial(std::move(terms));
  }
  if (kind == "table") {
    check_keys(j, {"kind", "origin", "h", "counts", "values"}, {"origin", "h", "counts", "values"}, w);
    const Vec origin = vec_from_json(j["origin"], w + ".origin");
    const double h = num(j, "h", w);
    std::vector<int> counts;
    for (const auto& c : j["counts"]) {
      if (!c.is_number_integer() || c.get<int>() < 2) throw ConfigError("datum.counts: integers >= 2");
      counts.push_back(c.get<int>());
    }
    if (counts.size() != static_cast<std::size_t>(origin.size())) throw ConfigError("datum: counts/origin dimension");
    if (!(h > 0.0)) throw ConfigError("datum: h must be positive");
    auto lat = std::make_shared<Lattice>(origin, h, counts);
    const Vec vals = vec_from_json(j["values"], w + ".values");
    if (static_cast<std::size_t>(vals.size()) != lat->size()) throw ConfigError("datum: values size must match counts");
    auto values = std::make_shared<std::vector<double>>(vals.data(), vals.data() + vals.size());
    BoundaryDatum::Fn fn = [lat, values](const Vec& x) {
      Vec y = x;
      for (int k = 0; k < lat->dim(); ++k) {
        const double hi = lat->origin()[k] + lat->h() * (lat->counts()[static_cast<std::size_t>(k)] - 1);
        y[k] = std::clamp(y[k], lat->origin()[k], hi);
      }
      thread_local std::vector<std::int32_t> idx;
      thread_local std::vector<double> wts;
      lat->stencil(y, idx, wts);
      double acc = 0.0;
      for (std::size_t i = 0; i < idx.size(); ++i) acc += wts[i] * (*values)[static_cast<std::size_t>(idx[i])];
      return acc;
    };
    return BoundaryDatum::custom(std::move(fn), "table");
  }
  throw ConfigError("datum: unknown kind '" + kind + "'");
}

Strategy strategy_from_json(const nlohmann::json& j) {
  const std::string w = "strategy";
  const std::string kind = kind_of(j, w);
  if (kind == "pull_together" || kind == "responder_wrapper") check_keys(j, {"kind"}, {}, w);
  else if (kind == "slight_turn") check_keys(j, {"kind", "scale", "power"}, {}, w);
  else if (kind == "threshold_angle") check_keys(j, {"kind", "s"}, {"s"}, w);
  else if (kind == "fixed_direction") check_keys(j, {"kind", "dx", "dz"}, {"dx", "dz"}, w);
  else throw ConfigError("strategy: unknown kind '" + kind + "'");
  try {
    return Strategy::from_json(j);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("strategy: ") + e.what());
  }
}

RecipeInputs recipe_from_json(const nlohmann::json& j) {
  const std::string w = "recipe";
  check_keys(j, {"s", "c_alpha", "alpha_min", "r", "sup_u", "C_u", "delta"},
             {"s", "c_alpha", "alpha_min", "r", "sup_u", "C_u", "delta"}, w);
  return {num(j, "s", w), num(j, "c_alpha", w), num(j, "alpha_min", w), num(j, "r", w),
          num(j, "sup_u", w), num(j, "C_u", w), num(j, "delta", w)};
}

ComparisonParams params_from_json(const nlohmann::json& j) {
  const std::string w = "params";
  // gamma, omega1, log10_C_pow_2N and binding are derived; accepted so that a
  // report's params block reads back, and checked against the recomputation.
  check_keys(j,
             {"s", "omega0", "C", "M", "N", "r", "c_alpha", "alpha_min", "sup_u", "C_u", "delta", "omega_offset",
              "gamma", "omega1", "log10_C_pow_2N", "binding"},
             {"s", "omega0", "C", "M", "N", "r", "alpha_min"}, w);
  ComparisonParams p;
  p.s = num(j, "s", w);
  p.omega0 = num(j, "omega0", w);
  p.C = num(j, "C", w);
  p.M = num(j, "M", w);
  if (!j["N"].is_number_integer() || j["N"].get<long>() < 1) throw ConfigError("params.N: positive integer");
  p.N = j["N"].get<long>();
  p.r = num(j, "r", w);
  p.c_alpha = num_or(j, "c_alpha", 0.0, w);
  p.alpha_min = num(j, "alpha_min", w);
  p.sup_u = num_or(j, "sup_u", 0.0, w);
  p.C_u = num_or(j, "C_u", 0.0, w);
  p.delta = num_or(j, "delta", 1.0, w);
  p.omega_offset = num_or(j, "omega_offset", 0.0, w);
  try {
    p.finalize();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  const nlohmann::json derived = p.to_json();
  for (const char* key : {"gamma", "omega1", "log10_C_pow_2N"}) {
    if (!j.contains(key)) continue;
    const double given = num(j, key, w);
    const double want = derived[key].get<double>();
    if (std::abs(given - want) > 1e-12 * std::max(1.0, std::abs(want))) {
      throw ConfigError("params." + std::string(key) + ": inconsistent with the other constants");
    }
  }
  return p;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const nlohmann::json& config) { return fnv1a_hex(config.dump()); }

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_field_csv(const GridField& u, std::ostream& out) {
  const int n = u.lattice().dim();
  out << "index";
  for (int k = 1; k <= n; ++k) out << ",x" << k;
  out << ",region,value\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec p = u.point(i);
    out << i;
    for (int k = 0; k < n; ++k) out << ',' << fmt(p[k]);
    out << ',' << (u.region(i) == Region::interior ? "interior" : "strip") << ',' << fmt(u[i]) << '\n';
  }
}

nlohmann::json field_header(const GridField& u) {
  const Lattice& lat = u.lattice();
  return {{"schema_version", kSchemaVersion},
          {"domain", u.domain().to_json()},
          {"lattice", {{"origin", vec_to_json(lat.origin())}, {"h", lat.h()}, {"counts", lat.counts()}}},
          {"nodes", u.size()},
          {"interior_nodes", u.interior().size()},
          {"columns", "index,x1..xn,region,value"}};
}

std::vector<double> read_field_values(std::istream& in) {
  std::string line;
  // leading '#' lines carry metadata (config hash)
  do {
    if (!std::getline(in, line)) throw ConfigError("field csv: empty input");
  } while (!line.empty() && line.front() == '#');
  std::vector<double> out;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto pos = line.rfind(',');
    if (pos == std::string::npos) throw ConfigError("field csv: malformed line");
    out.push_back(std::stod(line.substr(pos + 1)));
  }
  return out;
}

}  // namespace towlab
