#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "towlab/coefficients.hpp"
#include "towlab/comparison.hpp"
#include "towlab/game.hpp"
#include "towlab/grid.hpp"

namespace towlab {

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejects keys outside `allowed` and reports missing `required` keys.
void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                std::initializer_list<const char*> required, const std::string& where);

Vec vec_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json vec_to_json(const Vec& v);

/// {"kind": "box", "lower": [..], "upper": [..]} | {"kind": "box", "center", "half_widths"} |
/// {"kind": "ball", "center", "radius"}
Domain domain_from_json(const nlohmann::json& j, double epsilon);
/// {"kind": "constant", "p": number | "inf"} | {"kind": "affine", "p0", "gradient", "center", "radius", "s"?} |
/// {"kind": "radial_holder", "p0", "amp", "center", "s"}
ExponentField field_from_json(const nlohmann::json& j);
/// {"kind": "constant", "c"} | {"kind": "affine", "c0", "gradient"} | {"kind": "quadratic_harmonic", "scale"?} |
/// {"kind": "polynomial", "terms": [{"coef", "powers"}]} |
/// {"kind": "table", "origin", "h", "counts", "values"} (multilinear, clamped to the table hull)
BoundaryDatum datum_from_json(const nlohmann::json& j);
Strategy strategy_from_json(const nlohmann::json& j);
RecipeInputs recipe_from_json(const nlohmann::json& j);
/// Explicit constants: s, omega0, C, M, N, r, c_alpha, alpha_min, sup_u, C_u, delta.
ComparisonParams params_from_json(const nlohmann::json& j);

/// 64-bit FNV-1a of the bytes, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
/// Hash of the canonical (sorted-key, compact) dump.
std::string config_hash(const nlohmann::json& config);

/// CSV: index, x1..xn, region, value; full double precision.
void write_field_csv(const GridField& u, std::ostream& out);
/// Metadata sidecar for a field CSV.
nlohmann::json field_header(const GridField& u);
/// Reads the value column of a CSV written by write_field_csv.
std::vector<double> read_field_values(std::istream& in);

}  // namespace towlab
