#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace towlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

/// Raised when an argument violates a mathematical precondition
/// (p <= 1, negative radius, parallel rotation vectors, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An evaluation point left the lattice hull, i.e. the boundary strip is too
/// thin for the requested step.
class StripError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Internal invariant broken (round-off beyond the documented clamp,
/// maximum principle violated, ...). Indicates a bug, not bad input.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// splitmix64 finalizer; used to derive independent per-episode seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline void require_same_dim(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(what) + ": dimension mismatch (" +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
}

}  // namespace towlab
