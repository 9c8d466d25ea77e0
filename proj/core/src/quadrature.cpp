#include "towlab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "towlab/geometry.hpp"

namespace towlab {

namespace {

constexpr std::array<int, 16> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// `half` Halton points inside the open unit d-ball (skipping a neighborhood
// of the origin when `min_radius` > 0), followed by their negatives.
Mat symmetric_halton_ball(int d, int half, double min_radius) {
  if (d > static_cast<int>(kPrimes.size())) {
    throw DomainError("quadrature: dimension too large for the Halton generator");
  }
  Mat pts(d, 2 * half);
  int filled = 0;
  for (std::uint64_t i = 1; filled < half; ++i) {
    Vec p(d);
    for (int k = 0; k < d; ++k) p[k] = 2.0 * radical_inverse(i, kPrimes[k]) - 1.0;
    const double r = p.norm();
    if (r >= 1.0 || r < min_radius) continue;
    pts.col(filled) = p;
    pts.col(half + filled) = -p;
    ++filled;
  }
  return pts;
}

// Largest divisor of m that is a multiple of 4 and closest (in ratio) to
// target.
int pick_sectors(int m, double target) {
  int best = 4;
  double best_score = std::abs(std::log(4.0 / target));
  for (int j = 8; j <= m; j += 4) {
    if (m % j != 0) continue;
    const double score = std::abs(std::log(j / target));
    if (score < best_score) {
      best = j;
      best_score = score;
    }
  }
  return best;
}

// Equal-area polar rings on the unit disk: K rings of J sectors. Odd rings are
// staggered by half a sector; the node set is invariant under quarter turns.
Mat polar_rings(int m) {
  const int sectors = pick_sectors(m, 2.1 * std::sqrt(static_cast<double>(m)));
  const int rings = m / sectors;
  Mat pts(2, m);
  int c = 0;
  for (int k = 0; k < rings; ++k) {
    const double radius = std::sqrt((k + 0.5) / rings);
    const double shift = (k % 2 == 1) ? 0.5 : 0.0;
    // second half of each ring: exact negatives of the first
    for (int j = 0; j < sectors / 2; ++j) {
      const double th = 2.0 * std::numbers::pi * (j + shift) / sectors;
      pts(0, c + j) = radius * std::cos(th);
      pts(1, c + j) = radius * std::sin(th);
      pts.col(c + sectors / 2 + j) = -pts.col(c + j);
    }
    c += sectors;
  }
  return pts;
}

QuadratureRule equal_weights(Mat nodes) {
  QuadratureRule rule;
  const auto count = nodes.cols();
  rule.nodes = std::move(nodes);
  rule.weights.assign(static_cast<std::size_t>(count), 1.0 / static_cast<double>(count));
  return rule;
}

}  // namespace

QuadratureRule ball_quadrature(int n, int m) {
  if (n < 2) throw DomainError("ball_quadrature: n must be at least 2");
  if (m < 2 || m % 2 != 0) throw DomainError("ball_quadrature: m must be even and >= 2");

  Mat nodes = Mat::Zero(n, m);
  if (n == 2) {
    for (int k = 0; k < m / 2; ++k) {
      nodes(1, k) = -1.0 + (2.0 * k + 1.0) / m;
      nodes(1, m - 1 - k) = -nodes(1, k);
    }
  } else if (n == 3 && m % 4 == 0) {
    nodes.bottomRows(2) = polar_rings(m);
  } else {
    nodes.bottomRows(n - 1) = symmetric_halton_ball(n - 1, m / 2, 0.0);
  }
  return equal_weights(std::move(nodes));
}

QuadratureRule full_ball_quadrature(int n, int m) {
  if (n < 2) throw DomainError("full_ball_quadrature: n must be at least 2");
  if (m < 4) throw DomainError("full_ball_quadrature: m must be at least 4");

  if (n == 2) {
    return equal_weights(polar_rings(((m + 3) / 4) * 4));
  }
  if (n == 3) {
    const double a = 1.0 / std::sqrt(2.0);
    const double b = 1.0 / std::sqrt(3.0);
    std::vector<std::array<double, 4>> sphere;  // x, y, z, weight
    for (int axis = 0; axis < 3; ++axis) {
      for (double sgn : {1.0, -1.0}) {
        std::array<double, 4> p{0.0, 0.0, 0.0, 1.0 / 21.0};
        p[axis] = sgn;
        sphere.push_back(p);
      }
    }
    for (int skip = 0; skip < 3; ++skip) {
      for (double s1 : {1.0, -1.0}) {
        for (double s2 : {1.0, -1.0}) {
          std::array<double, 4> p{0.0, 0.0, 0.0, 4.0 / 105.0};
          int used = 0;
          for (int k = 0; k < 3; ++k) {
            if (k == skip) continue;
            p[k] = (used++ == 0 ? s1 : s2) * a;
          }
          sphere.push_back(p);
        }
      }
    }
    for (double s1 : {1.0, -1.0})
      for (double s2 : {1.0, -1.0})
        for (double s3 : {1.0, -1.0}) sphere.push_back({s1 * b, s2 * b, s3 * b, 9.0 / 280.0});

    const int shells = std::max(1, static_cast<int>(std::lround(m / 26.0)));
    const int count = shells * static_cast<int>(sphere.size());
    QuadratureRule rule;
    rule.nodes.resize(3, count);
    rule.weights.reserve(static_cast<std::size_t>(count));
    int c = 0;
    for (int k = 0; k < shells; ++k) {
      const double radius = std::cbrt((k + 0.5) / shells);
      for (const auto& p : sphere) {
        rule.nodes.col(c++) = radius * Eigen::Vector3d(p[0], p[1], p[2]);
        rule.weights.push_back(p[3] / shells);
      }
    }
    return rule;
  }
  return equal_weights(symmetric_halton_ball(n, (m + 1) / 2, 0.0));
}

DirectionSet direction_set(int n, int m) {
  if (n < 2) throw DomainError("direction_set: n must be at least 2");
  if (m < 2 || m % 2 != 0) throw DomainError("direction_set: m must be even and >= 2");

  DirectionSet set;
  set.dirs.resize(n, m);
  const int half = m / 2;
  if (n == 2) {
    for (int k = 0; k < half; ++k) {
      const double th = 2.0 * std::numbers::pi * k / m;
      set.dirs(0, k) = std::cos(th);
      set.dirs(1, k) = std::sin(th);
      set.dirs.col(half + k) = -set.dirs.col(k);
    }
    set.covering_angle = std::numbers::pi / m;
    return set;
  }
  if (n == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < half; ++k) {
      const double z = (k + 0.5) / half;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * k;
      Eigen::Vector3d d(rho * std::cos(phi), rho * std::sin(phi), z);
      set.dirs.col(k) = d;
      set.dirs.col(half + k) = -d;
    }
  } else {
    Mat pts = symmetric_halton_ball(n, half, 0.05);
    for (int k = 0; k < m; ++k) pts.col(k).normalize();
    set.dirs = std::move(pts);
  }

  // Covering radius estimated from a fixed probe sample.
  Rng rng(0x5eed0f0d1e5ULL + static_cast<std::uint64_t>(n));
  double worst = 0.0;
  for (int probe = 0; probe < 4096; ++probe) {
    const Vec q = sample_unit_sphere(n, rng);
    const double best = (set.dirs.transpose() * q).maxCoeff();
    worst = std::max(worst, std::acos(std::clamp(best, -1.0, 1.0)));
  }
  set.covering_angle = worst;
  return set;
}

}  // namespace towlab
