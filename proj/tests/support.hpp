#pragma once

#include "retarder/jones.hpp"
#include "retarder/sequence.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace retarder::testing {

inline double max_abs_diff(const Mat2& a, const Mat2& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

inline Mat2 random_su2(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Complex<double> a(n(rng), n(rng)), b(n(rng), n(rng));
  const double s = std::sqrt(std::norm(a) + std::norm(b));
  a /= s;
  b /= s;
  Mat2 m;
  m << a, b, -std::conj(b), std::conj(a);
  return m;
}

inline Angle random_angle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 360.0);
  return Angle::from_degrees(u(rng));
}

/// Random stack of 1..8 plates of mixed kinds, optionally folded at a mirror.
inline SequenceSpec random_stack(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 8), coin(0, 1);
  SequenceSpec seq;
  const int n = count(rng);
  for (int k = 0; k < n; ++k)
    seq.plates.push_back({coin(rng) ? PlateKind::half : PlateKind::quarter,
                          random_angle(rng)});
  seq.mirrored = coin(rng) == 1;
  return seq;
}

/// Random family-(a) stack with an odd number of half plates.
inline SequenceSpec random_family_a(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> half_count(1, 7);
  const int n = 2 * half_count(rng) - 1;
  std::vector<Angle> angles;
  for (int k = 0; k < n; ++k) angles.push_back(random_angle(rng));
  return build_sequence(Family::a, angles);
}

inline std::string data_path(const std::string& file) {
  return std::string(RETARDER_DATA_DIR) + "/" + file;
}

}  // namespace retarder::testing
