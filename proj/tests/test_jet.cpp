#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "retarder/jet.hpp"
#include "support.hpp"

using namespace retarder;
using retarder::testing::max_abs_diff;

namespace {
constexpr double pi = std::numbers::pi;
const Complex<double> I(0, 1);

SequenceSpec single_half(double theta_deg = 0) {
  SequenceSpec s;
  s.plates = {{PlateKind::half, Angle::from_degrees(theta_deg)}};
  return s;
}
}  // namespace

TEST_CASE("half plate jet about pi") {
  const auto jet = jet_of_plate<double>({PlateKind::half, Angle{}}, PhaseShift{pi}, 4);
  Mat2 hw;
  hw << 0, I, I, 0;
  CHECK(max_abs_diff(jet.coefficient(0), hw) < 1e-15);
  CHECK(std::abs(jet.derivative(1, 0, 1)) < 1e-15);
  CHECK(std::abs(jet.derivative(2, 0, 1) - (-I / 4.0)) < 1e-15);
  CHECK(std::abs(jet.derivative(1, 0, 0) - (-0.5)) < 1e-15);
}

TEST_CASE("quarter plate jet carries the chain factor") {
  const PlateSpec q{PlateKind::quarter, Angle::from_degrees(20)};
  const auto jet = jet_of_plate<double>(q, PhaseShift{1.1}, 6);
  for (int k = 0; k <= 6; ++k) {
    // d^k/dphi^k cos(phi/4) = (1/4)^k cos(phi/4 + k pi/2)
    const double want = std::pow(0.25, k) * std::cos(1.1 / 4 + k * pi / 2);
    CHECK(jet.derivative(k, 0, 0).real() == doctest::Approx(want).epsilon(1e-13));
  }
}

TEST_CASE("sequence jet of a single plate matches the plate jet") {
  const auto a = jet_of_sequence<double>(single_half(33), PhaseShift{0.7}, 5);
  const auto b = jet_of_plate<double>({PlateKind::half, Angle::from_degrees(33)},
                                      PhaseShift{0.7}, 5);
  for (int k = 0; k <= 5; ++k) CHECK(max_abs_diff(a.coefficient(k), b.coefficient(k)) == 0.0);
}

TEST_CASE("coefficient zero is the stack matrix") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> phase(-2 * pi, 2 * pi);
  for (int i = 0; i < 300; ++i) {
    SequenceSpec s = retarder::testing::random_stack(rng);
    if (i % 3 == 0 && s.mirrored) s = mirror_expand(s);
    const PhaseShift phi{phase(rng)};
    const auto jet = jet_of_sequence<double>(s, phi, 3);
    CHECK(max_abs_diff(jet.coefficient(0), sequence_matrix(s, phi)) < 1e-12);
  }
}

TEST_CASE("folded and unfolded mirrored stacks give the same jet") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 100; ++i) {
    SequenceSpec s = retarder::testing::random_stack(rng);
    s.mirrored = true;
    const auto a = jet_of_sequence<double>(s, PhaseShift{pi}, 6);
    const auto b = jet_of_sequence<double>(mirror_expand(s), PhaseShift{pi}, 6);
    for (int k = 0; k <= 6; ++k) CHECK(max_abs_diff(a.derivative(k), b.derivative(k)) < 1e-11);
  }
}

TEST_CASE("Leibniz rule for a two-plate product") {
  std::mt19937_64 rng(43);
  const int order = 8;
  for (int i = 0; i < 50; ++i) {
    const PlateSpec p1{PlateKind::half, retarder::testing::random_angle(rng)};
    const PlateSpec p2{PlateKind::quarter, retarder::testing::random_angle(rng)};
    const PhaseShift at{0.3 * i};
    const auto j1 = jet_of_plate<double>(p1, at, order);
    const auto j2 = jet_of_plate<double>(p2, at, order);
    SequenceSpec s;
    s.plates = {p1, p2};
    const auto prod = jet_of_sequence<double>(s, at, order);
    for (int k = 0; k <= order; ++k) {
      // d^k (A B) = sum_j C(k, j) A^(k-j) B^(j), with A the later plate.
      Mat2 want = Mat2::Zero();
      double binom = 1;
      for (int j = 0; j <= k; ++j) {
        want += binom * j2.derivative(k - j) * j1.derivative(j);
        binom = binom * (k - j) / (j + 1);
      }
      CHECK(max_abs_diff(prod.derivative(k), want) < 1e-13);
    }
  }
}

TEST_CASE("finite-difference oracle on a single plate") {
  const SequenceSpec s = single_half();
  CHECK(std::abs(finite_difference_oracle(s, PhaseShift{pi}, 1)) < 1e-8);
  CHECK(std::abs(finite_difference_oracle(s, PhaseShift{pi}, 2) - (-I / 4.0)) < 1e-6);
  CHECK_THROWS_AS(finite_difference_oracle(s, PhaseShift{pi}, 0), std::invalid_argument);
  CHECK_THROWS_AS(finite_difference_oracle(s, PhaseShift{pi}, 5), std::invalid_argument);
}

TEST_CASE("jets agree with the finite-difference oracle") {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> phase(0, 2 * pi);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const SequenceSpec s = retarder::testing::random_stack(rng);
    const PhaseShift at{phase(rng)};
    const auto jet = jet_of_sequence<double>(s, at, 4);
    for (int k = 1; k <= 4; ++k) {
      const Complex<double> exact = jet.derivative(k, 0, 1);
      const Complex<double> fd = finite_difference_oracle(s, at, k);
      CHECK(std::abs(exact - fd) <= std::max(1e-6, 1e-6 * std::abs(exact)));
      ++checked;
    }
  }
  CHECK(checked == 400);
}

TEST_CASE("odd derivatives of family a vanish at pi") {
  std::mt19937_64 rng(45);
  for (int i = 0; i < 100; ++i) {
    const SequenceSpec s = retarder::testing::random_family_a(rng);
    const auto jet = jet_of_sequence<double>(s, PhaseShift{pi}, 10);
    for (int k = 1; k <= 3; k += 2) CHECK(std::abs(jet.derivative(k, 0, 1)) < 1e-12);
    // Higher odd orders relative to the next even one.
    for (int k = 5; k <= 9; k += 2)
      CHECK(std::abs(jet.derivative(k, 0, 1)) <
            1e-12 * std::max(1.0, std::abs(jet.derivative(k + 1, 0, 1))));
  }
}

TEST_CASE("table row a5 has small low-order derivatives") {
  const SequenceSpec a5 =
      build_sequence_deg(Family::a, std::vector<double>{0, 52.2, 336.7, 336.7, 52.2});
  const auto jet = jet_of_sequence<double>(a5, PhaseShift{pi}, 4);
  for (int k = 1; k <= 3; ++k) CHECK(std::abs(jet.derivative(k, 0, 1)) <= 5e-3);
}

TEST_CASE("jet arithmetic errors") {
  CHECK_THROWS_AS(JetSeries<double>(PhaseShift{0}, -1), std::invalid_argument);
  const JetSeries<double> a(PhaseShift{0}, 3), b(PhaseShift{0}, 4), c(PhaseShift{1}, 3);
  CHECK_THROWS_AS(a * b, std::invalid_argument);
  CHECK_THROWS_AS(a * c, std::invalid_argument);
  CHECK(JetSeries<double>::factorial(5) == 120.0);
}

TEST_CASE("long double jets") {
  SequenceSpec s = single_half(10);
  const auto jet =
      jet_of_sequence<long double>(s, BasicPhaseShift<long double>{std::numbers::pi_v<long double>}, 2);
  CHECK(std::abs(std::abs(jet.derivative(2, 0, 1)) - 0.25L) < 1e-18L);
}
