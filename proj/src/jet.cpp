#include "retarder/jet.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace retarder {

namespace {

Complex<double> j12(const SequenceSpec& seq, double phi) {
  return sequence_matrix<double>(seq, PhaseShift{phi})(0, 1);
}

// Second-order central stencils for derivatives 1..4.
Complex<double> central_difference(const SequenceSpec& seq, double x, double h,
                                   int k) {
  switch (k) {
    case 1:
      return (j12(seq, x + h) - j12(seq, x - h)) / (2 * h);
    case 2:
      return (j12(seq, x + h) - 2.0 * j12(seq, x) + j12(seq, x - h)) / (h * h);
    case 3:
      return (j12(seq, x + 2 * h) - 2.0 * j12(seq, x + h) +
              2.0 * j12(seq, x - h) - j12(seq, x - 2 * h)) /
             (2 * h * h * h);
    case 4:
      return (j12(seq, x + 2 * h) - 4.0 * j12(seq, x + h) + 6.0 * j12(seq, x) -
              4.0 * j12(seq, x - h) + j12(seq, x - 2 * h)) /
             (h * h * h * h);
    default:
      throw std::invalid_argument("finite-difference oracle supports orders 1-4");
  }
}

}  // namespace

Complex<double> finite_difference_oracle(const SequenceSpec& seq,
                                         PhaseShift phi0, int k) {
  if (k < 1 || k > 4)
    throw std::invalid_argument("finite-difference oracle supports orders 1-4");

  // Highest angular frequency of J12 in phi sets the natural step.
  double freq = 0;
  for (const auto& p : seq.plates) freq += p.retardance_scale() / 2;
  if (seq.mirrored) freq *= 2;
  freq = std::max(freq, 0.5);

  constexpr int levels = 7;
  const double h0 = 0.5 / freq;
  std::vector<std::vector<Complex<double>>> table(levels);
  Complex<double> best = 0;
  double best_err = HUGE_VAL;
  for (int i = 0; i < levels; ++i) {
    table[i].resize(i + 1);
    table[i][0] = central_difference(seq, phi0.radians, h0 / std::ldexp(1.0, i), k);
    double factor = 1;
    for (int j = 1; j <= i; ++j) {
      factor *= 4;
      table[i][j] = table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) /
                                          (factor - 1);
    }
    if (i > 0) {
      const double err = std::abs(table[i][i] - table[i - 1][i - 1]);
      if (err < best_err) {
        best_err = err;
        best = table[i][i];
      }
    }
  }
  return best;
}

}  // namespace retarder
