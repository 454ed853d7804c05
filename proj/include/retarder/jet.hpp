// Truncated Taylor series (jets) of matrix-valued functions of the phase
// shift. Used to get exact high-order derivatives of stack Jones matrices.
#pragma once

#include "retarder/jones.hpp"
#include "retarder/sequence.hpp"

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace retarder {

/// Default cap on derivative order used by the designer.
inline constexpr int kDefaultMaxJetOrder = 16;

template <typename Scalar>
class JetSeries {
 public:
  JetSeries(BasicPhaseShift<Scalar> point, int order)
      : point_(point),
        coeffs_(static_cast<std::size_t>(check_order(order)) + 1,
                ComplexMat2<Scalar>::Zero()) {}

  static JetSeries constant(const ComplexMat2<Scalar>& m,
                            BasicPhaseShift<Scalar> point, int order) {
    JetSeries j(point, order);
    j.coeffs_[0] = m;
    return j;
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  BasicPhaseShift<Scalar> expansion_point() const { return point_; }

  const ComplexMat2<Scalar>& coefficient(int k) const { return coeffs_.at(k); }
  ComplexMat2<Scalar>& coefficient(int k) { return coeffs_.at(k); }
  const std::vector<ComplexMat2<Scalar>>& coefficients() const {
    return coeffs_;
  }

  /// k-th derivative of the matrix function at the expansion point.
  ComplexMat2<Scalar> derivative(int k) const {
    return coeffs_.at(k) * factorial(k);
  }
  Complex<Scalar> derivative(int k, int row, int col) const {
    return coeffs_.at(k)(row, col) * factorial(k);
  }

  static Scalar factorial(int k) {
    Scalar f(1);
    for (int i = 2; i <= k; ++i) f *= Scalar(i);
    return f;
  }

  /// Truncated Cauchy product. Both operands must share order and point.
  friend JetSeries operator*(const JetSeries& lhs, const JetSeries& rhs) {
    if (lhs.order() != rhs.order() ||
        lhs.point_.radians != rhs.point_.radians)
      throw std::invalid_argument("jet product needs matching order and point");
    JetSeries out(lhs.point_, lhs.order());
    const int n = lhs.order();
    for (int k = 0; k <= n; ++k) {
      ComplexMat2<Scalar> acc = ComplexMat2<Scalar>::Zero();
      for (int j = 0; j <= k; ++j) acc.noalias() += lhs.coeffs_[j] * rhs.coeffs_[k - j];
      out.coeffs_[k] = acc;
    }
    return out;
  }

  friend JetSeries operator*(const ComplexMat2<Scalar>& lhs,
                             const JetSeries& rhs) {
    JetSeries out = rhs;
    for (auto& c : out.coeffs_) c = lhs * c;
    return out;
  }

 private:
  static int check_order(int order) {
    if (order < 0) throw std::invalid_argument("jet order must be >= 0");
    return order;
  }

  BasicPhaseShift<Scalar> point_;
  std::vector<ComplexMat2<Scalar>> coeffs_;
};

/// Taylor coefficients of J_theta(c * phi) about `point`. Derivatives of
/// cos(c phi / 2) and sin(c phi / 2) cycle with a factor (c/2)^k.
template <typename Scalar>
JetSeries<Scalar> jet_of_plate(const PlateSpec& plate,
                               BasicPhaseShift<Scalar> point, int order,
                               Scalar rotation_sign = Scalar(1)) {
  JetSeries<Scalar> jet(point, order);
  const Scalar c = Scalar(plate.retardance_scale());
  const Scalar arg = c * point.radians / 2;
  const Scalar c0 = std::cos(arg), s0 = std::sin(arg);
  // d^k/dx^k cos(x) at arg cycles cos, -sin, -cos, sin; sin cycles sin, cos, -sin, -cos.
  const std::array<Scalar, 4> cos_cycle{c0, -s0, -c0, s0};
  const std::array<Scalar, 4> sin_cycle{s0, c0, -s0, -c0};
  const Complex<Scalar> i(0, 1);
  const Complex<Scalar> e =
      std::polar(Scalar(1), 2 * rotation_sign * Scalar(plate.theta.radians));
  const Complex<Scalar> upper = i * e, lower = i * std::conj(e);
  Scalar scale(1);  // (c/2)^k / k!
  for (int k = 0; k <= order; ++k) {
    if (k > 0) scale *= (c / 2) / Scalar(k);
    const Scalar ck = scale * cos_cycle[k % 4];
    const Scalar sk = scale * sin_cycle[k % 4];
    ComplexMat2<Scalar>& m = jet.coefficient(k);
    m(0, 0) = ck;
    m(1, 1) = ck;
    m(0, 1) = sk * upper;
    m(1, 0) = sk * lower;
  }
  return jet;
}

/// Truncated product of plate jets in propagation order; mirrors enter as
/// constant sigma_x factors. Coefficient 0 equals sequence_matrix at `point`.
template <typename Scalar = double>
JetSeries<Scalar> jet_of_sequence(const SequenceSpec& seq,
                                  BasicPhaseShift<Scalar> point, int order) {
  const ComplexMat2<Scalar> sx = mirror_lr<Scalar>();
  auto acc = JetSeries<Scalar>::constant(ComplexMat2<Scalar>::Identity(), point,
                                         order);
  if (seq.mirror_after && *seq.mirror_after == 0) acc = sx * acc;
  for (std::size_t k = 0; k < seq.plates.size(); ++k) {
    acc = jet_of_plate<Scalar>(seq.plates[k], point, order) * acc;
    if (seq.mirror_after && *seq.mirror_after == k + 1) acc = sx * acc;
  }
  if (seq.mirrored) {
    acc = sx * acc;
    for (auto it = seq.plates.rbegin(); it != seq.plates.rend(); ++it)
      acc = jet_of_plate<Scalar>(*it, point, order, Scalar(-1)) * acc;
  }
  return acc;
}

/// Central-difference estimate of d^k J12 / dphi^k at phi0 (1 <= k <= 4),
/// Richardson-extrapolated over successively halved steps. Evaluates
/// sequence_matrix directly and shares no code with the jet path.
Complex<double> finite_difference_oracle(const SequenceSpec& seq,
                                         PhaseShift phi0, int k);

}  // namespace retarder
