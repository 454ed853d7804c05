// Jones-matrix algebra for lossless retarders in the HV and LR bases.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

namespace retarder {

template <typename Scalar>
using Complex = std::complex<Scalar>;

/// 2x2 complex matrix carrying a Jones matrix in either basis.
template <typename Scalar>
using ComplexMat2 = Eigen::Matrix<Complex<Scalar>, 2, 2>;

template <typename Scalar>
using JonesVector = Eigen::Matrix<Complex<Scalar>, 2, 1>;

using Mat2 = ComplexMat2<double>;

/// In-plane rotation angle. Radians internally; degrees at I/O boundaries.
template <typename Scalar>
struct BasicAngle {
  Scalar radians{0};

  static constexpr BasicAngle from_degrees(Scalar deg) {
    return {deg * std::numbers::pi_v<Scalar> / Scalar(180)};
  }
  constexpr Scalar degrees() const {
    return radians * Scalar(180) / std::numbers::pi_v<Scalar>;
  }
  /// Degrees wrapped into [0, 360).
  Scalar canonical_degrees() const {
    Scalar d = std::fmod(degrees(), Scalar(360));
    if (d < 0) d += Scalar(360);
    if (d >= Scalar(360)) d -= Scalar(360);
    return d;
  }
  constexpr BasicAngle operator-() const { return {-radians}; }
  constexpr BasicAngle operator+(BasicAngle o) const {
    return {radians + o.radians};
  }
  constexpr BasicAngle operator-(BasicAngle o) const {
    return {radians - o.radians};
  }
};

/// Retardance (phase shift) of a plate, in radians. Unrestricted range.
template <typename Scalar>
struct BasicPhaseShift {
  Scalar radians{0};
};

using Angle = BasicAngle<double>;
using PhaseShift = BasicPhaseShift<double>;

enum class BasisChange { hv_to_lr, lr_to_hv };

template <typename Scalar>
ComplexMat2<Scalar> identity2() {
  return ComplexMat2<Scalar>::Identity();
}

/// [[cos t, sin t], [-sin t, cos t]].
template <typename Scalar>
ComplexMat2<Scalar> rotation_matrix(BasicAngle<Scalar> theta) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(theta.radians);
  const Scalar s = sin(theta.radians);
  ComplexMat2<Scalar> m;
  m << c, s, -s, c;
  return m;
}

/// Unrotated retarder diag(e^{i phi/2}, e^{-i phi/2}) in the HV basis.
template <typename Scalar>
ComplexMat2<Scalar> retarder_diag(BasicPhaseShift<Scalar> phi) {
  const Complex<Scalar> a = std::polar(Scalar(1), phi.radians / 2);
  ComplexMat2<Scalar> m;
  m << a, Scalar(0), Scalar(0), std::conj(a);
  return m;
}

/// Retarder with its axes rotated by theta, HV basis: R(-theta) J(phi) R(theta).
template <typename Scalar>
ComplexMat2<Scalar> retarder_hv(BasicPhaseShift<Scalar> phi,
                                BasicAngle<Scalar> theta) {
  return rotation_matrix(-theta) * retarder_diag(phi) * rotation_matrix(theta);
}

/// The HV -> LR change-of-basis matrix W = [[1, 1], [-i, i]] / sqrt(2).
template <typename Scalar>
ComplexMat2<Scalar> basis_w() {
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  const Complex<Scalar> i(0, 1);
  ComplexMat2<Scalar> w;
  w << r, r, -i * r, i * r;
  return w;
}

/// W is unitary, so W^{-1} = W^H.
template <typename Scalar>
ComplexMat2<Scalar> basis_change(const ComplexMat2<Scalar>& m,
                                 BasisChange direction) {
  const ComplexMat2<Scalar> w = basis_w<Scalar>();
  if (direction == BasisChange::hv_to_lr) return w.adjoint() * m * w;
  return w * m * w.adjoint();
}

/// Closed-form retarder in the LR basis:
/// [[cos(phi/2), i sin(phi/2) e^{2i theta}], [i sin(phi/2) e^{-2i theta}, cos(phi/2)]].
template <typename Scalar>
ComplexMat2<Scalar> retarder_lr(BasicPhaseShift<Scalar> phi,
                                BasicAngle<Scalar> theta) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(phi.radians / 2);
  const Scalar s = sin(phi.radians / 2);
  const Complex<Scalar> i(0, 1);
  const Complex<Scalar> e = std::polar(Scalar(1), 2 * theta.radians);
  ComplexMat2<Scalar> m;
  m << c, i * s * e, i * s * std::conj(e), c;
  return m;
}

/// Ideal mirror in the LR basis (sigma_x): swaps circular handedness.
template <typename Scalar = double>
ComplexMat2<Scalar> mirror_lr() {
  ComplexMat2<Scalar> m;
  m << Scalar(0), Scalar(1), Scalar(1), Scalar(0);
  return m;
}

/// Largest entrywise deviation of M^H M from the identity.
template <typename Scalar>
Scalar unitarity_defect(const ComplexMat2<Scalar>& m) {
  return (m.adjoint() * m - ComplexMat2<Scalar>::Identity())
      .cwiseAbs()
      .maxCoeff();
}

/// diag(e^{i delta}, e^{-i delta}). Rotating every plate of a stack by delta
/// conjugates its LR Jones matrix by this.
template <typename Scalar>
ComplexMat2<Scalar> axis_phase(BasicAngle<Scalar> delta) {
  const Complex<Scalar> a = std::polar(Scalar(1), delta.radians);
  ComplexMat2<Scalar> m;
  m << a, Scalar(0), Scalar(0), std::conj(a);
  return m;
}

}  // namespace retarder
