// Composite retarder stacks: the four plate families, mirror folding, and
// evaluation of the total LR-basis Jones matrix at a swept phase shift.
#pragma once

#include "retarder/jones.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace retarder {

class SequenceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class PlateKind { half, quarter };

/// a: odd stack of half plates. b: quarter plate at 0 followed by half plates.
/// c: half plates then a quarter plate in front of a mirror.
/// d: quarter, half plates, quarter, mirror.
enum class Family { a, b, c, d, custom };

enum class TargetKind { half, quarter_plus, quarter_minus };

struct PlateSpec {
  PlateKind kind = PlateKind::half;
  Angle theta{};

  /// Plate retardance as a multiple of the swept half-plate phase.
  double retardance_scale() const {
    return kind == PlateKind::half ? 1.0 : 0.5;
  }
};

/// Target Jones matrix in the LR basis, defined up to a global phase.
///   half:          [[0, i], [i, 0]]
///   quarter_plus:  [[1, i], [i, 1]] / sqrt(2)
///   quarter_minus: [[1, -i], [-i, 1]] / sqrt(2)
template <typename Scalar = double>
ComplexMat2<Scalar> target_matrix(TargetKind kind) {
  const Complex<Scalar> i(0, 1);
  ComplexMat2<Scalar> m;
  if (kind == TargetKind::half) {
    m << Scalar(0), i, i, Scalar(0);
    return m;
  }
  const Scalar r = Scalar(1) / std::sqrt(Scalar(2));
  const Complex<Scalar> off = kind == TargetKind::quarter_plus ? i * r : -i * r;
  m << r, off, off, r;
  return m;
}

struct TargetRetarder {
  TargetKind kind = TargetKind::half;

  Mat2 matrix() const { return target_matrix<double>(kind); }
  /// Conditions for every family are evaluated at the half-plate phase pi.
  PhaseShift nominal_phase() const { return {std::numbers::pi}; }
};

/// Ordered plate stack in propagation order (first plate is hit first).
///
/// A folded mirrored stack (`mirrored`) is traversed forward, reflected by
/// sigma_x, and traversed back with every angle negated. An unfolded stack
/// may instead carry an explicit mirror after plate `mirror_after - 1`.
struct SequenceSpec {
  std::vector<PlateSpec> plates;
  bool mirrored = false;
  std::optional<std::size_t> mirror_after;
  Family family = Family::custom;
  TargetKind target = TargetKind::half;

  /// True when the light undergoes one reflection.
  bool reflects() const { return mirrored || mirror_after.has_value(); }
  std::vector<Angle> angles() const;
  TargetRetarder target_retarder() const { return {target}; }
};

std::string_view to_string(Family f);
std::string_view to_string(TargetKind t);
std::string_view to_string(PlateKind k);
Family parse_family(std::string_view s);
TargetKind parse_target(std::string_view s);
PlateKind parse_plate_kind(std::string_view s);

/// J0(pi) for families a/c, J0(+pi/2) for b/d.
TargetKind default_target(Family f);

/// Throws SequenceError if the stack violates its family's structural rules.
void validate(const SequenceSpec& seq);

/// Build a family stack from angles listed theta_1 first.
SequenceSpec build_sequence(Family family, std::span<const Angle> angles,
                            std::optional<TargetKind> target = std::nullopt);
/// Same plate layout as build_sequence, but a family-b stack whose first
/// plate is not at 0 (mod 180) comes back tagged custom instead of failing.
SequenceSpec family_stack(Family family, std::span<const Angle> angles,
                          std::optional<TargetKind> target = std::nullopt);
SequenceSpec build_sequence_deg(Family family, std::span<const double> degrees,
                                std::optional<TargetKind> target = std::nullopt);

/// Unfold a mirrored stack into 2N plates with an explicit mirror marker.
SequenceSpec mirror_expand(const SequenceSpec& seq);

/// Every plate rotated by a common offset. A family-b stack whose first
/// plate leaves 0 (mod 180) is retagged custom.
SequenceSpec rotated(const SequenceSpec& seq, Angle offset);

/// Total LR-basis Jones matrix, first plate rightmost. For folded mirrored
/// stacks this is J_{-t1}..J_{-tN} sigma_x J_{tN}..J_{t1}.
template <typename Scalar = double>
ComplexMat2<Scalar> sequence_matrix(const SequenceSpec& seq,
                                    BasicPhaseShift<Scalar> phi) {
  auto plate = [&](const PlateSpec& p, Scalar sign) {
    return retarder_lr<Scalar>(
        {Scalar(p.retardance_scale()) * phi.radians},
        {sign * Scalar(p.theta.radians)});
  };
  ComplexMat2<Scalar> m = ComplexMat2<Scalar>::Identity();
  for (std::size_t k = 0; k < seq.plates.size(); ++k) {
    m = plate(seq.plates[k], Scalar(1)) * m;
    if (seq.mirror_after && *seq.mirror_after == k + 1)
      m = mirror_lr<Scalar>() * m;
  }
  if (seq.mirror_after && *seq.mirror_after == 0) m = m * mirror_lr<Scalar>();
  if (seq.mirrored) {
    m = mirror_lr<Scalar>() * m;
    for (auto it = seq.plates.rbegin(); it != seq.plates.rend(); ++it)
      m = plate(*it, Scalar(-1)) * m;
  }
  return m;
}

/// The stack's matrix as a retarder acting on the outgoing beam: after one
/// reflection the circular labels of the returning beam are swapped, so the
/// raw product is multiplied by sigma_x once more. Equal to sequence_matrix
/// for transmissive stacks. This is what fidelity is computed against.
template <typename Scalar = double>
ComplexMat2<Scalar> retarder_matrix(const SequenceSpec& seq,
                                    BasicPhaseShift<Scalar> phi) {
  ComplexMat2<Scalar> m = sequence_matrix<Scalar>(seq, phi);
  if (seq.reflects()) return mirror_lr<Scalar>() * m;
  return m;
}

}  // namespace retarder
