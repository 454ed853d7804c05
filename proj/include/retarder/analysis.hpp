// Fidelity against target retarders, fidelity-vs-phase sweeps and bandwidth
// extraction.
#pragma once

#include "retarder/jones.hpp"
#include "retarder/sequence.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace retarder {

/// Magnitude of the half trace; global phase drops out.
inline constexpr const char* kFidelityConvention = "abs(tr(J0^H J))/2";

/// |tr(J0^H J)| / 2. Throws std::domain_error if J is not unitary to 1e-9.
double fidelity(const Mat2& j, const Mat2& target);
double fidelity(const Mat2& j, const TargetRetarder& target);

/// Fidelity of a stack against its own target at phase `phi`.
double fidelity_at(const SequenceSpec& seq, PhaseShift phi);

struct AxisAlignment {
  Angle offset;     // common rotation to add to every plate, in [0, 180)
  double fidelity;  // fidelity at the nominal phase after the rotation
};

/// Common plate rotation that best aligns the stack's retarder axis with its
/// target at the nominal phase. Rotating the whole stack only turns the
/// composite retarder's axis, so this never changes its bandwidth shape.
AxisAlignment best_axis_offset(const SequenceSpec& seq);

/// `seq` rotated by best_axis_offset(seq).offset.
SequenceSpec aligned(const SequenceSpec& seq);

/// Interval in units of phi/pi.
struct PhaseInterval {
  double lo;
  double hi;
};

struct Bandwidth {
  double threshold;
  std::optional<PhaseInterval> main;  // contiguous interval containing pi
  std::vector<PhaseInterval> islands; // other regions at or above threshold
};

struct SweepResult {
  std::vector<double> phi;  // radians
  std::vector<double> fidelity;
  std::vector<Bandwidth> bandwidths;

  const Bandwidth* at(double threshold) const;
};

inline const std::vector<double> kDefaultThresholds{0.9, 0.99, 0.999};

/// Uniform grid of `samples` points over [phi_min, phi_max]. Throws
/// std::invalid_argument when samples < 2 or phi_min >= phi_max.
SweepResult sweep(const SequenceSpec& seq, double phi_min, double phi_max,
                  int samples,
                  const std::vector<double>& thresholds = kDefaultThresholds);

/// Bandwidth of a sampled fidelity curve around `center` (radians). Crossings
/// are located by linear interpolation between neighbouring samples.
Bandwidth extract_bandwidth(const std::vector<double>& phi,
                            const std::vector<double>& fidelity,
                            double threshold, double center);

struct LabeledSequence {
  std::string label;
  SequenceSpec sequence;
};

struct BandwidthRow {
  std::string label;
  std::vector<Bandwidth> bandwidths;  // one per requested threshold
};

struct CompareOptions {
  double phi_min = 0.0;
  double phi_max = 2 * std::numbers::pi;
  int samples = 2001;
};

/// Bandwidth table, rows in input order. Throws on an empty list.
std::vector<BandwidthRow> compare(const std::vector<LabeledSequence>& seqs,
                                  const std::vector<double>& thresholds,
                                  const CompareOptions& options = {});

/// `phi_over_pi,fidelity[,lambda_over_lambda0]`, 15 significant digits.
void write_sweep_csv(std::ostream& os, const SweepResult& result,
                     bool wavelength_column = false);

/// `label,threshold,phi_lo_over_pi,phi_hi_over_pi`; missing intervals are
/// left blank.
void write_bandwidth_csv(std::ostream& os, const std::vector<BandwidthRow>& rows);

}  // namespace retarder
