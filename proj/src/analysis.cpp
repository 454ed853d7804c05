#include "retarder/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace retarder {

double fidelity(const Mat2& j, const Mat2& target) {
  if (unitarity_defect(j) > 1e-9)
    throw std::domain_error("fidelity: Jones matrix is not unitary");
  if (unitarity_defect(target) > 1e-9)
    throw std::domain_error("fidelity: target matrix is not unitary");
  return std::abs((target.adjoint() * j).trace()) / 2;
}

double fidelity(const Mat2& j, const TargetRetarder& target) {
  return fidelity(j, target.matrix());
}

double fidelity_at(const SequenceSpec& seq, PhaseShift phi) {
  return fidelity(retarder_matrix<double>(seq, phi), seq.target_retarder());
}

AxisAlignment best_axis_offset(const SequenceSpec& seq) {
  const TargetRetarder target = seq.target_retarder();
  const Mat2 e = retarder_matrix<double>(seq, target.nominal_phase());
  const Mat2 t = target.matrix();
  // Rotating all plates by delta maps E -> D E D^H with D = diag(e^{i delta},
  // e^{-i delta}), so tr(T^H D E D^H) = a + b e^{2i delta} + c e^{-2i delta}.
  const Mat2 x = t.adjoint();
  const Complex<double> a = x(0, 0) * e(0, 0) + x(1, 1) * e(1, 1);
  const Complex<double> b = x(1, 0) * e(0, 1);
  const Complex<double> c = x(0, 1) * e(1, 0);
  auto value = [&](double psi) {
    return std::abs(a + b * std::polar(1.0, psi) + c * std::polar(1.0, -psi)) / 2;
  };
  constexpr int grid = 720;
  const double two_pi = 2 * std::numbers::pi;
  int best = 0;
  double best_val = -1;
  for (int i = 0; i < grid; ++i) {
    const double v = value(two_pi * i / grid);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  // Golden-section refinement on the bracketing cell pair.
  double lo = two_pi * (best - 1) / grid, hi = two_pi * (best + 1) / grid;
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 80; ++it) {
    const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    if (value(m1) < value(m2))
      lo = m1;
    else
      hi = m2;
  }
  double psi = (lo + hi) / 2;
  // Newton polish on |f|^2.
  for (int it = 0; it < 4; ++it) {
    const Complex<double> p = std::polar(1.0, psi), q = std::conj(p);
    const Complex<double> f = a + b * p + c * q;
    const Complex<double> f1 = Complex<double>(0, 1) * (b * p - c * q);
    const Complex<double> f2 = -(b * p + c * q);
    const double g1 = 2 * std::real(std::conj(f) * f1);
    const double g2 = 2 * (std::norm(f1) + std::real(std::conj(f) * f2));
    if (!(g2 < 0)) break;
    const double step = g1 / g2;
    if (std::abs(step) > two_pi / grid) break;
    psi -= step;
  }
  double delta_deg = std::fmod(psi / 2 * 180 / std::numbers::pi, 180.0);
  if (delta_deg < 0) delta_deg += 180;
  if (delta_deg >= 180 - 1e-12) delta_deg = 0;
  const Angle offset = Angle::from_degrees(delta_deg);
  return {offset, fidelity_at(rotated(seq, offset), target.nominal_phase())};
}

SequenceSpec aligned(const SequenceSpec& seq) {
  return rotated(seq, best_axis_offset(seq).offset);
}

const Bandwidth* SweepResult::at(double threshold) const {
  for (const auto& b : bandwidths)
    if (b.threshold == threshold) return &b;
  return nullptr;
}

Bandwidth extract_bandwidth(const std::vector<double>& phi,
                            const std::vector<double>& fid, double threshold,
                            double center) {
  Bandwidth out{threshold, std::nullopt, {}};
  const std::size_t n = phi.size();
  if (n == 0 || fid.size() != n) return out;
  const double pi = std::numbers::pi;

  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double f0 = fid[inside], f1 = fid[outside];
    const double t = (f0 - threshold) / (f0 - f1);
    return phi[inside] + t * (phi[outside] - phi[inside]);
  };

  // Maximal runs of samples at or above the threshold.
  std::size_t center_idx = n;
  if (center >= phi.front() && center <= phi.back()) {
    center_idx = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(phi[i] - center) < std::abs(phi[center_idx] - center))
        center_idx = i;
  }
  std::size_t i = 0;
  while (i < n) {
    if (fid[i] < threshold) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && fid[j + 1] >= threshold) ++j;
    const double lo = i == 0 ? phi.front() : crossing(i, i - 1);
    const double hi = j == n - 1 ? phi.back() : crossing(j, j + 1);
    const PhaseInterval iv{lo / pi, hi / pi};
    if (center_idx >= i && center_idx <= j)
      out.main = iv;
    else
      out.islands.push_back(iv);
    i = j + 1;
  }
  return out;
}

SweepResult sweep(const SequenceSpec& seq, double phi_min, double phi_max,
                  int samples, const std::vector<double>& thresholds) {
  if (samples < 2) throw std::invalid_argument("sweep needs at least 2 samples");
  if (!(phi_min < phi_max) || !std::isfinite(phi_min) || !std::isfinite(phi_max))
    throw std::invalid_argument("sweep needs finite phi_min < phi_max");
  SweepResult r;
  r.phi.resize(samples);
  r.fidelity.resize(samples);
  const double step = (phi_max - phi_min) / (samples - 1);
  for (int i = 0; i < samples; ++i) {
    const double phi = i == samples - 1 ? phi_max : phi_min + step * i;
    r.phi[i] = phi;
    r.fidelity[i] = fidelity_at(seq, PhaseShift{phi});
  }
  for (double t : thresholds)
    r.bandwidths.push_back(
        extract_bandwidth(r.phi, r.fidelity, t, std::numbers::pi));
  return r;
}

std::vector<BandwidthRow> compare(const std::vector<LabeledSequence>& seqs,
                                  const std::vector<double>& thresholds,
                                  const CompareOptions& options) {
  if (seqs.empty()) throw std::invalid_argument("compare needs at least one sequence");
  std::vector<BandwidthRow> rows;
  rows.reserve(seqs.size());
  for (const auto& s : seqs) {
    const SweepResult r = sweep(s.sequence, options.phi_min, options.phi_max,
                                options.samples, thresholds);
    rows.push_back({s.label, r.bandwidths});
  }
  return rows;
}

namespace {

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

}  // namespace

void write_sweep_csv(std::ostream& os, const SweepResult& result,
                     bool wavelength_column) {
  const double pi = std::numbers::pi;
  os << "phi_over_pi,fidelity";
  if (wavelength_column) os << ",lambda_over_lambda0";
  os << '\n';
  for (std::size_t i = 0; i < result.phi.size(); ++i) {
    const double phi = result.phi[i];
    os << format_number(phi / pi) << ',' << format_number(result.fidelity[i]);
    if (wavelength_column) {
      // Constant birefringence: phi is proportional to 1 / lambda.
      const double ratio = phi == 0 ? std::numeric_limits<double>::infinity()
                                    : pi / phi;
      os << ',' << format_number(ratio);
    }
    os << '\n';
  }
}

void write_bandwidth_csv(std::ostream& os, const std::vector<BandwidthRow>& rows) {
  os << "label,threshold,phi_lo_over_pi,phi_hi_over_pi\n";
  for (const auto& row : rows) {
    if (row.bandwidths.empty()) {
      os << row.label << ",,,\n";
      continue;
    }
    for (const auto& b : row.bandwidths) {
      os << row.label << ',' << format_number(b.threshold) << ',';
      if (b.main) os << format_number(b.main->lo) << ',' << format_number(b.main->hi);
      else os << ',';
      os << '\n';
    }
  }
}

}  // namespace retarder
