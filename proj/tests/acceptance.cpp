// Acceptance suite: one PASS/FAIL line per criterion. The exit status is zero
// whenever the suite ran to completion; the lines carry the verdicts.

#include "retarder/analysis.hpp"
#include "retarder/designer.hpp"
#include "retarder/io.hpp"
#include "retarder/jet.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

using namespace retarder;
using retarder::testing::max_abs_diff;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double kDerivativeTol = 5e-3;
constexpr double kFidelityMin = 0.999;

struct Outcome {
  bool passed = true;
  std::string detail;
};

std::vector<LabeledSequence> table() {
  return load_sequences(retarder::testing::data_path("table1.json"));
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

/// Worst of the target residual and the prescribed derivatives at `angles`.
double condition_residual(Family family, const std::vector<Angle>& angles, TargetKind target) {
  const Verification v = verify_angles(family, angles, target);
  return std::max(v.target_residual, v.max_prescribed_derivative);
}

Outcome table_regression() {
  Outcome o;
  std::ostringstream fails;
  int passed_rows = 0, rows = 0;
  for (const auto& [label, seq] : table()) {
    const Verification v = verify_angles(seq.family, seq.angles(), seq.target);
    const bool ok = v.solution.fidelity >= kFidelityMin &&
                    v.max_prescribed_derivative <= kDerivativeTol;
    ++rows;
    if (ok) {
      ++passed_rows;
    } else {
      fails << ' ' << label << "(" << fmt("%.3g", v.max_prescribed_derivative) << ")";
      o.passed = false;
    }
  }

  // Sensitivity: exact solutions perturbed in one free angle by 0.05 and 1 degree.
  struct Case {
    Family family;
    int n;
    TargetKind target;
  };
  double worst_exact = 0, weakest_small = HUGE_VAL, weakest_large = HUGE_VAL;
  for (const Case c : {Case{Family::a, 5, TargetKind::half},
                       Case{Family::b, 4, TargetKind::quarter_minus},
                       Case{Family::c, 3, TargetKind::half},
                       Case{Family::d, 4, TargetKind::quarter_plus}}) {
    const auto sols = design(c.family, c.n, Branch::re, true, 100, 11, c.target);
    if (sols.empty()) {
      o.passed = false;
      fails << " no exact " << to_string(c.family) << c.n;
      continue;
    }
    const auto& angles = sols.front().angles;
    worst_exact = std::max(worst_exact, condition_residual(c.family, angles, c.target));
    const DesignProblem problem = assemble_problem(c.family, c.n, Branch::re, c.target);
    double small = 0, large = 0;
    for (std::size_t k : problem.free_angles()) {
      auto bumped = angles;
      bumped[k] = bumped[k] + Angle::from_degrees(0.05);
      small = std::max(small, condition_residual(c.family, bumped, c.target));
      bumped[k] = angles[k] + Angle::from_degrees(1.0);
      large = std::max(large, condition_residual(c.family, bumped, c.target));
    }
    weakest_small = std::min(weakest_small, small);
    weakest_large = std::min(weakest_large, large);
  }
  const bool discriminating =
      worst_exact <= 1e-8 && weakest_small >= 100 * worst_exact && weakest_small >= 1e-4 &&
      weakest_large > kDerivativeTol;
  o.passed = o.passed && discriminating;
  o.detail = std::to_string(passed_rows) + "/" + std::to_string(rows) + " rows within tolerance";
  if (!fails.str().empty()) o.detail += "; over:" + fails.str();
  o.detail += "; sensitivity exact " + fmt("%.1e", worst_exact) + ", 0.05 deg >= " +
              fmt("%.1e", weakest_small) + ", 1 deg >= " + fmt("%.1e", weakest_large) +
              (discriminating ? " (discriminating)" : " (not discriminating)");
  return o;
}

Outcome solver_rederivation() {
  struct Case {
    std::string label;
    Family family;
    int n;
    TargetKind target;
  };
  const std::vector<Case> cases{{"a5", Family::a, 5, TargetKind::half},
                                {"b4", Family::b, 4, TargetKind::quarter_minus},
                                {"b5", Family::b, 5, TargetKind::quarter_plus},
                                {"c2", Family::c, 2, TargetKind::half},
                                {"c3", Family::c, 3, TargetKind::half},
                                {"d4", Family::d, 4, TargetKind::quarter_plus}};
  std::map<std::string, std::vector<Angle>> published;
  for (const auto& [label, seq] : table()) published[label] = seq.angles();

  Outcome o;
  std::ostringstream detail;
  for (const auto& c : cases) {
    const auto sols = design(c.family, c.n, Branch::re, true, 500, 1, c.target);
    double best = HUGE_VAL;
    for (const auto& s : sols) best = std::min(best, angle_set_distance(s.angles, published[c.label]));
    const bool ok = best <= 0.1;
    o.passed = o.passed && ok;
    detail << ' ' << c.label << '=' << fmt("%.3f", best);
  }
  o.detail = "max angle error (deg):" + detail.str();
  return o;
}

SequenceSpec single_plate(Family family) {
  SequenceSpec s;
  const bool quarter = family == Family::b || family == Family::d;
  s.plates = {{quarter ? PlateKind::quarter : PlateKind::half, Angle{}}};
  s.target = quarter ? TargetKind::quarter_plus : TargetKind::half;
  return s;
}

Outcome bandwidth_ordering() {
  auto width = [](const SequenceSpec& s, double* lo = nullptr, double* hi = nullptr) {
    const SweepResult r = sweep(aligned(s), 0, 2 * pi, 8001, {0.99});
    const Bandwidth* b = r.at(0.99);
    if (!b || !b->main) return 0.0;
    if (lo) *lo = b->main->lo;
    if (hi) *hi = b->main->hi;
    return b->main->hi - b->main->lo;
  };

  Outcome o;
  std::ostringstream detail;
  const auto rows = table();
  for (Family f : {Family::a, Family::b, Family::c, Family::d}) {
    std::vector<std::pair<std::string, double>> widths{{"1", width(single_plate(f))}};
    for (const auto& [label, seq] : rows)
      if (seq.family == f) widths.push_back({label, width(seq)});
    bool increasing = true;
    for (std::size_t k = 1; k < widths.size(); ++k)
      increasing = increasing && widths[k].second > widths[k - 1].second;
    o.passed = o.passed && increasing;
    detail << ' ' << to_string(f) << (increasing ? ":increasing" : ":NOT increasing") << '[';
    for (std::size_t k = 0; k < widths.size(); ++k)
      detail << (k ? " " : "") << fmt("%.3f", widths[k].second);
    detail << ']';
  }

  double lo = 0, hi = 0;
  width(single_plate(Family::a), &lo, &hi);
  const bool single_ok = std::abs(lo - 0.910) <= 0.002 && std::abs(hi - 1.090) <= 0.002;
  o.passed = o.passed && single_ok;
  detail << "; single plate [" << fmt("%.4f", lo) << ", " << fmt("%.4f", hi) << "]";
  o.detail = "0.99 bandwidth in phi/pi:" + detail.str();
  return o;
}

Outcome derivative_engine() {
  Outcome o;
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> phase(0, 2 * pi);
  double worst_rel = 0;
  for (int i = 0; i < 100; ++i) {
    const SequenceSpec s = retarder::testing::random_stack(rng);
    const PhaseShift at{phase(rng)};
    const auto jet = jet_of_sequence<double>(s, at, 4);
    for (int k = 1; k <= 4; ++k) {
      const Complex<double> exact = jet.derivative(k, 0, 1);
      const Complex<double> fd = finite_difference_oracle(s, at, k);
      worst_rel = std::max(worst_rel, std::abs(exact - fd) / std::max(1.0, std::abs(exact)));
    }
  }
  double worst_odd = 0;
  for (int i = 0; i < 100; ++i) {
    const SequenceSpec s = retarder::testing::random_family_a(rng);
    const auto jet = jet_of_sequence<double>(s, PhaseShift{pi}, 4);
    for (int k : {1, 3}) worst_odd = std::max(worst_odd, std::abs(jet.derivative(k, 0, 1)));
  }
  o.passed = worst_rel <= 1e-6 && worst_odd <= 1e-12;
  o.detail = "oracle rel diff " + fmt("%.1e", worst_rel) + ", odd orders at pi " +
             fmt("%.1e", worst_odd);
  return o;
}

Outcome invariants() {
  Outcome o;
  std::mt19937_64 rng(3141);
  std::uniform_real_distribution<double> phase(-4 * pi, 4 * pi), alpha(-pi, pi);
  double unit = 0, det = 0, gphase = 0, mirror = 0, period = 0;
  for (int i = 0; i < 10000; ++i) {
    const SequenceSpec s = retarder::testing::random_stack(rng);
    const PhaseShift phi{phase(rng)};
    const Mat2 m = sequence_matrix(s, phi);
    const Mat2 r = retarder_lr(phi, retarder::testing::random_angle(rng));
    for (const Mat2& x : {m, r}) {
      unit = std::max(unit, unitarity_defect(x));
      det = std::max(det, std::abs(std::abs(x.determinant()) - 1.0));
    }
    det = std::max(det, std::abs(r.determinant() - 1.0));

    const Mat2 target = target_matrix<double>(s.target);
    const double f = fidelity(m, target);
    gphase = std::max(gphase, std::abs(fidelity(std::polar(1.0, alpha(rng)) * m, target) - f));

    SequenceSpec folded = s;
    folded.mirrored = true;
    mirror = std::max(mirror, max_abs_diff(sequence_matrix(folded, phi),
                                           sequence_matrix(mirror_expand(folded), phi)));

    const Angle theta = retarder::testing::random_angle(rng);
    period = std::max(period, max_abs_diff(retarder_lr(phi, theta),
                                           retarder_lr(phi, theta + Angle{pi})));
  }
  o.passed = unit <= 1e-12 && det <= 1e-12 && gphase <= 1e-13 && mirror <= 1e-14 &&
             period <= 1e-14;
  o.detail = "unitarity " + fmt("%.1e", unit) + ", det " + fmt("%.1e", det) +
             ", global phase " + fmt("%.1e", gphase) + ", mirror_expand " +
             fmt("%.1e", mirror) + ", theta period " + fmt("%.1e", period);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "table regression", 5, table_regression},
      {2, "solver re-derivation", 120, solver_rederivation},
      {3, "bandwidth ordering", 10, bandwidth_ordering},
      {4, "derivative engine", 10, derivative_engine},
      {5, "algebraic invariants", 10, invariants},
  };
  int passed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool ok = o.passed && in_time;
    passed += ok;
    std::printf("CRITERION %d %s: %s (%.2f s of %.0f s) %s\n", c.id, c.name.c_str(),
                ok ? "PASS" : "FAIL", secs, c.budget_s, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return 0;
}
