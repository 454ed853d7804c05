#include "retarder/sequence.hpp"

#include <cmath>
#include <string>

namespace retarder {

std::vector<Angle> SequenceSpec::angles() const {
  std::vector<Angle> out;
  out.reserve(plates.size());
  for (const auto& p : plates) out.push_back(p.theta);
  return out;
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::a: return "a";
    case Family::b: return "b";
    case Family::c: return "c";
    case Family::d: return "d";
    case Family::custom: return "custom";
  }
  return "custom";
}

std::string_view to_string(TargetKind t) {
  switch (t) {
    case TargetKind::half: return "half";
    case TargetKind::quarter_plus: return "quarter_plus";
    case TargetKind::quarter_minus: return "quarter_minus";
  }
  return "half";
}

std::string_view to_string(PlateKind k) {
  return k == PlateKind::half ? "half" : "quarter";
}

Family parse_family(std::string_view s) {
  if (s == "a") return Family::a;
  if (s == "b") return Family::b;
  if (s == "c") return Family::c;
  if (s == "d") return Family::d;
  if (s == "custom") return Family::custom;
  throw SequenceError("unknown family '" + std::string(s) +
                      "' (expected a, b, c, d or custom)");
}

TargetKind parse_target(std::string_view s) {
  if (s == "half") return TargetKind::half;
  if (s == "quarter_plus" || s == "quarter" || s == "plus")
    return TargetKind::quarter_plus;
  if (s == "quarter_minus" || s == "minus") return TargetKind::quarter_minus;
  throw SequenceError("unknown target '" + std::string(s) +
                      "' (expected half, quarter_plus or quarter_minus)");
}

PlateKind parse_plate_kind(std::string_view s) {
  if (s == "half") return PlateKind::half;
  if (s == "quarter") return PlateKind::quarter;
  throw SequenceError("unknown plate kind '" + std::string(s) + "'");
}

TargetKind default_target(Family f) {
  return (f == Family::b || f == Family::d) ? TargetKind::quarter_plus
                                            : TargetKind::half;
}

namespace {

bool is_zero_mod_180(Angle a) {
  const double r = std::remainder(a.degrees(), 180.0);
  return std::abs(r) < 1e-9;
}

std::string family_error(Family f, const std::string& what) {
  return "family " + std::string(to_string(f)) + ": " + what;
}

SequenceSpec build_sequence_impl(Family family, std::span<const Angle> angles,
                                 std::optional<TargetKind> target);

}  // namespace

void validate(const SequenceSpec& seq) {
  const auto& p = seq.plates;
  const std::size_t n = p.size();
  auto all_half = [&](std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to; ++k)
      if (p[k].kind != PlateKind::half) return false;
    return true;
  };
  if (seq.mirrored && seq.mirror_after)
    throw SequenceError("a folded mirrored stack cannot carry a mirror marker");
  if (seq.mirror_after && *seq.mirror_after > n)
    throw SequenceError("mirror marker past the end of the stack");
  switch (seq.family) {
    case Family::custom:
      return;
    case Family::a:
      if (n % 2 == 0)
        throw SequenceError(family_error(
            seq.family, "needs an odd number of half-wave plates, got " +
                            std::to_string(n)));
      if (!all_half(0, n) || seq.reflects())
        throw SequenceError(
            family_error(seq.family, "only half-wave plates, no mirror"));
      return;
    case Family::b:
      if (n < 1 || p[0].kind != PlateKind::quarter || !is_zero_mod_180(p[0].theta))
        throw SequenceError(family_error(
            seq.family, "first plate must be a quarter-wave plate at 0 deg"));
      if (!all_half(1, n) || seq.reflects())
        throw SequenceError(family_error(
            seq.family, "plates after the first must be half-wave, no mirror"));
      return;
    case Family::c:
      if (n < 1 || !seq.mirrored || p[n - 1].kind != PlateKind::quarter ||
          !all_half(0, n - 1))
        throw SequenceError(family_error(
            seq.family,
            "half-wave plates then a quarter-wave plate before the mirror"));
      return;
    case Family::d:
      if (n < 2 || !seq.mirrored || p[0].kind != PlateKind::quarter ||
          p[n - 1].kind != PlateKind::quarter || !all_half(1, n - 1))
        throw SequenceError(family_error(
            seq.family,
            "quarter-wave plates at both ends, half-wave between, mirror"));
      return;
  }
}

SequenceSpec family_stack(Family family, std::span<const Angle> angles,
                          std::optional<TargetKind> target) {
  SequenceSpec seq = build_sequence_impl(family, angles, target);
  if (family == Family::b && !is_zero_mod_180(seq.plates[0].theta))
    seq.family = Family::custom;
  validate(seq);
  return seq;
}

SequenceSpec build_sequence(Family family, std::span<const Angle> angles,
                            std::optional<TargetKind> target) {
  SequenceSpec seq = build_sequence_impl(family, angles, target);
  validate(seq);
  return seq;
}

namespace {

SequenceSpec build_sequence_impl(Family family, std::span<const Angle> angles,
                                 std::optional<TargetKind> target) {
  const std::size_t n = angles.size();
  if (n == 0) throw SequenceError("empty angle list");
  if (family == Family::custom)
    throw SequenceError("custom stacks are built plate by plate");
  if (family == Family::d && n < 2)
    throw SequenceError(family_error(family, "needs at least 2 plates"));

  SequenceSpec seq;
  seq.family = family;
  seq.target = target.value_or(default_target(family));
  seq.mirrored = family == Family::c || family == Family::d;
  seq.plates.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    PlateKind kind = PlateKind::half;
    if (family == Family::b && k == 0) kind = PlateKind::quarter;
    if (family == Family::c && k == n - 1) kind = PlateKind::quarter;
    if (family == Family::d && (k == 0 || k == n - 1)) kind = PlateKind::quarter;
    seq.plates.push_back({kind, angles[k]});
  }
  return seq;
}

}  // namespace

SequenceSpec build_sequence_deg(Family family, std::span<const double> degrees,
                                std::optional<TargetKind> target) {
  std::vector<Angle> angles;
  angles.reserve(degrees.size());
  for (double d : degrees) angles.push_back(Angle::from_degrees(d));
  return build_sequence(family, angles, target);
}

SequenceSpec mirror_expand(const SequenceSpec& seq) {
  if (!seq.mirrored)
    throw SequenceError("mirror_expand needs a folded mirrored stack");
  SequenceSpec out;
  out.family = Family::custom;
  out.target = seq.target;
  out.plates = seq.plates;
  out.mirror_after = seq.plates.size();
  for (auto it = seq.plates.rbegin(); it != seq.plates.rend(); ++it)
    out.plates.push_back({it->kind, -it->theta});
  return out;
}

SequenceSpec rotated(const SequenceSpec& seq, Angle offset) {
  SequenceSpec out = seq;
  if (seq.mirror_after) {
    // Unfolded: the return pass sees the opposite rotation.
    const std::size_t m = *seq.mirror_after;
    for (std::size_t k = 0; k < out.plates.size(); ++k)
      out.plates[k].theta =
          k < m ? out.plates[k].theta + offset : out.plates[k].theta - offset;
  } else {
    for (auto& p : out.plates) p.theta = p.theta + offset;
  }
  if (out.family == Family::b && !is_zero_mod_180(out.plates[0].theta))
    out.family = Family::custom;
  return out;
}

}  // namespace retarder
