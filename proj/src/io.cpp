#include "retarder/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace retarder {

using nlohmann::json;

std::string default_label(const SequenceSpec& seq) {
  return std::string(to_string(seq.family)) + std::to_string(seq.plates.size());
}

namespace {

std::string where(const std::string& source, std::size_t index) {
  std::string s = source.empty() ? "entry " : source + ": entry ";
  return s + std::to_string(index);
}

LabeledSequence parse_entry(const json& e, const std::string& ctx) {
  if (!e.is_object()) throw ParseError(ctx + ": expected a JSON object");
  try {
    if (!e.contains("family")) throw ParseError(ctx + ": missing \"family\"");
    const Family family = parse_family(e.at("family").get<std::string>());
    std::optional<TargetKind> target;
    if (e.contains("target")) target = parse_target(e.at("target").get<std::string>());

    SequenceSpec seq;
    if (family == Family::custom) {
      if (!e.contains("plates") || !e.at("plates").is_array())
        throw ParseError(ctx + ": custom stacks need a \"plates\" array");
      seq.family = Family::custom;
      seq.target = target.value_or(TargetKind::half);
      seq.mirrored = e.value("mirrored", false);
      for (const auto& p : e.at("plates")) {
        const double deg = p.at("theta_deg").get<double>();
        if (!std::isfinite(deg)) throw ParseError(ctx + ": non-finite angle");
        seq.plates.push_back({parse_plate_kind(p.at("kind").get<std::string>()),
                              Angle::from_degrees(deg)});
      }
      if (seq.plates.empty()) throw ParseError(ctx + ": empty plate list");
      validate(seq);
    } else {
      if (!e.contains("angles_deg") || !e.at("angles_deg").is_array())
        throw ParseError(ctx + ": missing \"angles_deg\" array");
      std::vector<double> deg = e.at("angles_deg").get<std::vector<double>>();
      for (double d : deg)
        if (!std::isfinite(d)) throw ParseError(ctx + ": non-finite angle");
      seq = build_sequence_deg(family, deg, target);
      if (e.contains("N") && e.at("N").get<int>() != static_cast<int>(deg.size()))
        throw ParseError(ctx + ": \"N\" does not match the angle count");
    }
    std::string label = e.value("label", default_label(seq));
    return {label, seq};
  } catch (const json::exception& ex) {
    throw ParseError(ctx + ": " + ex.what());
  } catch (const SequenceError& ex) {
    throw ParseError(ctx + ": " + ex.what());
  }
}

}  // namespace

std::vector<LabeledSequence> parse_sequences(const json& doc,
                                             const std::string& source) {
  const json* list = &doc;
  json single;
  if (doc.is_object()) {
    if (doc.contains("rows")) list = &doc.at("rows");
    else if (doc.contains("solutions")) list = &doc.at("solutions");
    else {
      single = json::array({doc});
      list = &single;
    }
  }
  if (!list->is_array()) throw ParseError(source + ": expected an array of entries");
  if (list->empty()) throw ParseError(source + ": no entries");
  std::vector<LabeledSequence> out;
  for (std::size_t i = 0; i < list->size(); ++i)
    out.push_back(parse_entry((*list)[i], where(source, i)));
  return out;
}

std::vector<LabeledSequence> parse_sequences_text(const std::string& text,
                                                  const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw ParseError((source.empty() ? "" : source + ": ") + ex.what());
  }
  return parse_sequences(doc, source);
}

std::vector<LabeledSequence> load_sequences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sequences_text(buf.str(), path.string());
}

json sequence_to_json(const SequenceSpec& seq) {
  json j;
  j["family"] = to_string(seq.family);
  j["target"] = to_string(seq.target);
  if (seq.family == Family::custom) {
    j["mirrored"] = seq.mirrored;
    json plates = json::array();
    for (const auto& p : seq.plates)
      plates.push_back({{"kind", to_string(p.kind)}, {"theta_deg", p.theta.degrees()}});
    j["plates"] = plates;
  } else {
    json angles = json::array();
    for (const auto& p : seq.plates) angles.push_back(p.theta.canonical_degrees());
    j["angles_deg"] = angles;
  }
  return j;
}

json solution_to_json(const DesignSolution& sol) {
  json angles = json::array();
  for (const auto& a : sol.angles) angles.push_back(a.canonical_degrees());
  json j;
  j["family"] = to_string(sol.family);
  j["N"] = sol.n;
  j["target"] = to_string(sol.target);
  j["branch"] = to_string(sol.branch);
  j["angles_deg"] = angles;
  j["residual_norm"] = sol.residual_norm;
  j["derivative_profile"] = sol.derivative_profile;
  j["fidelity_at_pi"] = sol.fidelity;
  j["fidelity_convention"] = kFidelityConvention;
  j["jacobian_rank"] = sol.jacobian_rank;
  j["free_angles"] = sol.free_count;
  if (sol.provenance.start_index >= 0)
    j["provenance"] = {{"seed", sol.provenance.seed},
                       {"start_index", sol.provenance.start_index},
                       {"start_deg", sol.provenance.start_degrees}};
  return j;
}

json verification_to_json(const std::string& label, const Verification& v,
                          bool passed) {
  json j = solution_to_json(v.solution);
  j.erase("provenance");
  j["label"] = label;
  j["passed"] = passed;
  j["fidelity_raw_at_pi"] = v.fidelity_raw;
  j["axis_offset_deg"] = v.alignment_offset.degrees();
  j["target_residual"] = v.target_residual;
  j["max_prescribed_derivative"] = v.max_prescribed_derivative;
  json branches = json::array();
  for (const auto& b : v.branches)
    branches.push_back({{"branch", to_string(b.branch)},
                        {"residual_norm", b.residual_norm},
                        {"max_prescribed_derivative", b.max_prescribed_derivative}});
  j["branches"] = branches;
  return j;
}

}  // namespace retarder
