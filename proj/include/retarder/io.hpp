// JSON sequence/solution files.
//
// A sequence entry is {"family": "a".."d", "target": ..., "angles_deg": [...]}
// (target optional) or, for arbitrary stacks,
// {"family": "custom", "target": ..., "mirrored": bool,
//  "plates": [{"kind": "half"|"quarter", "theta_deg": x}, ...]}.
// A file holds one entry, an array of entries, or an object with a "rows"
// array. Design output (an array of solution objects) is itself a valid
// sequence file.
#pragma once

#include "retarder/analysis.hpp"
#include "retarder/designer.hpp"
#include "retarder/sequence.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace retarder {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ParseError on malformed JSON or entries.
std::vector<LabeledSequence> parse_sequences(const nlohmann::json& doc,
                                             const std::string& source = "");
std::vector<LabeledSequence> parse_sequences_text(const std::string& text,
                                                  const std::string& source = "");
std::vector<LabeledSequence> load_sequences(const std::filesystem::path& path);

nlohmann::json sequence_to_json(const SequenceSpec& seq);

/// {family, N, target, branch, angles_deg, residual_norm, derivative_profile,
///  fidelity_at_pi, jacobian_rank, free_angles, provenance}
nlohmann::json solution_to_json(const DesignSolution& sol);

nlohmann::json verification_to_json(const std::string& label,
                                    const Verification& v, bool passed);

/// Default label: family letter followed by plate count, e.g. "a5".
std::string default_label(const SequenceSpec& seq);

}  // namespace retarder
