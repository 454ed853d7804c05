#include "retarder/cli.hpp"

#include "retarder/analysis.hpp"
#include "retarder/designer.hpp"
#include "retarder/io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

namespace retarder::cli {

namespace {

using nlohmann::json;

struct SourceArgs {
  std::string file;
  std::string family;
  std::string target;
  std::string row;
  std::vector<double> angles;
};

void add_source_options(CLI::App* cmd, SourceArgs& s) {
  cmd->add_option("file", s.file, "Sequence JSON file");
  cmd->add_option("--angles", s.angles, "Inline angles in degrees, theta_1 first")
      ->delimiter(',');
  cmd->add_option("--family", s.family, "Family for inline angles (a, b, c, d)");
  cmd->add_option("--target", s.target,
                  "Target: half, quarter_plus or quarter_minus");
  cmd->add_option("--row", s.row, "Label of the entry to use from a multi-entry file");
}

std::vector<LabeledSequence> resolve_sources(const SourceArgs& s) {
  if (!s.file.empty() && !s.angles.empty())
    throw ParseError("give either a file or --angles, not both");
  std::vector<LabeledSequence> seqs;
  if (!s.angles.empty()) {
    if (s.family.empty()) throw ParseError("--angles needs --family");
    std::optional<TargetKind> target;
    if (!s.target.empty()) target = parse_target(s.target);
    SequenceSpec seq = build_sequence_deg(parse_family(s.family), s.angles, target);
    seqs.push_back({default_label(seq), seq});
  } else if (!s.file.empty()) {
    seqs = load_sequences(s.file);
  } else {
    throw ParseError("no sequence given (file or --angles)");
  }
  if (!s.row.empty()) {
    for (const auto& e : seqs)
      if (e.label == s.row) return {e};
    throw ParseError("no entry labelled '" + s.row + "'");
  }
  return seqs;
}

LabeledSequence single_source(const SourceArgs& s) {
  auto seqs = resolve_sources(s);
  if (seqs.size() != 1)
    throw ParseError("input holds " + std::to_string(seqs.size()) +
                     " entries; pick one with --row");
  return seqs.front();
}

/// Writes to `path` when given, otherwise to `out`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out) : out_(&out) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ParseError("cannot write " + path);
      out_ = file_.get();
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

json matrix_json(const Mat2& m) {
  json rows = json::array();
  for (int i = 0; i < 2; ++i) {
    json row = json::array();
    for (int j = 0; j < 2; ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Design and verification of broadband composite retarders",
               "retarder_forge"};
  app.require_subcommand(1);

  // design
  std::string d_family, d_branch = "both", d_target, d_output;
  int d_n = 0, d_starts = 200;
  std::uint64_t d_seed = 1;
  auto* design_cmd = app.add_subcommand("design", "Solve the nullification conditions");
  design_cmd->add_option("family", d_family, "a, b, c or d")->required();
  design_cmd->add_option("N", d_n, "Plate count")->required();
  design_cmd->add_option("--starts", d_starts, "Random starts")->check(CLI::PositiveNumber);
  design_cmd->add_option("--seed", d_seed, "Start-point seed");
  design_cmd->add_option("--branch", d_branch, "re, im or both")
      ->check(CLI::IsMember({"re", "im", "both"}));
  design_cmd->add_option("--target", d_target, "half, quarter_plus or quarter_minus");
  design_cmd->add_option("-o,--output", d_output, "Output file (default stdout)");

  // verify
  std::string v_file;
  double v_tol = 5e-3, v_min_fid = 0.999;
  auto* verify_cmd = app.add_subcommand("verify", "Check angle sets against their conditions");
  verify_cmd->add_option("file", v_file, "Sequence or table JSON")->required();
  verify_cmd->add_option("--tolerance", v_tol, "Max prescribed derivative magnitude");
  verify_cmd->add_option("--min-fidelity", v_min_fid, "Min fidelity at phi = pi");

  // eval
  SourceArgs e_src;
  double e_phi = 1.0;
  auto* eval_cmd = app.add_subcommand("eval", "Jones matrix and fidelity at one phase");
  add_source_options(eval_cmd, e_src);
  eval_cmd->add_option("--phi", e_phi, "Phase shift in units of pi (default 1)");

  // sweep
  SourceArgs s_src;
  double s_min = 0.0, s_max = 2.0;
  int s_samples = 2001;
  bool s_wavelength = false, s_raw_axis = false;
  std::string s_output;
  auto* sweep_cmd = app.add_subcommand("sweep", "Fidelity versus phase shift as CSV");
  add_source_options(sweep_cmd, s_src);
  sweep_cmd->add_option("--min", s_min, "Lower phi bound in units of pi");
  sweep_cmd->add_option("--max", s_max, "Upper phi bound in units of pi");
  sweep_cmd->add_option("--samples", s_samples, "Grid points");
  sweep_cmd->add_flag("--wavelength", s_wavelength, "Add a lambda/lambda0 column");
  sweep_cmd->add_flag("--raw-axis", s_raw_axis,
                      "Do not rotate the stack onto the target axis first");
  sweep_cmd->add_option("-o,--output", s_output, "Output file (default stdout)");

  // compare
  std::vector<std::string> c_files;
  std::vector<double> c_thresholds = kDefaultThresholds;
  double c_min = 0.0, c_max = 2.0;
  int c_samples = 2001;
  bool c_raw_axis = false;
  std::string c_output;
  auto* compare_cmd = app.add_subcommand("compare", "Bandwidth table as CSV");
  compare_cmd->add_option("files", c_files, "Sequence JSON files")->required();
  compare_cmd->add_option("--thresholds", c_thresholds, "Fidelity thresholds")
      ->delimiter(',');
  compare_cmd->add_option("--min", c_min, "Lower phi bound in units of pi");
  compare_cmd->add_option("--max", c_max, "Upper phi bound in units of pi");
  compare_cmd->add_option("--samples", c_samples, "Grid points");
  compare_cmd->add_flag("--raw-axis", c_raw_axis,
                        "Do not rotate stacks onto the target axis first");
  compare_cmd->add_option("-o,--output", c_output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  const double pi = std::numbers::pi;
  try {
    if (*design_cmd) {
      const Family family = parse_family(d_family);
      std::optional<TargetKind> target;
      if (!d_target.empty()) target = parse_target(d_target);
      std::string why;
      if (!admissible(family, d_n, &why)) {
        err << "error: " << why << '\n';
        return kExitUsage;
      }
      const bool both = d_branch == "both";
      const Branch branch = both ? Branch::re : parse_branch(d_branch);
      const auto sols = design(family, d_n, branch, both, d_starts, d_seed, target);
      json arr = json::array();
      for (const auto& s : sols) arr.push_back(solution_to_json(s));
      Sink sink(d_output, out);
      sink.stream() << arr.dump(2) << '\n';
      for (const auto& s : sols)
        err << "solution branch=" << to_string(s.branch) << " residual=" << s.residual_norm
            << " jacobian_rank=" << s.jacobian_rank << "/" << s.free_count << '\n';
      if (sols.empty()) {
        err << "no converged solution from " << d_starts << " starts\n";
        return kExitNoSolution;
      }
      return kExitOk;
    }

    if (*verify_cmd) {
      const auto seqs = load_sequences(v_file);
      json report = json::array();
      bool all_passed = true;
      for (const auto& [label, seq] : seqs) {
        if (seq.family == Family::custom)
          throw ParseError(label + ": custom stacks have no design conditions to verify");
        const Verification v = verify_angles(seq.family, seq.angles(), seq.target);
        const bool passed = v.solution.fidelity >= v_min_fid &&
                            v.max_prescribed_derivative <= v_tol;
        all_passed = all_passed && passed;
        report.push_back(verification_to_json(label, v, passed));
        err << (passed ? "PASS " : "FAIL ") << label << "  F(pi)=" << v.solution.fidelity
            << "  max|dJ12|=" << v.max_prescribed_derivative
            << "  residual=" << v.solution.residual_norm << '\n';
      }
      out << report.dump(2) << '\n';
      return all_passed ? kExitOk : kExitFailed;
    }

    if (*eval_cmd) {
      const LabeledSequence ls = single_source(e_src);
      const PhaseShift phi{e_phi * pi};
      const Mat2 raw = sequence_matrix<double>(ls.sequence, phi);
      const Mat2 ret = retarder_matrix<double>(ls.sequence, phi);
      const AxisAlignment align = best_axis_offset(ls.sequence);
      json j;
      j["label"] = ls.label;
      j["sequence"] = sequence_to_json(ls.sequence);
      j["phi_over_pi"] = e_phi;
      j["jones_lr"] = matrix_json(raw);
      j["retarder_lr"] = matrix_json(ret);
      j["fidelity"] = fidelity(ret, ls.sequence.target_retarder());
      j["axis_offset_deg"] = align.offset.degrees();
      j["fidelity_aligned_at_pi"] = align.fidelity;
      j["fidelity_convention"] = kFidelityConvention;
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (*sweep_cmd) {
      if (s_samples < 2 || !(s_min < s_max)) {
        err << "error: sweep needs --samples >= 2 and --min < --max\n";
        return kExitUsage;
      }
      LabeledSequence ls = single_source(s_src);
      if (!s_raw_axis) ls.sequence = aligned(ls.sequence);
      const SweepResult r = sweep(ls.sequence, s_min * pi, s_max * pi, s_samples);
      Sink sink(s_output, out);
      write_sweep_csv(sink.stream(), r, s_wavelength);
      return kExitOk;
    }

    if (*compare_cmd) {
      if (c_samples < 2 || !(c_min < c_max)) {
        err << "error: compare needs --samples >= 2 and --min < --max\n";
        return kExitUsage;
      }
      std::vector<LabeledSequence> all;
      for (const auto& f : c_files) {
        auto seqs = load_sequences(f);
        all.insert(all.end(), seqs.begin(), seqs.end());
      }
      if (!c_raw_axis)
        for (auto& ls : all) ls.sequence = aligned(ls.sequence);
      const auto rows = compare(all, c_thresholds, {c_min * pi, c_max * pi, c_samples});
      Sink sink(c_output, out);
      write_bandwidth_csv(sink.stream(), rows);
      return kExitOk;
    }
  } catch (const std::invalid_argument& e) {  // Sequence/Design errors
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace retarder::cli
