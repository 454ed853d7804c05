// Derivative-nullification design problems for the four composite retarder
// families, and a multi-start Levenberg-Marquardt solver for them.
#pragma once

#include "retarder/jet.hpp"
#include "retarder/sequence.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace retarder {

class DesignError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Which part of the last, partially nullified derivative is prescribed.
enum class Branch { none, re, im };

std::string_view to_string(Branch b);
Branch parse_branch(std::string_view s);

enum class Part { both, real, imag };

/// d^order of element (row, col) of the stack's retarder matrix at pi.
struct DerivativeCondition {
  int order;
  Part part;
  int row = 0;
  int col = 1;
};

struct DesignOptions {
  int max_order = kDefaultMaxJetOrder;
  int max_iterations = 200;
  double tolerance = 1e-10;     // accepted residual norm
  double dedup_degrees = 0.05;  // after mod-180 and rotation canonicalization
  unsigned threads = 0;         // 0: hardware concurrency, capped by env
};

/// Residual system for one family and plate count. Residuals are, in order:
/// three target-equality terms at phi = pi (traceless part of J0^H J, which
/// vanishes iff J equals J0 up to a global phase), then the real and/or
/// imaginary parts of d^k J12/dphi^k at pi for every prescribed order. For
/// reflecting stacks every order constrains the whole retarder matrix
/// (elements 11 and 12; the rest follow by unitarity).
class DesignProblem {
 public:
  DesignProblem(Family family, int n, Branch branch, TargetKind target,
                std::vector<DerivativeCondition> derivatives,
                std::vector<std::size_t> free_angles,
                std::vector<Angle> fixed_angles);

  Family family() const { return family_; }
  int plate_count() const { return n_; }
  Branch branch() const { return branch_; }
  TargetKind target() const { return target_; }
  const std::vector<DerivativeCondition>& derivatives() const { return derivs_; }
  /// Indices (0-based) of the angles the solver varies.
  const std::vector<std::size_t>& free_angles() const { return free_; }
  /// Template angle vector; entries not listed in free_angles stay fixed.
  const std::vector<Angle>& fixed_angles() const { return fixed_; }
  int max_order() const;
  std::size_t residual_count() const;
  std::vector<std::string> condition_labels() const;

  SequenceSpec sequence(std::span<const Angle> angles) const;
  /// Residuals at a full angle vector (all N plates).
  Eigen::VectorXd residuals(std::span<const Angle> angles) const;
  /// Residuals with the free angles replaced by `free_radians`.
  Eigen::VectorXd residuals_free(const Eigen::VectorXd& free_radians) const;
  std::vector<Angle> expand(const Eigen::VectorXd& free_radians) const;

 private:
  Family family_;
  int n_;
  Branch branch_;
  TargetKind target_;
  std::vector<DerivativeCondition> derivs_;
  std::vector<std::size_t> free_;
  std::vector<Angle> fixed_;
};

/// Smallest admissible plate count per family: a 3 (odd), b 2, c 2, d 3.
bool admissible(Family family, int n, std::string* why = nullptr);

/// True when the family and N carry a Re/Im choice on the last derivative.
bool has_branch(Family family, int n);

/// Throws DesignError for inadmissible N or a required derivative order
/// above options.max_order. `branch` is ignored (none) when the family has
/// no partial condition at this N.
DesignProblem assemble_problem(Family family, int n, Branch branch = Branch::re,
                               std::optional<TargetKind> target = std::nullopt,
                               const DesignOptions& options = {});

struct Provenance {
  std::uint64_t seed = 0;
  int start_index = -1;  // -1: not produced by the solver
  std::vector<double> start_degrees;
};

struct DesignSolution {
  Family family = Family::a;
  int n = 0;
  TargetKind target = TargetKind::half;
  Branch branch = Branch::none;
  std::vector<Angle> angles;
  double residual_norm = 0;
  /// |d^k J12 / dphi^k| of the retarder matrix at pi, k = 1..max order.
  std::vector<double> derivative_profile;
  double fidelity = 0;     // at pi, against the target
  int jacobian_rank = 0;   // numerical rank of the residual Jacobian
  int free_count = 0;
  int iterations = 0;
  Provenance provenance;
};

/// Multi-start damped least squares. Start points are uniform in [0, 180)
/// per free angle, drawn in start order from a seeded generator; starts may
/// run concurrently. Returns converged, deduplicated solutions ordered by
/// start index. No convergence yields an empty list.
std::vector<DesignSolution> solve(const DesignProblem& problem, int starts,
                                  std::uint64_t seed,
                                  const DesignOptions& options = {});

/// Solve both branches when the family/N has one; otherwise the single system.
std::vector<DesignSolution> design(Family family, int n, Branch branch_or_none,
                                   bool both_branches, int starts,
                                   std::uint64_t seed,
                                   std::optional<TargetKind> target = std::nullopt,
                                   const DesignOptions& options = {});

struct BranchCheck {
  Branch branch;
  double residual_norm;
  double max_prescribed_derivative;
};

struct Verification {
  DesignSolution solution;  // best branch, evaluated on the aligned stack
  Angle alignment_offset;   // common rotation applied before evaluation
  double fidelity_raw = 0;  // at pi, angles as given
  double target_residual = 0;
  double max_prescribed_derivative = 0;
  std::vector<BranchCheck> branches;
};

/// Evaluate the family's conditions at given angles without solving. The
/// stack is first rotated as a whole onto its target axis (a symmetry of
/// every condition but the axis orientation); both Re/Im branches are
/// reported where applicable and the better one is selected.
Verification verify_angles(Family family, std::span<const Angle> angles,
                           std::optional<TargetKind> target = std::nullopt,
                           const DesignOptions& options = {});

/// Smallest max over k of |a_k - b_k - delta| (mod 180) over common offsets
/// delta; with `allow_rotation` false, delta is 0. Degrees.
double angle_set_distance(std::span<const Angle> a, std::span<const Angle> b,
                          bool allow_rotation = true);

/// Worker count for parallel starts: `requested` (0 = hardware), capped by
/// RETARDER_FORGE_THREADS when set.
unsigned worker_count(unsigned requested);

}  // namespace retarder
