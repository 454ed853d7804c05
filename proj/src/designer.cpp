#include "retarder/designer.hpp"

#include "retarder/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>
#include <string>
#include <thread>

namespace retarder {

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::none: return "none";
    case Branch::re: return "re";
    case Branch::im: return "im";
  }
  return "none";
}

Branch parse_branch(std::string_view s) {
  if (s == "re") return Branch::re;
  if (s == "im") return Branch::im;
  if (s == "none") return Branch::none;
  throw DesignError("unknown branch '" + std::string(s) + "' (expected re or im)");
}

DesignProblem::DesignProblem(Family family, int n, Branch branch,
                             TargetKind target,
                             std::vector<DerivativeCondition> derivatives,
                             std::vector<std::size_t> free_angles,
                             std::vector<Angle> fixed_angles)
    : family_(family),
      n_(n),
      branch_(branch),
      target_(target),
      derivs_(std::move(derivatives)),
      free_(std::move(free_angles)),
      fixed_(std::move(fixed_angles)) {
  if (static_cast<int>(fixed_.size()) != n_)
    throw DesignError("angle template size does not match plate count");
}

int DesignProblem::max_order() const {
  int k = 0;
  for (const auto& d : derivs_) k = std::max(k, d.order);
  return k;
}

std::size_t DesignProblem::residual_count() const {
  std::size_t count = 3;
  for (const auto& d : derivs_) count += d.part == Part::both ? 2 : 1;
  return count;
}

std::vector<std::string> DesignProblem::condition_labels() const {
  std::vector<std::string> out{"target:Im(a)", "target:Re(b)", "target:Im(b)"};
  for (const auto& d : derivs_) {
    const std::string k = std::to_string(d.order);
    const std::string e = "J" + std::to_string(d.row + 1) + std::to_string(d.col + 1);
    if (d.part != Part::imag) out.push_back("Re d" + k + e);
    if (d.part != Part::real) out.push_back("Im d" + k + e);
  }
  return out;
}

SequenceSpec DesignProblem::sequence(std::span<const Angle> angles) const {
  return family_stack(family_, angles, target_);
}

std::vector<Angle> DesignProblem::expand(const Eigen::VectorXd& free_radians) const {
  std::vector<Angle> angles = fixed_;
  for (std::size_t i = 0; i < free_.size(); ++i)
    angles[free_[i]] = Angle{free_radians[static_cast<Eigen::Index>(i)]};
  return angles;
}

Eigen::VectorXd DesignProblem::residuals(std::span<const Angle> angles) const {
  const SequenceSpec seq = sequence(angles);
  const PhaseShift pi{std::numbers::pi};
  auto jet = jet_of_sequence<double>(seq, pi, max_order());
  if (seq.reflects()) jet = mirror_lr<double>() * jet;

  Eigen::VectorXd r(static_cast<Eigen::Index>(residual_count()));
  // M = J0^H E lies in SU(2): [[a, b], [-conj b, conj a]]. E equals J0 up to
  // a global sign iff a is real and b vanishes.
  const Mat2 m = target_matrix<double>(target_).adjoint() * jet.coefficient(0);
  const Complex<double> a = (m(0, 0) + std::conj(m(1, 1))) / 2.0;
  const Complex<double> b = (m(0, 1) - std::conj(m(1, 0))) / 2.0;
  Eigen::Index i = 0;
  r[i++] = a.imag();
  r[i++] = b.real();
  r[i++] = b.imag();
  for (const auto& d : derivs_) {
    const Complex<double> v = jet.derivative(d.order, d.row, d.col);
    if (d.part != Part::imag) r[i++] = v.real();
    if (d.part != Part::real) r[i++] = v.imag();
  }
  return r;
}

Eigen::VectorXd DesignProblem::residuals_free(const Eigen::VectorXd& x) const {
  const auto angles = expand(x);
  return residuals(angles);
}

bool admissible(Family family, int n, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (n > 21) return fail("plate counts above 21 are not supported");
  switch (family) {
    case Family::a:
      if (n < 3 || n % 2 == 0)
        return fail("family a needs an odd number N >= 3 of half-wave plates");
      return true;
    case Family::b:
      if (n < 2) return fail("family b needs N >= 2");
      return true;
    case Family::c:
      if (n < 2) return fail("family c needs N >= 2");
      return true;
    case Family::d:
      if (n < 3) return fail("family d needs N >= 3");
      return true;
    case Family::custom:
      return fail("custom stacks have no design conditions");
  }
  return false;
}

bool has_branch(Family family, int n) {
  switch (family) {
    case Family::a:
    case Family::c:
      return true;
    case Family::b:
      return n % 2 == 0;
    default:
      return false;
  }
}

DesignProblem assemble_problem(Family family, int n, Branch branch,
                               std::optional<TargetKind> target,
                               const DesignOptions& options) {
  std::string why;
  if (!admissible(family, n, &why)) throw DesignError(why);
  if (!has_branch(family, n)) branch = Branch::none;
  else if (branch == Branch::none) branch = Branch::re;
  const Part last = branch == Branch::re ? Part::real : Part::imag;

  std::vector<DerivativeCondition> derivs;
  int full = 0;
  int partial = 0;  // order of the partially nullified derivative, 0 if none
  switch (family) {
    case Family::a:
    case Family::c:
      full = n - 2;
      partial = n - 1;
      break;
    case Family::b:
      full = (n - 1) / 2;
      partial = n % 2 == 0 ? n / 2 : 0;
      break;
    case Family::d:
      full = n - 2;
      break;
    case Family::custom:
      break;
  }
  const bool reflects = family == Family::c || family == Family::d;
  auto require = [&](int k, Part part) {
    derivs.push_back({k, part, 0, 1});
    if (reflects) derivs.push_back({k, part, 0, 0});
  };
  for (int k = 1; k <= full; ++k) require(k, Part::both);
  if (partial > 0) require(partial, last);

  std::vector<std::size_t> free;
  // Families a and b fix theta_1 = 0; c and d leave every angle free.
  const std::size_t first_free = (family == Family::a || family == Family::b) ? 1 : 0;
  for (std::size_t k = first_free; k < static_cast<std::size_t>(n); ++k)
    free.push_back(k);

  DesignProblem problem(family, n, branch, target.value_or(default_target(family)),
                        std::move(derivs), std::move(free),
                        std::vector<Angle>(static_cast<std::size_t>(n), Angle{}));
  if (problem.max_order() > options.max_order)
    throw DesignError("design needs derivatives up to order " +
                      std::to_string(problem.max_order()) + ", above the limit " +
                      std::to_string(options.max_order));
  return problem;
}

namespace {

constexpr double kJacobianStep = 1e-6;

Eigen::MatrixXd numeric_jacobian(const DesignProblem& p, const Eigen::VectorXd& x) {
  const Eigen::Index m = static_cast<Eigen::Index>(p.residual_count());
  Eigen::MatrixXd jac(m, x.size());
  Eigen::VectorXd xp = x, xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + kJacobianStep;
    xm[j] = x[j] - kJacobianStep;
    jac.col(j) = (p.residuals_free(xp) - p.residuals_free(xm)) / (2 * kJacobianStep);
    xp[j] = xm[j] = x[j];
  }
  return jac;
}

Eigen::MatrixXd numeric_jacobian_at(const DesignProblem& p,
                                    std::vector<Angle> angles) {
  const auto& free = p.free_angles();
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(p.residual_count()),
                      static_cast<Eigen::Index>(free.size()));
  for (std::size_t j = 0; j < free.size(); ++j) {
    const Angle base = angles[free[j]];
    angles[free[j]] = Angle{base.radians + kJacobianStep};
    const Eigen::VectorXd rp = p.residuals(angles);
    angles[free[j]] = Angle{base.radians - kJacobianStep};
    const Eigen::VectorXd rm = p.residuals(angles);
    angles[free[j]] = base;
    jac.col(static_cast<Eigen::Index>(j)) = (rp - rm) / (2 * kJacobianStep);
  }
  return jac;
}

int numerical_rank(const Eigen::MatrixXd& jac) {
  if (jac.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > 1e-7 * s[0]) ++rank;
  return rank;
}

struct LmResult {
  Eigen::VectorXd x;
  double norm = HUGE_VAL;
  int iterations = 0;
};

LmResult levenberg_marquardt(const DesignProblem& p, Eigen::VectorXd x,
                             const DesignOptions& opt) {
  Eigen::VectorXd r = p.residuals_free(x);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  int it = 0;
  for (; it < opt.max_iterations && std::sqrt(cost) > opt.tolerance; ++it) {
    const Eigen::MatrixXd jac = numeric_jacobian(p, x);
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    const Eigen::VectorXd diag = a.diagonal().array() + 1e-12;
    bool accepted = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd damped = a;
      damped.diagonal() += lambda * diag;
      const Eigen::VectorXd step = damped.ldlt().solve(-g);
      if (!step.allFinite()) {
        lambda *= 4;
        continue;
      }
      const Eigen::VectorXd x_new = x + step;
      const Eigen::VectorXd r_new = p.residuals_free(x_new);
      const double cost_new = r_new.squaredNorm();
      if (cost_new < cost) {
        x = x_new;
        r = r_new;
        cost = cost_new;
        lambda = std::max(lambda / 3, 1e-15);
        accepted = true;
        break;
      }
      lambda *= 4;
      if (lambda > 1e12) break;
    }
    if (!accepted) break;  // stalled at a local minimum
  }
  return {x, std::sqrt(cost), it};
}

double wrap180(double deg) {
  double r = std::remainder(deg, 180.0);  // (-90, 90]
  if (r <= -90) r += 180;
  return r;
}

std::vector<double> derivative_profile(const SequenceSpec& seq, int order) {
  auto jet = jet_of_sequence<double>(seq, PhaseShift{std::numbers::pi}, order);
  if (seq.reflects()) jet = mirror_lr<double>() * jet;
  std::vector<double> out;
  for (int k = 1; k <= order; ++k) out.push_back(std::abs(jet.derivative(k, 0, 1)));
  return out;
}

double max_prescribed(const DesignProblem& p, const Eigen::VectorXd& r) {
  // Derivative entries follow the three target terms; a complex order is
  // measured by its modulus, a partial one by the prescribed part.
  double worst = 0;
  Eigen::Index i = 3;
  for (const auto& d : p.derivatives()) {
    if (d.part == Part::both) {
      worst = std::max(worst, std::hypot(r[i], r[i + 1]));
      i += 2;
    } else {
      worst = std::max(worst, std::abs(r[i]));
      i += 1;
    }
  }
  return worst;
}

}  // namespace

unsigned worker_count(unsigned requested) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency())
                              : requested;
  if (const char* env = std::getenv("RETARDER_FORGE_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

double angle_set_distance(std::span<const Angle> a, std::span<const Angle> b,
                          bool allow_rotation) {
  if (a.size() != b.size()) return HUGE_VAL;
  if (a.empty()) return 0;
  std::vector<double> diff(a.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    diff[k] = wrap180(a[k].degrees() - b[k].degrees());
  if (!allow_rotation) {
    double worst = 0;
    for (double d : diff) worst = std::max(worst, std::abs(d));
    return worst;
  }
  double best = HUGE_VAL;
  for (double anchor : diff) {
    double lo = HUGE_VAL, hi = -HUGE_VAL;
    for (double d : diff) {
      const double e = wrap180(d - anchor);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    best = std::min(best, (hi - lo) / 2);
  }
  return best;
}

std::vector<DesignSolution> solve(const DesignProblem& problem, int starts,
                                  std::uint64_t seed, const DesignOptions& options) {
  if (starts < 1) throw DesignError("solve needs at least one start");
  const std::size_t nfree = problem.free_angles().size();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, std::numbers::pi);
  std::vector<Eigen::VectorXd> start_points(static_cast<std::size_t>(starts));
  for (auto& x : start_points) {
    x.resize(static_cast<Eigen::Index>(nfree));
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = uniform(rng);
  }

  std::vector<LmResult> results(start_points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s = next++; s < start_points.size(); s = next++)
      results[s] = levenberg_marquardt(problem, start_points[s], options);
  };
  const unsigned nthreads =
      std::min<unsigned>(worker_count(options.threads), static_cast<unsigned>(starts));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<DesignSolution> out;
  for (std::size_t s = 0; s < results.size(); ++s) {
    const LmResult& res = results[s];
    if (!(res.norm <= options.tolerance)) continue;
    std::vector<Angle> angles = problem.expand(res.x);
    for (auto& a : angles) {
      double deg = std::fmod(a.degrees(), 180.0);
      if (deg < 0) deg += 180.0;
      if (deg >= 180.0) deg -= 180.0;
      a = Angle::from_degrees(deg);
    }
    bool duplicate = false;
    for (const auto& kept : out)
      if (angle_set_distance(kept.angles, angles) <= options.dedup_degrees) {
        duplicate = true;
        break;
      }
    if (duplicate) continue;

    DesignSolution sol;
    sol.family = problem.family();
    sol.n = problem.plate_count();
    sol.target = problem.target();
    sol.branch = problem.branch();
    sol.residual_norm = problem.residuals(angles).norm();
    const SequenceSpec seq = problem.sequence(angles);
    sol.derivative_profile = derivative_profile(seq, problem.max_order());
    sol.fidelity = fidelity_at(seq, seq.target_retarder().nominal_phase());
    sol.free_count = static_cast<int>(nfree);
    sol.jacobian_rank = numerical_rank(numeric_jacobian(problem, res.x));
    sol.iterations = res.iterations;
    sol.provenance.seed = seed;
    sol.provenance.start_index = static_cast<int>(s);
    for (Eigen::Index j = 0; j < start_points[s].size(); ++j)
      sol.provenance.start_degrees.push_back(start_points[s][j] * 180 / std::numbers::pi);
    sol.angles = std::move(angles);
    out.push_back(std::move(sol));
  }
  return out;
}

std::vector<DesignSolution> design(Family family, int n, Branch branch,
                                   bool both_branches, int starts,
                                   std::uint64_t seed,
                                   std::optional<TargetKind> target,
                                   const DesignOptions& options) {
  std::vector<Branch> branches;
  if (!has_branch(family, n)) branches = {Branch::none};
  else if (both_branches) branches = {Branch::re, Branch::im};
  else branches = {branch == Branch::none ? Branch::re : branch};
  std::vector<DesignSolution> all;
  for (Branch b : branches) {
    const DesignProblem p = assemble_problem(family, n, b, target, options);
    auto sols = solve(p, starts, seed, options);
    all.insert(all.end(), sols.begin(), sols.end());
  }
  return all;
}

Verification verify_angles(Family family, std::span<const Angle> angles,
                           std::optional<TargetKind> target,
                           const DesignOptions& options) {
  const int n = static_cast<int>(angles.size());
  std::string why;
  const SequenceSpec raw = build_sequence(family, angles, target);
  if (!admissible(family, n, &why)) throw DesignError(why);

  Verification v;
  v.fidelity_raw = fidelity_at(raw, raw.target_retarder().nominal_phase());
  const AxisAlignment align = best_axis_offset(raw);
  v.alignment_offset = align.offset;
  std::vector<Angle> rotated_angles(angles.begin(), angles.end());
  for (auto& a : rotated_angles) a = a + align.offset;

  std::vector<Branch> branches = has_branch(family, n)
                                     ? std::vector<Branch>{Branch::re, Branch::im}
                                     : std::vector<Branch>{Branch::none};
  std::optional<DesignProblem> best;
  Eigen::VectorXd best_r;
  for (Branch b : branches) {
    DesignProblem p = assemble_problem(family, n, b, raw.target, options);
    // Target terms on the aligned stack, derivative terms at the given angles.
    Eigen::VectorXd r = p.residuals(angles);
    r.head(3) = p.residuals(rotated_angles).head(3);
    v.branches.push_back({b, r.norm(), max_prescribed(p, r)});
    if (!best || r.norm() < best_r.norm()) {
      best.emplace(std::move(p));
      best_r = r;
    }
  }

  DesignSolution& s = v.solution;
  s.family = family;
  s.n = n;
  s.target = raw.target;
  s.branch = best->branch();
  s.angles.assign(angles.begin(), angles.end());
  s.residual_norm = best_r.norm();
  const SequenceSpec seq = best->sequence(rotated_angles);
  s.derivative_profile = derivative_profile(seq, best->max_order());
  s.fidelity = align.fidelity;
  s.free_count = static_cast<int>(best->free_angles().size());
  s.jacobian_rank = numerical_rank(numeric_jacobian_at(*best, rotated_angles));
  v.target_residual = best_r.head(3).norm();
  v.max_prescribed_derivative = max_prescribed(*best, best_r);
  return v;
}

}  // namespace retarder
