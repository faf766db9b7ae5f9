#pragma once

#include "vsheet/levenberg_marquardt.hpp"
#include "vsheet/reduced.hpp"

#include <optional>
#include <vector>

namespace vsheet {

enum class ContinuationParameter { b, r1 };

/// Natural-parameter continuation setup.  `sign` selects the branch for
/// linear-theory seeding: the branch behaves like b = 2 + sign 2 r1 near the
/// bifurcation point when continuing in r1, and like r1 = sign |b - 2| / 2
/// when continuing in b.  A seed_state, when present, replaces linear theory
/// for the first step (resuming a stored branch).
template <typename Scalar>
struct ContinuationConfig {
  ContinuationParameter parameter = ContinuationParameter::r1;
  Scalar start = Scalar(0.125);
  Scalar step = Scalar(0.001);
  int n_steps = 825;  // default run caps at r1 <= 0.95
  int sign = +1;
  std::optional<SheetState<Scalar>> seed_state;
  Eigen::Index n_modes = 160;
  Eigen::Index n_theta = 1024;
  LmOptions solver;
  Scalar max_coeff_jump_factor = Scalar(50);  // branch-continuity guard
  Scalar max_field_residual = Scalar(1e-9);   // assembled-field quality bound
};

template <typename Scalar>
struct BranchPoint {
  Scalar r1;
  Scalar b;
  SheetState<Scalar> state;
  Scalar residual_sup;
  int step_index;
};

template <typename Scalar>
struct BranchResult {
  std::vector<BranchPoint<Scalar>> points;
  bool completed{false};
  std::string diagnostic;
};

namespace detail {

template <typename Scalar>
Scalar coeff_distance(const SheetState<Scalar>& a, const SheetState<Scalar>& b) {
  Scalar m = std::abs(a.b - b.b);
  m = std::max(m, (a.g.coeffs() - b.g.coeffs()).template lpNorm<Eigen::Infinity>());
  m = std::max(m, (a.r.coeffs() - b.r.coeffs()).template lpNorm<Eigen::Infinity>());
  return m;
}

}  // namespace detail

/// Trace one branch by stepping the continuation parameter and re-solving
/// from the previous converged state.  Emits only converged points.  Each
/// point is re-verified with a fresh residual assembly: the solved
/// projections must meet the solver tolerance again, and the assembled grid
/// field must stay under max_field_residual (the truncation-quality bound).
/// A failure on the very first step throws; a failure mid-branch truncates
/// the result with a diagnostic.
template <typename Scalar>
BranchResult<Scalar> continue_branch(const ContinuationConfig<Scalar>& config) {
  if (config.step == Scalar(0)) throw std::invalid_argument("continue_branch: step must be nonzero");
  if (config.n_theta < 4 * config.n_modes)
    throw std::invalid_argument("continue_branch: need N_theta >= 4 N");
  if (config.sign != 1 && config.sign != -1)
    throw std::invalid_argument("continue_branch: sign must be +-1");

  const Grid<Scalar> grid(config.n_theta);
  const ResidualEvaluator<Scalar> ev(grid, config.n_modes);
  const SolveMode mode =
      config.parameter == ContinuationParameter::r1 ? SolveMode::fix_r1 : SolveMode::fix_b;

  auto initial_guess = [&](Scalar value) -> SheetState<Scalar> {
    if (config.seed_state) {
      SheetState<Scalar> s = *config.seed_state;
      if (s.g.n_modes() != config.n_modes) {
        SheetState<Scalar> padded = SheetState<Scalar>::trivial(s.b, config.n_modes, s.omega);
        const Eigen::Index common = std::min(s.g.n_modes(), config.n_modes);
        padded.g.coeffs().head(common) = s.g.coeffs().head(common);
        padded.r.coeffs().head(common) = s.r.coeffs().head(common);
        s = padded;
      }
      return s;
    }
    if (config.parameter == ContinuationParameter::b)
      return local_branch_predict(value, config.sign, config.n_modes);
    SheetState<Scalar> s = SheetState<Scalar>::trivial(
        Scalar(2) + Scalar(config.sign) * Scalar(2) * value, config.n_modes);
    s.r.coeff(1) = value;
    return s;
  };

  // verification uses its own evaluator so no solver bookkeeping is trusted
  const ResidualEvaluator<Scalar> verify_ev(grid, config.n_modes);

  BranchResult<Scalar> out;
  SheetState<Scalar> prev;
  for (int i = 0; i < config.n_steps; ++i) {
    const Scalar value = config.start + Scalar(i) * config.step;
    const SheetState<Scalar> guess = (i == 0) ? initial_guess(value) : prev;

    auto fail = [&](const std::string& what) {
      if (i == 0)
        throw std::runtime_error("continue_branch: first step failed (" + what +
                                 "); start closer to the bifurcation point, relax the "
                                 "tolerance, or refine the truncation");
      out.diagnostic =
          "step " + std::to_string(i) + " (parameter " + std::to_string(value) + "): " + what;
    };

    SolveReport<Scalar> rep;
    try {
      rep = solve_sheet(mode, value, guess, ev, config.solver);
    } catch (const GeometryError& e) {
      if (i == 0) throw;
      fail(e.what());
      return out;
    }
    if (!rep.converged) {
      fail("solver did not converge: " + rep.message);
      return out;
    }

    const auto field = verify_ev.residual(rep.state);
    const Scalar proj_sup =
        verify_ev.residual_coeffs(field).template lpNorm<Eigen::Infinity>();
    if (proj_sup > Scalar(config.solver.tol_residual_sup)) {
      fail("independent projection check failed (" + std::to_string(proj_sup) + ")");
      return out;
    }
    if (field.sup_norm > config.max_field_residual) {
      fail("assembled field residual " + std::to_string(field.sup_norm) +
           " exceeds the quality bound; the truncation no longer resolves this state");
      return out;
    }
    if (i > 0) {
      const Scalar jump = detail::coeff_distance(rep.state, prev);
      if (jump > config.max_coeff_jump_factor * std::abs(config.step)) {
        fail("branch jump suspected (coefficient change " + std::to_string(jump) + ")");
        return out;
      }
    }

    out.points.push_back({rep.state.r.n_modes() >= 1 ? rep.state.r.coeff(1) : Scalar(0),
                          rep.state.b, rep.state, field.sup_norm, i});
    prev = rep.state;
  }
  out.completed = true;
  return out;
}

template <typename Scalar>
struct FoldLocation {
  Scalar r1_at_fold;
  Scalar b_at_fold;
};

/// Locate a fold (interior minimum of b along the branch) from a quadratic
/// fit of the three points around the discrete minimum; none when b is
/// monotone across the branch.
template <typename Scalar>
std::optional<FoldLocation<Scalar>> detect_fold(const std::vector<BranchPoint<Scalar>>& branch) {
  if (branch.size() < 3) throw std::invalid_argument("detect_fold: need at least 3 points");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < Eigen::Index(branch.size()); ++i)
    if (branch[i].b < branch[best].b) best = i;
  if (best == 0 || best == Eigen::Index(branch.size()) - 1) return std::nullopt;

  const Scalar x1 = branch[best - 1].r1, y1 = branch[best - 1].b;
  const Scalar x2 = branch[best].r1, y2 = branch[best].b;
  const Scalar x3 = branch[best + 1].r1, y3 = branch[best + 1].b;
  // exact quadratic through the three bracketing points
  const Scalar d21 = (y2 - y1) / (x2 - x1);
  const Scalar d32 = (y3 - y2) / (x3 - x2);
  const Scalar a = (d32 - d21) / (x3 - x1);
  if (a <= Scalar(0)) return FoldLocation<Scalar>{x2, y2};
  const Scalar xv = (x1 + x2) / Scalar(2) - d21 / (Scalar(2) * a);
  const Scalar yv = y1 + d21 * (xv - x1) + a * (xv - x1) * (xv - x2);
  return FoldLocation<Scalar>{xv, yv};
}

/// Least-squares slope of b against r1 over the points with |r1| <= window.
template <typename Scalar>
Scalar branch_slope(const std::vector<BranchPoint<Scalar>>& branch,
                    Scalar window = Scalar(0.05)) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < Eigen::Index(branch.size()); ++i)
    if (std::abs(branch[i].r1) <= window) idx.push_back(i);
  if (idx.size() < 5)
    throw std::invalid_argument("branch_slope: need at least 5 points with |r1| <= window");
  Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (Eigen::Index i : idx) {
    sx += branch[i].r1;
    sy += branch[i].b;
    sxx += branch[i].r1 * branch[i].r1;
    sxy += branch[i].r1 * branch[i].b;
  }
  const Scalar n = Scalar(idx.size());
  const Scalar denom = n * sxx - sx * sx;
  if (denom == Scalar(0)) throw std::invalid_argument("branch_slope: r1 values are degenerate");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace vsheet
