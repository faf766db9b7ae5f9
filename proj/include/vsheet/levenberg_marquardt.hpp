#pragma once

#include "vsheet/linearization.hpp"

#include <Eigen/Cholesky>

#include <functional>
#include <string>
#include <vector>

namespace vsheet {

struct LmOptions {
  double tol_residual_sup = 1e-10;
  int max_iter = 200;
  double lambda0 = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double lambda_max = 1e12;
  double fd_step = 1e-6;      // Jacobian column step, scaled by max(1, |x_i|)
  bool node_residual = false; // overdetermined raw-node least squares instead
                              // of the square coefficient projection
};

template <typename Scalar>
struct GenericSolveReport {
  VectorX<Scalar> x;
  Scalar residual_sup{0};
  Scalar residual_l2{0};
  int iterations{0};
  Scalar lambda_final{0};
  bool converged{false};
  std::string message;
  std::vector<Scalar> accepted_l2_history;
};

/// Classic Levenberg-Marquardt: solve (J^T J + lambda diag(J^T J)) s = -J^T f,
/// accept the step when ||f||_2 decreases (lambda /= lambda_down), otherwise
/// raise lambda and retry.  Stops on the convergence predicate, on step
/// stagnation ||s|| <= 1e-14 (1 + ||x||), or at max_iter.  A residual that
/// throws GeometryError at a trial point costs a rejection, not a crash; the
/// report always carries the last good iterate.
template <typename Scalar, typename ResidualFn, typename JacobianFn>
GenericSolveReport<Scalar> lm_solve(
    ResidualFn&& residual, JacobianFn&& jacobian, VectorX<Scalar> x0, const LmOptions& opts,
    const std::function<bool(const VectorX<Scalar>&, const VectorX<Scalar>&)>& converged_check =
        {}) {
  GenericSolveReport<Scalar> rep;
  auto is_converged = [&](const VectorX<Scalar>& x, const VectorX<Scalar>& f) {
    if (converged_check) return converged_check(x, f);
    return f.template lpNorm<Eigen::Infinity>() <= Scalar(opts.tol_residual_sup);
  };

  VectorX<Scalar> x = std::move(x0);
  VectorX<Scalar> f = residual(x);  // precondition: finite at x0; throws otherwise
  Scalar f_l2 = f.norm();
  rep.accepted_l2_history.push_back(f_l2);
  Scalar lambda = Scalar(opts.lambda0);

  auto finish = [&](bool conv, const std::string& msg) {
    rep.x = x;
    rep.residual_sup = f.template lpNorm<Eigen::Infinity>();
    rep.residual_l2 = f_l2;
    rep.lambda_final = lambda;
    rep.converged = conv;
    rep.message = msg;
    return rep;
  };

  if (is_converged(x, f)) return finish(true, "converged at the initial point");

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    MatrixX<Scalar> jac;
    try {
      jac = jacobian(x);
    } catch (const GeometryError& e) {
      return finish(false, std::string("Jacobian failed: ") + e.what());
    }
    const MatrixX<Scalar> jtj = jac.transpose() * jac;
    const VectorX<Scalar> jtf = jac.transpose() * f;
    VectorX<Scalar> damping = jtj.diagonal().cwiseMax(Scalar(1e-30));

    bool accepted = false;
    while (!accepted) {
      MatrixX<Scalar> a = jtj;
      a.diagonal() += lambda * damping;
      Eigen::LDLT<MatrixX<Scalar>> ldlt(a);
      VectorX<Scalar> step;
      bool solvable = ldlt.info() == Eigen::Success;
      if (solvable) {
        step = ldlt.solve(-jtf);
        solvable = step.allFinite();
      }
      if (solvable) {
        if (step.norm() <= Scalar(1e-14) * (Scalar(1) + x.norm()))
          return finish(is_converged(x, f), "step stagnated");
        bool trial_ok = true;
        VectorX<Scalar> f_new;
        try {
          f_new = residual(x + step);
        } catch (const GeometryError&) {
          trial_ok = false;
        }
        if (trial_ok && f_new.allFinite() && f_new.norm() < f_l2) {
          x += step;
          f = std::move(f_new);
          f_l2 = f.norm();
          rep.accepted_l2_history.push_back(f_l2);
          ++rep.iterations;
          lambda = std::max(lambda / Scalar(opts.lambda_down), Scalar(1e-16));
          accepted = true;
          break;
        }
      }
      lambda *= Scalar(opts.lambda_up);
      if (lambda > Scalar(opts.lambda_max))
        return finish(false, "no acceptable step with lambda at its cap");
    }
    if (is_converged(x, f)) return finish(true, "converged");
  }
  return finish(false, "iteration limit reached");
}

/// The generic entry point: Jacobian by plain central differences of the
/// residual, step fd_step * max(1, |x_i|).
template <typename Scalar, typename ResidualFn>
GenericSolveReport<Scalar> solve(ResidualFn&& residual, VectorX<Scalar> x0,
                                 const LmOptions& opts = {}) {
  auto fd_jac = [&](const VectorX<Scalar>& x) {
    VectorX<Scalar> xp = x;
    MatrixX<Scalar> jac;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Scalar h = Scalar(opts.fd_step) * std::max(Scalar(1), std::abs(x[i]));
      xp[i] = x[i] + h;
      const VectorX<Scalar> fp = residual(xp);
      xp[i] = x[i] - h;
      const VectorX<Scalar> fm = residual(xp);
      xp[i] = x[i];
      if (jac.size() == 0) jac.resize(fp.size(), x.size());
      jac.col(i) = (fp - fm) / (Scalar(2) * h);
    }
    return jac;
  };
  return lm_solve<Scalar>(residual, fd_jac, std::move(x0), opts);
}

template <typename Scalar>
struct SolveReport {
  SheetState<Scalar> state;
  Scalar residual_sup{0};  // sup of the solved residual vector; converged => <= tol
  Scalar residual_l2{0};
  Scalar field_sup{0};     // sup of the assembled grid residual (carries the
  Scalar field_l2{0};      // truncation tail the 2N unknowns cannot cancel)
  int iterations{0};
  Scalar lambda_final{0};
  bool converged{false};
  std::string message;
};

namespace detail {

/// FD Jacobian of the raw node residual, with the same kernel reuse for
/// gamma columns as the coefficient-space fd_jacobian.
template <typename Scalar>
MatrixX<Scalar> fd_jacobian_nodes(const ResidualEvaluator<Scalar>& ev,
                                  const SheetState<Scalar>& state, const UnknownLayout& layout,
                                  Scalar fixed, Scalar h) {
  const VectorX<Scalar> x0 = flatten(layout, state);
  auto base_geom = ev.make_geometry(state);
  base_geom->materialize_kernels();
  MatrixX<Scalar> jac;
  VectorX<Scalar> x = x0;
  for (Eigen::Index i = 0; i < layout.size(); ++i) {
    const Scalar hi = h * std::max(Scalar(1), std::abs(x0[i]));
    auto eval_at = [&](Scalar value) {
      x[i] = value;
      const SheetState<Scalar> s = unflatten(layout, x, fixed, state.omega);
      return ev.residual_nodes(layout.column_touches_r(i)
                                   ? ev.residual(s)
                                   : ev.residual_with_geometry(*base_geom, s));
    };
    const VectorX<Scalar> fp = eval_at(x0[i] + hi);
    const VectorX<Scalar> fm = eval_at(x0[i] - hi);
    x[i] = x0[i];
    if (jac.size() == 0) jac.resize(fp.size(), layout.size());
    jac.col(i) = (fp - fm) / (Scalar(2) * hi);
  }
  return jac;
}

}  // namespace detail

/// Solve the collocation system with either r_1 or b held fixed, starting
/// from `guess` (its r_1 respectively b slot is overridden by `fixed`).
/// Convergence is judged on the residual vector the iteration drives (the
/// projected Fourier coefficients by default); the assembled grid field,
/// whose sup-norm also carries the truncation tail, is reported alongside.
template <typename Scalar>
SolveReport<Scalar> solve_sheet(SolveMode mode, Scalar fixed, const SheetState<Scalar>& guess,
                                const ResidualEvaluator<Scalar>& ev, const LmOptions& opts = {}) {
  const UnknownLayout layout{mode, std::max(guess.g.n_modes(), guess.r.n_modes())};
  if (layout.n_modes != ev.n_modes())
    throw std::invalid_argument("solve_sheet: evaluator truncation does not match the guess");
  const Scalar omega = guess.omega;

  auto residual = [&](const VectorX<Scalar>& x) -> VectorX<Scalar> {
    const auto field = ev.residual(unflatten(layout, x, fixed, omega));
    return opts.node_residual ? ev.residual_nodes(field) : ev.residual_coeffs(field);
  };
  auto jacobian = [&](const VectorX<Scalar>& x) -> MatrixX<Scalar> {
    const SheetState<Scalar> s = unflatten(layout, x, fixed, omega);
    if (opts.node_residual)
      return detail::fd_jacobian_nodes(ev, s, layout, fixed, Scalar(opts.fd_step));
    return fd_jacobian(ev, s, layout, Scalar(opts.fd_step)).m;
  };

  auto generic = lm_solve<Scalar>(residual, jacobian, flatten(layout, guess), opts);

  SolveReport<Scalar> rep;
  rep.state = unflatten(layout, generic.x, fixed, omega);
  rep.residual_sup = generic.residual_sup;
  rep.residual_l2 = generic.residual_l2;
  rep.iterations = generic.iterations;
  rep.lambda_final = generic.lambda_final;
  rep.converged = generic.converged;
  rep.message = generic.message;
  const auto field = ev.residual(rep.state);
  rep.field_sup = field.sup_norm;
  rep.field_l2 = field.l2_norm;
  return rep;
}

template <typename Scalar>
SolveReport<Scalar> solve_sheet(SolveMode mode, Scalar fixed, const SheetState<Scalar>& guess,
                                const Grid<Scalar>& grid, const LmOptions& opts = {}) {
  ResidualEvaluator<Scalar> ev(grid, std::max(guess.g.n_modes(), guess.r.n_modes()));
  return solve_sheet(mode, fixed, guess, ev, opts);
}

}  // namespace vsheet
