#pragma once

#include "vsheet/functional.hpp"
#include "vsheet/layout.hpp"

#include <Eigen/SVD>

#include <utility>
#include <vector>

namespace vsheet {

/// 2x2 block M_n of DF(b,0,0) acting on the (g, r) coefficient pair of
/// wavenumber 2n:
///
///   M_n = [ -1/2          -2n (omega - b/2) ]
///         [ b/2 - omega    b^2 (n - 1)      ]
template <typename Scalar>
struct ModeMatrix {
  Eigen::Index n;
  Scalar b;
  Scalar omega;
  Eigen::Matrix<Scalar, 2, 2> entries;
};

template <typename Scalar>
ModeMatrix<Scalar> mode_matrix(Scalar b, Scalar omega, Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("mode_matrix: n must be >= 1");
  ModeMatrix<Scalar> m{n, b, omega, {}};
  m.entries(0, 0) = Scalar(-0.5);
  m.entries(0, 1) = Scalar(-2 * n) * (omega - b / Scalar(2));
  m.entries(1, 0) = b / Scalar(2) - omega;
  m.entries(1, 1) = b * b * Scalar(n - 1);
  return m;
}

/// DF(b,0,0)[g, r] per mode: returns the F1 sine series and F2 cosine series.
template <typename Scalar>
std::pair<FourierSeries<Scalar>, FourierSeries<Scalar>> apply_linearization(
    Scalar b, Scalar omega, const FourierSeries<Scalar>& g, const FourierSeries<Scalar>& r) {
  if (g.parity() != Parity::cosine || r.parity() != Parity::cosine)
    throw std::invalid_argument("apply_linearization: g and r must have cosine parity");
  if (g.constant() != Scalar(0) || r.constant() != Scalar(0))
    throw std::invalid_argument("apply_linearization: g and r must have zero constant");
  const Eigen::Index n = std::max(g.n_modes(), r.n_modes());
  FourierSeries<Scalar> f1(Parity::sine, n);
  FourierSeries<Scalar> f2(Parity::cosine, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    const auto m = mode_matrix(b, omega, k);
    const Scalar a = k <= g.n_modes() ? g.coeff(k) : Scalar(0);
    const Scalar c = k <= r.n_modes() ? r.coeff(k) : Scalar(0);
    f1.coeff(k) = m.entries(0, 0) * a + m.entries(0, 1) * c;
    f2.coeff(k) = m.entries(1, 0) * a + m.entries(1, 1) * c;
  }
  return {std::move(f1), std::move(f2)};
}

/// Dense Jacobian of the projected residual with column labels.
template <typename Scalar>
struct JacobianMatrix {
  MatrixX<Scalar> m;
  UnknownLayout layout;

  /// For the fix_b layout at a trivial state this is the FD image of M_n.
  Eigen::Matrix<Scalar, 2, 2> mode_block(Eigen::Index n) const {
    if (layout.mode != SolveMode::fix_b)
      throw std::invalid_argument("mode_block: defined for the fix_b layout");
    const Eigen::Index g_col = n - 1, r_col = layout.n_modes + n - 1;
    const Eigen::Index f1_row = n - 1, f2_row = layout.n_modes + n - 1;
    Eigen::Matrix<Scalar, 2, 2> blk;
    blk(0, 0) = m(f1_row, g_col);
    blk(0, 1) = m(f1_row, r_col);
    blk(1, 0) = m(f2_row, g_col);
    blk(1, 1) = m(f2_row, r_col);
    return blk;
  }
};

/// Central-difference Jacobian of the projected residual with respect to the
/// layout's unknowns, step h max(1, |x_i|) per column.  Columns that leave r
/// untouched reuse the base-state kernels.
template <typename Scalar>
JacobianMatrix<Scalar> fd_jacobian(const ResidualEvaluator<Scalar>& ev,
                                   const SheetState<Scalar>& state, const UnknownLayout& layout,
                                   Scalar h) {
  if (h <= Scalar(0)) throw std::invalid_argument("fd_jacobian: step must be positive");
  const Scalar fixed = layout.mode == SolveMode::fix_r1
                           ? (layout.n_modes >= 1 ? state.r.coeff(1) : Scalar(0))
                           : state.b;
  const VectorX<Scalar> x0 = flatten(layout, state);

  auto base_geom = ev.make_geometry(state);
  base_geom->materialize_kernels();

  JacobianMatrix<Scalar> jac{MatrixX<Scalar>(layout.size(), layout.size()), layout};
  VectorX<Scalar> x = x0;
  for (Eigen::Index i = 0; i < layout.size(); ++i) {
    const Scalar hi = h * std::max(Scalar(1), std::abs(x0[i]));
    try {
      VectorX<Scalar> cp, cm;
      x[i] = x0[i] + hi;
      if (layout.column_touches_r(i)) {
        cp = ev.residual_coeffs(ev.residual(unflatten(layout, x, fixed, state.omega)));
        x[i] = x0[i] - hi;
        cm = ev.residual_coeffs(ev.residual(unflatten(layout, x, fixed, state.omega)));
      } else {
        cp = ev.residual_coeffs(
            ev.residual_with_geometry(*base_geom, unflatten(layout, x, fixed, state.omega)));
        x[i] = x0[i] - hi;
        cm = ev.residual_coeffs(
            ev.residual_with_geometry(*base_geom, unflatten(layout, x, fixed, state.omega)));
      }
      jac.m.col(i) = (cp - cm) / (Scalar(2) * hi);
    } catch (const GeometryError& e) {
      throw GeometryError("fd_jacobian: perturbed state inadmissible for unknown " +
                          layout.label(i) + ": " + e.what(), e.node());
    }
    x[i] = x0[i];
  }
  return jac;
}

template <typename Scalar>
JacobianMatrix<Scalar> fd_jacobian(const SheetState<Scalar>& state, const Grid<Scalar>& grid,
                                   const UnknownLayout& layout, Scalar h) {
  ResidualEvaluator<Scalar> ev(grid, layout.n_modes);
  return fd_jacobian(ev, state, layout, h);
}

/// Smallest singular value of M_n per mode; near-singular modes are flagged.
template <typename Scalar>
struct KernelReportRow {
  Eigen::Index n;
  Scalar sigma_min;
  bool flagged;
};

template <typename Scalar>
std::vector<KernelReportRow<Scalar>> kernel_report(Scalar b, Scalar omega, Eigen::Index n_max,
                                                   Scalar threshold = Scalar(1e-12)) {
  if (n_max < 1) throw std::invalid_argument("kernel_report: n_max must be >= 1");
  std::vector<KernelReportRow<Scalar>> rows;
  rows.reserve(n_max);
  for (Eigen::Index n = 1; n <= n_max; ++n) {
    const auto m = mode_matrix(b, omega, n);
    Eigen::JacobiSVD<Eigen::Matrix<Scalar, 2, 2>> svd(m.entries);
    const Scalar smin = svd.singularValues()(1);
    rows.push_back({n, smin, smin < threshold});
  }
  return rows;
}

}  // namespace vsheet
