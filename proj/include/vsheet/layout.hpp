#pragma once

#include "vsheet/state.hpp"

#include <string>

namespace vsheet {

enum class SolveMode { fix_r1, fix_b };

/// Flattening of the free unknowns for the square collocation system.
///
///   fix_r1: [gamma_0 (= b), gamma_1..gamma_N, r_2..r_N]   r_1 held fixed
///   fix_b : [gamma_1..gamma_N, r_1..r_N]                  gamma_0 = b held fixed
///
/// Both give 2N unknowns, matching the 2N projected residual coefficients
/// (F1 sine and F2 cosine modes 2..2N).
struct UnknownLayout {
  SolveMode mode;
  Eigen::Index n_modes;

  Eigen::Index size() const { return 2 * n_modes; }

  bool column_touches_r(Eigen::Index i) const {
    return i >= (mode == SolveMode::fix_r1 ? n_modes + 1 : n_modes);
  }

  std::string label(Eigen::Index i) const {
    if (mode == SolveMode::fix_r1) {
      if (i == 0) return "gamma_0(b)";
      if (i <= n_modes) return "gamma_" + std::to_string(i);
      return "r_" + std::to_string(i - n_modes + 1);  // r_2, r_3, ...
    }
    if (i < n_modes) return "gamma_" + std::to_string(i + 1);
    return "r_" + std::to_string(i - n_modes + 1);
  }
};

template <typename Scalar>
VectorX<Scalar> flatten(const UnknownLayout& layout, const SheetState<Scalar>& state) {
  const Eigen::Index n = layout.n_modes;
  VectorX<Scalar> x(layout.size());
  if (layout.mode == SolveMode::fix_r1) {
    x[0] = state.b;
    x.segment(1, n) = state.g.coeffs().head(n);
    for (Eigen::Index k = 2; k <= n; ++k) x[n + k - 1] = state.r.coeff(k);
  } else {
    x.head(n) = state.g.coeffs().head(n);
    x.tail(n) = state.r.coeffs().head(n);
  }
  return x;
}

/// Rebuild a state from the flattened unknowns; `fixed` is r_1 in fix_r1 mode
/// and b in fix_b mode.
template <typename Scalar>
SheetState<Scalar> unflatten(const UnknownLayout& layout, const VectorX<Scalar>& x, Scalar fixed,
                             Scalar omega = Scalar(1)) {
  const Eigen::Index n = layout.n_modes;
  if (x.size() != layout.size()) throw std::invalid_argument("unflatten: wrong vector length");
  SheetState<Scalar> s = SheetState<Scalar>::trivial(Scalar(0), n, omega);
  if (layout.mode == SolveMode::fix_r1) {
    s.b = x[0];
    s.g.coeffs() = x.segment(1, n);
    s.r.coeff(1) = fixed;
    for (Eigen::Index k = 2; k <= n; ++k) s.r.coeff(k) = x[n + k - 1];
  } else {
    s.b = fixed;
    s.g.coeffs() = x.head(n);
    s.r.coeffs() = x.tail(n);
  }
  return s;
}

}  // namespace vsheet
