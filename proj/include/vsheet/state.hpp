#pragma once

#include "vsheet/fourier.hpp"

namespace vsheet {

/// Unknowns of a candidate uniformly-rotating sheet.  The strength is
/// gamma(theta) = b + g(theta) with b its mean, and the boundary curve is
/// z(theta) = (1 + r(theta)) (cos theta, sin theta).  g and r are cosine
/// series with zero constant; omega stays 1 in all solver paths.
template <typename Scalar>
struct SheetState {
  Scalar b{2};
  FourierSeries<Scalar> g{Parity::cosine, 0};
  FourierSeries<Scalar> r{Parity::cosine, 0};
  Scalar omega{1};

  static SheetState trivial(Scalar b, Eigen::Index n_modes, Scalar omega = Scalar(1)) {
    SheetState s;
    s.b = b;
    s.g = FourierSeries<Scalar>(Parity::cosine, n_modes);
    s.r = FourierSeries<Scalar>(Parity::cosine, n_modes);
    s.omega = omega;
    return s;
  }

  /// gamma as a series: constant b plus the g coefficients.
  FourierSeries<Scalar> gamma() const {
    return FourierSeries<Scalar>::cosine(g.coeffs(), b);
  }
};

/// Residual samples (F1, F2) on the collocation grid.  f2 is mean-free by
/// construction (discrete I - P0).
template <typename Scalar>
struct ResidualField {
  ArrayX<Scalar> f1;
  ArrayX<Scalar> f2;
  Scalar sup_norm{0};
  Scalar l2_norm{0};

  void compute_norms() {
    sup_norm = std::max(f1.abs().maxCoeff(), f2.abs().maxCoeff());
    l2_norm = std::sqrt((f1.square().sum() + f2.square().sum()) / Scalar(f1.size() + f2.size()));
  }
};

}  // namespace vsheet
