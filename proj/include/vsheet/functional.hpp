#pragma once

#include "vsheet/fourier.hpp"
#include "vsheet/state.hpp"

#include <memory>

namespace vsheet {

/// The boundary curve degenerated: near self-intersection of the chord
/// distance, or |r| >= 1 so the curve is no longer a graph over the circle.
class GeometryError : public std::runtime_error {
 public:
  GeometryError(const std::string& what, Eigen::Index node)
      : std::runtime_error(what), node_(node) {}
  Eigen::Index node() const { return node_; }

 private:
  Eigen::Index node_;
};

/// eta -> theta limit of the desingularized F1 integrand
/// gamma(eta) [K1(theta,eta) + (1/2) cot((theta-eta)/2)].
template <typename Scalar>
Scalar f1_diagonal_limit(const SheetState<Scalar>& state, Scalar theta) {
  const Scalar rho = Scalar(1) + state.r(theta);
  const Scalar dr = differentiate(state.r)(theta);
  const Scalar ddr = differentiate(differentiate(state.r))(theta);
  const Scalar gam = state.b + state.g(theta);
  return gam * (-dr * (ddr + rho)) / (Scalar(2) * (dr * dr + rho * rho));
}

/// eta -> theta limit of the F2 kernel A6 A3 (the removable singularity).
template <typename Scalar>
Scalar f2_diagonal_limit(const SheetState<Scalar>& state, Scalar theta) {
  const Scalar rho = Scalar(1) + state.r(theta);
  const Scalar dr = differentiate(state.r)(theta);
  const Scalar ddr = differentiate(differentiate(state.r))(theta);
  return (Scalar(2) * dr * dr + rho * rho - rho * ddr) / (Scalar(2) * (dr * dr + rho * rho));
}

namespace detail {

/// Per-grid caches shared by every state: difference tables on the doubled
/// index (cos, sin, cot of (j-k) h) and trig samples for series evaluation
/// on the integration grid.  The integration grid always covers the full
/// period: a half-period collocation grid with P nodes extends to M = 2P
/// eta nodes with the same spacing.
template <typename Scalar>
struct GridTables {
  GridTables(const Grid<Scalar>& grid, Eigen::Index n_modes)
      : grid(grid),
        n_coll(grid.n_points()),
        n_eta(grid.full_period() ? grid.n_points() : 2 * grid.n_points()),
        eta_grid(n_eta, true),
        eta_trig(eta_grid, n_modes) {
    const Scalar h = eta_grid.spacing();
    sin_diff.resize(2 * n_eta);
    vers_diff.resize(2 * n_eta);
    half_cot_diff.resize(2 * n_eta);
    for (Eigen::Index i = 0; i < 2 * n_eta; ++i) {
      const Scalar d = Scalar(i - n_eta) * h;
      const Scalar sh = std::sin(d / Scalar(2));
      sin_diff[i] = std::sin(d);
      vers_diff[i] = Scalar(2) * sh * sh;  // 1 - cos(d), no cancellation
      // (1/2) cot(d/2) = sin(d) / (2 (1 - cos d)); sharing the table values
      // makes the F1 kernel cancel bit-exactly at the trivial state
      half_cot_diff[i] = (i == n_eta) ? Scalar(0) : sin_diff[i] / (Scalar(2) * vers_diff[i]);
    }
  }

  Grid<Scalar> grid;
  Eigen::Index n_coll;  // collocation nodes theta_j, the first n_coll eta nodes
  Eigen::Index n_eta;   // integration nodes over (0, 2 pi]
  Grid<Scalar> eta_grid;
  TrigTable<Scalar> eta_trig;
  ArrayX<Scalar> sin_diff;       // index i holds value at angle (i - n_eta) h
  ArrayX<Scalar> vers_diff;      // 1 - cos of the same angle
  ArrayX<Scalar> half_cot_diff;  // (1/2) cot(((i - n_eta) h)/2)
};

}  // namespace detail

/// Everything about a state that depends on r alone: curve samples, the
/// desingularized F1 kernel and the F2 kernel with their diagonal limits.
/// Reusable across gamma perturbations (the kernels do not see b or g).
template <typename Scalar>
class SheetGeometry {
 public:
  SheetGeometry(std::shared_ptr<const detail::GridTables<Scalar>> tables,
                const SheetState<Scalar>& state)
      : t_(std::move(tables)) {
    const auto& tt = *t_;
    rho_eta_ = Scalar(1) + tt.eta_trig.eval(state.r);
    // graph condition: the radius 1 + r must stay positive or the curve
    // degenerates through the origin
    for (Eigen::Index k = 0; k < tt.n_eta; ++k) {
      if (rho_eta_[k] <= Scalar(0))
        throw GeometryError("curve is no longer a graph over the circle: 1 + r <= 0 at node j=" +
                                std::to_string(k + 1),
                            k);
    }
    drho_ = tt.eta_trig.eval(differentiate(state.r)).head(tt.n_coll);
    ddr_ = tt.eta_trig.eval(differentiate(differentiate(state.r))).head(tt.n_coll);
    rho_ = rho_eta_.head(tt.n_coll);
    a7_ = Scalar(1) / (drho_.square() + rho_.square());
    k1_diag_ = -drho_ * (ddr_ + rho_) * Scalar(0.5) * a7_;
    k2_diag_ = (Scalar(2) * drho_.square() + rho_.square() - rho_ * ddr_) * Scalar(0.5) * a7_;
  }

  const ArrayX<Scalar>& rho() const { return rho_; }
  const ArrayX<Scalar>& drho() const { return drho_; }
  const ArrayX<Scalar>& rho_eta() const { return rho_eta_; }
  const ArrayX<Scalar>& a7() const { return a7_; }
  const detail::GridTables<Scalar>& tables() const { return *t_; }

  /// Mean over the eta grid of K1(j,.) w and K2(j,.) w in one fused pass.
  /// Written against the cancellation-free forms
  ///   den = (rho_t - rho_e)^2 + 2 rho_t rho_e (1 - cos u)
  ///   A2  = r' [(rho_e - rho_t) - (1 - cos u) rho_e] - rho_t rho_e sin u
  ///   A6  = rho_t (rho_t - rho_e) + rho_t rho_e (1 - cos u) - r' rho_e sin u
  void contract_row(Eigen::Index j, const ArrayX<Scalar>& w, Scalar& i1, Scalar& i2) const {
    const auto& tt = *t_;
    const Eigen::Index m = tt.n_eta;
    const Scalar rho_t = rho_[j];
    const Scalar dr = drho_[j];
    const Scalar* sd = tt.sin_diff.data() + (j + m);
    const Scalar* vd = tt.vers_diff.data() + (j + m);
    const Scalar* hc = tt.half_cot_diff.data() + (j + m);
    const Scalar* re = rho_eta_.data();
    const Scalar* wp = w.data();
    Scalar s1 = 0, s2 = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == j) {
        s1 += k1_diag_[j] * wp[k];
        s2 += k2_diag_[j] * wp[k];
        continue;
      }
      const Scalar s = sd[-k];
      const Scalar v = vd[-k];
      const Scalar rk = re[k];
      const Scalar dro = rho_t - rk;
      const Scalar rr = rho_t * rk;
      const Scalar den = dro * dro + Scalar(2) * rr * v;
      if (den <= kChordGuard) throw_chord(j, k);
      const Scalar k1 = (dr * (-dro - v * rk) - rr * s) / den + hc[-k];
      const Scalar k2 = (rho_t * dro + rr * v - dr * rk * s) / den;
      s1 += k1 * wp[k];
      s2 += k2 * wp[k];
    }
    i1 = s1 / Scalar(m);
    i2 = s2 / Scalar(m);
  }

  /// Materialized kernel values for row j (same arithmetic as contract_row).
  void kernel_row(Eigen::Index j, Scalar* k1_out, Scalar* k2_out) const {
    const auto& tt = *t_;
    const Eigen::Index m = tt.n_eta;
    const Scalar rho_t = rho_[j];
    const Scalar dr = drho_[j];
    const Scalar* sd = tt.sin_diff.data() + (j + m);
    const Scalar* vd = tt.vers_diff.data() + (j + m);
    const Scalar* hc = tt.half_cot_diff.data() + (j + m);
    const Scalar* re = rho_eta_.data();
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k == j) {
        k1_out[k] = k1_diag_[j];
        k2_out[k] = k2_diag_[j];
        continue;
      }
      const Scalar s = sd[-k];
      const Scalar v = vd[-k];
      const Scalar rk = re[k];
      const Scalar dro = rho_t - rk;
      const Scalar rr = rho_t * rk;
      const Scalar den = dro * dro + Scalar(2) * rr * v;
      if (den <= kChordGuard) throw_chord(j, k);
      k1_out[k] = (dr * (-dro - v * rk) - rr * s) / den + hc[-k];
      k2_out[k] = (rho_t * dro + rr * v - dr * rk * s) / den;
    }
  }

  /// Build the dense kernel matrices once so repeated gamma contractions
  /// become matrix-vector products.
  void materialize_kernels() const {
    if (k1_.size() > 0) return;
    const Eigen::Index p = t_->n_coll, m = t_->n_eta;
    k1_.resize(p, m);
    k2_.resize(p, m);
    for (Eigen::Index j = 0; j < p; ++j) kernel_row(j, k1_.row(j).data(), k2_.row(j).data());
  }
  bool kernels_materialized() const { return k1_.size() > 0; }

  void contract(const ArrayX<Scalar>& w, ArrayX<Scalar>& i1, ArrayX<Scalar>& i2) const {
    const Eigen::Index p = t_->n_coll;
    i1.resize(p);
    i2.resize(p);
    if (kernels_materialized()) {
      const Scalar inv = Scalar(1) / Scalar(t_->n_eta);
      i1 = (k1_ * w.matrix()).array() * inv;
      i2 = (k2_ * w.matrix()).array() * inv;
    } else {
      for (Eigen::Index j = 0; j < p; ++j) contract_row(j, w, i1[j], i2[j]);
    }
  }

 private:
  static constexpr Scalar kChordGuard = Scalar(1e-10);

  [[noreturn]] void throw_chord(Eigen::Index j, Eigen::Index k) const {
    throw GeometryError("curve nearly self-intersects: chord denominator <= 1e-10 between "
                        "nodes j=" + std::to_string(j + 1) + " and k=" + std::to_string(k + 1),
                        j);
  }

  std::shared_ptr<const detail::GridTables<Scalar>> t_;
  ArrayX<Scalar> rho_eta_, rho_, drho_, ddr_, a7_, k1_diag_, k2_diag_;
  using RowMajor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  mutable RowMajor k1_, k2_;
};

/// Evaluates the steady residual F = (F1, F2) on the collocation grid.
/// F1 carries the principal-value desingularization (subtract (1/2) H(gamma),
/// add the compensating cot term under the integral); F2's integrand gets its
/// removable singularity filled by the analytic limit, then I - P0 is applied
/// as the discrete grid mean.
template <typename Scalar>
class ResidualEvaluator {
 public:
  ResidualEvaluator(const Grid<Scalar>& grid, Eigen::Index n_modes)
      : tables_(std::make_shared<detail::GridTables<Scalar>>(grid, n_modes)) {}

  const Grid<Scalar>& grid() const { return tables_->grid; }
  Eigen::Index n_modes() const { return tables_->eta_trig.cos2n.cols(); }

  std::shared_ptr<const SheetGeometry<Scalar>> make_geometry(const SheetState<Scalar>& state) const {
    return std::make_shared<SheetGeometry<Scalar>>(tables_, state);
  }

  ResidualField<Scalar> residual(const SheetState<Scalar>& state) const {
    SheetGeometry<Scalar> geom(tables_, state);
    return residual_with_geometry(geom, state);
  }

  /// Residual reusing a geometry built for the same r (b and g may differ).
  ResidualField<Scalar> residual_with_geometry(const SheetGeometry<Scalar>& geom,
                                               const SheetState<Scalar>& state) const {
    const auto& tt = *tables_;
    const Eigen::Index p = tt.n_coll;

    const ArrayX<Scalar> gamma_eta = tt.eta_trig.eval(state.gamma());
    ArrayX<Scalar> i1, i2;
    geom.contract(gamma_eta, i1, i2);

    const ArrayX<Scalar> h_gamma =
        tt.eta_trig.eval(hilbert(state.g)).head(p);  // H(gamma) = H(g), exact in coefficients

    ResidualField<Scalar> out;
    out.f1 = i1 - Scalar(0.5) * h_gamma + state.omega * geom.drho() * geom.rho();
    const ArrayX<Scalar> gamma_col = gamma_eta.head(p);
    ArrayX<Scalar> f2t =
        gamma_col * geom.a7() * i2 - state.omega * geom.rho().square() * gamma_col * geom.a7();
    out.f2 = f2t - f2t.mean();
    out.compute_norms();
    return out;
  }

  /// Projected residual: F1 sine and F2 cosine coefficients for modes 2..2N.
  VectorX<Scalar> residual_coeffs(const ResidualField<Scalar>& field) const {
    const auto& tt = *tables_;
    const Eigen::Index p = tt.n_coll;
    const Eigen::Index n = n_modes();
    VectorX<Scalar> c(2 * n);
    const Scalar scale = Scalar(2) / Scalar(p);
    c.head(n) = scale * (tt.eta_trig.sin2n.topRows(p).transpose() * field.f1.matrix());
    c.tail(n) = scale * (tt.eta_trig.cos2n.topRows(p).transpose() * field.f2.matrix());
    return c;
  }

  /// Raw node samples [f1; f2] for the overdetermined least-squares option.
  VectorX<Scalar> residual_nodes(const ResidualField<Scalar>& field) const {
    VectorX<Scalar> v(field.f1.size() + field.f2.size());
    v.head(field.f1.size()) = field.f1.matrix();
    v.tail(field.f2.size()) = field.f2.matrix();
    return v;
  }

 private:
  std::shared_ptr<detail::GridTables<Scalar>> tables_;
};

/// F1 at collocation node i (0-based, theta = (i+1) h).
template <typename Scalar>
Scalar f1_at(const SheetState<Scalar>& state, const Grid<Scalar>& grid, Eigen::Index node) {
  const Eigen::Index n = std::max<Eigen::Index>({state.g.n_modes(), state.r.n_modes(), 1});
  ResidualEvaluator<Scalar> ev(grid, n);
  auto geom = ev.make_geometry(state);
  const auto& tt = geom->tables();
  const ArrayX<Scalar> gamma_eta = tt.eta_trig.eval(state.gamma());
  Scalar i1, i2;
  geom->contract_row(node, gamma_eta, i1, i2);
  const Scalar hg = hilbert(state.g)(grid.node(node));
  return i1 - Scalar(0.5) * hg + state.omega * geom->drho()[node] * geom->rho()[node];
}

/// F2 (before the I - P0 projection) at collocation node i.
template <typename Scalar>
Scalar f2_at(const SheetState<Scalar>& state, const Grid<Scalar>& grid, Eigen::Index node) {
  const Eigen::Index n = std::max<Eigen::Index>({state.g.n_modes(), state.r.n_modes(), 1});
  ResidualEvaluator<Scalar> ev(grid, n);
  auto geom = ev.make_geometry(state);
  const auto& tt = geom->tables();
  const ArrayX<Scalar> gamma_eta = tt.eta_trig.eval(state.gamma());
  Scalar i1, i2;
  geom->contract_row(node, gamma_eta, i1, i2);
  const Scalar gam = gamma_eta[node];
  const Scalar a7 = geom->a7()[node];
  const Scalar rho = geom->rho()[node];
  return gam * a7 * i2 - state.omega * rho * rho * gam * a7;
}

/// Full residual field with norms on the collocation grid.
template <typename Scalar>
ResidualField<Scalar> assemble_residual(const SheetState<Scalar>& state, const Grid<Scalar>& grid) {
  const Eigen::Index n = std::max<Eigen::Index>({state.g.n_modes(), state.r.n_modes(), 1});
  ResidualEvaluator<Scalar> ev(grid, n);
  return ev.residual(state);
}

}  // namespace vsheet
