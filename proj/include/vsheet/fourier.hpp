#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vsheet {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class Parity { cosine, sine };

/// Truncated Fourier series restricted to even wavenumbers,
///
///   cosine:  c + sum_{n=1}^{N} a_n cos(2 n theta)
///   sine:        sum_{n=1}^{N} a_n sin(2 n theta)
///
/// The pi-rotation symmetry of the problem admits only the even modes, so
/// coefficient slot n always refers to wavenumber 2n.  A sine series has no
/// constant term.  The truncation N is fixed by the coefficient vector.
template <typename Scalar>
class FourierSeries {
 public:
  FourierSeries(Parity parity, Eigen::Index n_modes)
      : parity_(parity), constant_(0), coeffs_(VectorX<Scalar>::Zero(n_modes)) {
    if (n_modes < 0) throw std::invalid_argument("FourierSeries: negative mode count");
  }

  static FourierSeries cosine(VectorX<Scalar> coeffs, Scalar constant = Scalar(0)) {
    FourierSeries s(Parity::cosine, coeffs.size());
    s.coeffs_ = std::move(coeffs);
    s.constant_ = constant;
    return s;
  }

  static FourierSeries sine(VectorX<Scalar> coeffs) {
    FourierSeries s(Parity::sine, coeffs.size());
    s.coeffs_ = std::move(coeffs);
    return s;
  }

  /// Series with a single coefficient a_n at wavenumber 2n, n in [1, n_modes].
  static FourierSeries single_mode(Parity parity, Eigen::Index n, Scalar a, Eigen::Index n_modes) {
    FourierSeries s(parity, n_modes);
    s.coeff(n) = a;
    return s;
  }

  Parity parity() const { return parity_; }
  Eigen::Index n_modes() const { return coeffs_.size(); }

  Scalar constant() const { return constant_; }
  void set_constant(Scalar c) {
    if (parity_ == Parity::sine && c != Scalar(0))
      throw std::invalid_argument("FourierSeries: sine series has no constant term");
    constant_ = c;
  }

  const VectorX<Scalar>& coeffs() const { return coeffs_; }
  VectorX<Scalar>& coeffs() { return coeffs_; }

  /// Coefficient of trig(2 n theta), 1-based in n.
  Scalar coeff(Eigen::Index n) const {
    check_mode(n);
    return coeffs_[n - 1];
  }
  Scalar& coeff(Eigen::Index n) {
    check_mode(n);
    return coeffs_[n - 1];
  }

  bool is_zero() const { return constant_ == Scalar(0) && (coeffs_.array() == Scalar(0)).all(); }

  Scalar operator()(Scalar theta) const {
    Scalar acc = constant_;
    for (Eigen::Index n = 1; n <= coeffs_.size(); ++n) {
      const Scalar arg = Scalar(2 * n) * theta;
      acc += coeffs_[n - 1] * (parity_ == Parity::cosine ? std::cos(arg) : std::sin(arg));
    }
    return acc;
  }

  FourierSeries& operator*=(Scalar a) {
    constant_ *= a;
    coeffs_ *= a;
    return *this;
  }

 private:
  void check_mode(Eigen::Index n) const {
    if (n < 1 || n > coeffs_.size())
      throw std::out_of_range("FourierSeries: mode index " + std::to_string(n) +
                              " outside [1, " + std::to_string(coeffs_.size()) + "]");
  }

  Parity parity_;
  Scalar constant_;
  VectorX<Scalar> coeffs_;
};

/// Uniform collocation nodes theta_j = j h, j = 1..n_points.  The default
/// grid covers the half period (0, pi] with h = pi/n_points; the even-mode
/// symmetry class supplies the other half.  A full-period grid covers
/// (0, 2 pi] with h = 2 pi/n_points.
template <typename Scalar>
class Grid {
 public:
  explicit Grid(Eigen::Index n_points, bool full_period = false)
      : n_points_(n_points), full_period_(full_period) {
    if (n_points < 1) throw std::invalid_argument("Grid: need at least one node");
  }

  Eigen::Index n_points() const { return n_points_; }
  bool full_period() const { return full_period_; }

  Scalar period() const {
    return full_period_ ? Scalar(2) * std::numbers::pi_v<Scalar> : std::numbers::pi_v<Scalar>;
  }
  Scalar spacing() const { return period() / Scalar(n_points_); }

  /// Node theta_{i+1} for 0-based index i.
  Scalar node(Eigen::Index i) const { return Scalar(i + 1) * spacing(); }

  ArrayX<Scalar> nodes() const {
    ArrayX<Scalar> t(n_points_);
    for (Eigen::Index i = 0; i < n_points_; ++i) t[i] = node(i);
    return t;
  }

  bool operator==(const Grid& o) const {
    return n_points_ == o.n_points_ && full_period_ == o.full_period_;
  }

 private:
  Eigen::Index n_points_;
  bool full_period_;
};

/// Samples of the series at every grid node.
template <typename Scalar>
ArrayX<Scalar> eval(const FourierSeries<Scalar>& s, const Grid<Scalar>& grid) {
  ArrayX<Scalar> out(grid.n_points());
  for (Eigen::Index i = 0; i < grid.n_points(); ++i) out[i] = s(grid.node(i));
  return out;
}

/// d/dtheta in coefficient space: cos(2n.) -> -2n sin(2n.), sin(2n.) -> 2n cos(2n.).
/// The constant term drops.
template <typename Scalar>
FourierSeries<Scalar> differentiate(const FourierSeries<Scalar>& s) {
  const Eigen::Index n = s.n_modes();
  FourierSeries<Scalar> out(s.parity() == Parity::cosine ? Parity::sine : Parity::cosine, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    const Scalar w = Scalar(2 * k);
    out.coeff(k) = (s.parity() == Parity::cosine ? -w : w) * s.coeff(k);
  }
  return out;
}

/// Periodic Hilbert transform H(cos(m.)) = sin(m.), applied coefficient-wise;
/// the constant maps to zero.  Only the cosine parity is needed by the solver,
/// so a sine input signals a caller bug and is rejected.
template <typename Scalar>
FourierSeries<Scalar> hilbert(const FourierSeries<Scalar>& s) {
  if (s.parity() != Parity::cosine)
    throw std::invalid_argument("hilbert: expected a cosine-parity series");
  return FourierSeries<Scalar>::sine(s.coeffs());
}

/// Normalized mean integral over the period, (1/2pi) int f dtheta, by the
/// periodic trapezoid rule (equal weights).  On a half-period grid the
/// samples must come from a pi-periodic function, which every object in the
/// even-mode symmetry class is.
template <typename Scalar>
Scalar trapezoid_integral(const Eigen::Ref<const ArrayX<Scalar>>& values, const Grid<Scalar>& grid) {
  if (values.size() != grid.n_points())
    throw std::invalid_argument("trapezoid_integral: sample count does not match grid");
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw std::domain_error("trapezoid_integral: non-finite integrand at node j=" +
                              std::to_string(i + 1) + " (missed desingularization?)");
  return values.mean();
}

/// Fourier coefficient (1/pi) int f(theta) trig(mode theta) dtheta over the
/// full period; half-period samples are extended by the even-mode symmetry.
/// Recovers a_n from samples of a series when mode = 2n.
template <typename Scalar>
Scalar project_mode(const Eigen::Ref<const ArrayX<Scalar>>& values, const Grid<Scalar>& grid,
                    Eigen::Index mode, Parity parity) {
  if (mode < 0 || mode % 2 != 0)
    throw std::invalid_argument("project_mode: wavenumber must be even and nonnegative, got " +
                                std::to_string(mode));
  if (values.size() != grid.n_points())
    throw std::invalid_argument("project_mode: sample count does not match grid");
  Scalar acc = 0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const Scalar arg = Scalar(mode) * grid.node(i);
    acc += values[i] * (parity == Parity::cosine ? std::cos(arg) : std::sin(arg));
  }
  return Scalar(2) * acc / Scalar(values.size());
}

/// Cached trig samples cos(2n theta_j), sin(2n theta_j) for a grid; turns
/// series evaluation into a matrix-vector product on hot paths.
template <typename Scalar>
struct TrigTable {
  TrigTable(const Grid<Scalar>& grid, Eigen::Index n_modes)
      : cos2n(grid.n_points(), n_modes), sin2n(grid.n_points(), n_modes) {
    for (Eigen::Index i = 0; i < grid.n_points(); ++i) {
      const Scalar t = grid.node(i);
      for (Eigen::Index n = 1; n <= n_modes; ++n) {
        cos2n(i, n - 1) = std::cos(Scalar(2 * n) * t);
        sin2n(i, n - 1) = std::sin(Scalar(2 * n) * t);
      }
    }
  }

  ArrayX<Scalar> eval(const FourierSeries<Scalar>& s) const {
    const Eigen::Index used = std::min(s.n_modes(), cos2n.cols());
    if (s.n_modes() > cos2n.cols()) {
      for (Eigen::Index n = cos2n.cols() + 1; n <= s.n_modes(); ++n)
        if (s.coeff(n) != Scalar(0))
          throw std::invalid_argument("TrigTable: series exceeds table truncation");
    }
    ArrayX<Scalar> out = ArrayX<Scalar>::Constant(cos2n.rows(), s.constant());
    if (used > 0) {
      const auto& table = (s.parity() == Parity::cosine) ? cos2n : sin2n;
      out += (table.leftCols(used) * s.coeffs().head(used)).array();
    }
    return out;
  }

  MatrixX<Scalar> cos2n;
  MatrixX<Scalar> sin2n;
};

}  // namespace vsheet
