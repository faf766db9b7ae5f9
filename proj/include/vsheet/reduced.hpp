#pragma once

#include "vsheet/functional.hpp"

#include <functional>
#include <string>
#include <utility>

namespace vsheet {

/// A direction in the (g, r) product space, both cosine parity.
template <typename Scalar>
struct Direction {
  FourierSeries<Scalar> g;
  FourierSeries<Scalar> r;

  static Direction zero(Eigen::Index n) {
    return {FourierSeries<Scalar>(Parity::cosine, n), FourierSeries<Scalar>(Parity::cosine, n)};
  }
};

/// Kernel direction v = (0, cos 2theta).
template <typename Scalar>
Direction<Scalar> direction_v(Eigen::Index n_modes) {
  auto d = Direction<Scalar>::zero(n_modes);
  d.r.coeff(1) = Scalar(1);
  return d;
}

/// v_tilde = (2 cos 2theta, 0), the preimage of -(I-Q) d_b DF(2,0) v.
template <typename Scalar>
Direction<Scalar> direction_v_tilde(Eigen::Index n_modes) {
  auto d = Direction<Scalar>::zero(n_modes);
  d.g.coeff(1) = Scalar(2);
  return d;
}

/// v_hat = (-8 cos 4theta, (3/2) cos 4theta), the preimage of
/// -(d^2/dt^2)(I-Q) F(2, t v).
template <typename Scalar>
Direction<Scalar> direction_v_hat(Eigen::Index n_modes) {
  auto d = Direction<Scalar>::zero(n_modes);
  d.g.coeff(2) = Scalar(-8);
  d.r.coeff(2) = Scalar(1.5);
  return d;
}

struct FdOptions {
  double step_t = 1e-3;
  double step_b = 1e-3;
  bool richardson = true;  // extrapolate across steps h and h/2
};

namespace detail {
inline void check_fd_steps(const FdOptions& opts) {
  if (!(opts.step_t > 0) || !(opts.step_b > 0))
    throw std::invalid_argument("finite-difference step underflow: steps must be positive");
}
}  // namespace detail

/// Directional derivatives of the discrete residual, every evaluation going
/// through the full collocation functional.  Results come back as projected
/// coefficient series (F1 sine part, F2 cosine part).
template <typename Scalar>
class ReducedDerivatives {
 public:
  ReducedDerivatives(const Grid<Scalar>& grid, Eigen::Index n_modes)
      : ev_(grid, n_modes), n_(n_modes) {}

  using SeriesPair = std::pair<FourierSeries<Scalar>, FourierSeries<Scalar>>;

  /// DF(b, 0)[d] by first-order central differences.
  SeriesPair first_t(Scalar b, const Direction<Scalar>& d, const FdOptions& opts = {}) const {
    detail::check_fd_steps(opts);
    auto quotient = [&](Scalar h) -> VectorX<Scalar> {
      return (coeffs(b, h, d) - coeffs(b, -h, d)) / (Scalar(2) * h);
    };
    return to_series(extrapolate(quotient, Scalar(opts.step_t), opts.richardson));
  }

  /// d^2/dt^2 F(b, t d) at t = 0.
  SeriesPair second_tt(Scalar b, const Direction<Scalar>& d, const FdOptions& opts = {}) const {
    detail::check_fd_steps(opts);
    auto quotient = [&](Scalar h) -> VectorX<Scalar> {
      return (coeffs(b, h, d) - Scalar(2) * coeffs(b, Scalar(0), d) + coeffs(b, -h, d)) / (h * h);
    };
    return to_series(extrapolate(quotient, Scalar(opts.step_t), opts.richardson));
  }

  /// Mixed d^2/dtds F(b, t d1 + s d2) at t = s = 0.
  SeriesPair second_ts(Scalar b, const Direction<Scalar>& d1, const Direction<Scalar>& d2,
                       const FdOptions& opts = {}) const {
    detail::check_fd_steps(opts);
    auto quotient = [&](Scalar h) -> VectorX<Scalar> {
      return (coeffs2(b, h, h, d1, d2) - coeffs2(b, h, -h, d1, d2) - coeffs2(b, -h, h, d1, d2) +
              coeffs2(b, -h, -h, d1, d2)) /
             (Scalar(4) * h * h);
    };
    return to_series(extrapolate(quotient, Scalar(opts.step_t), opts.richardson));
  }

  /// (1/3) d^3/dt^3 F(b, t d) at t = 0 by the 5-point antisymmetric stencil.
  SeriesPair third_ttt_over3(Scalar b, const Direction<Scalar>& d,
                             const FdOptions& opts = {}) const {
    detail::check_fd_steps(opts);
    auto quotient = [&](Scalar h) -> VectorX<Scalar> {
      return (-coeffs(b, -2 * h, d) + Scalar(2) * coeffs(b, -h, d) - Scalar(2) * coeffs(b, h, d) +
              coeffs(b, 2 * h, d)) /
             (Scalar(2) * h * h * h) / Scalar(3);
    };
    return to_series(extrapolate(quotient, Scalar(opts.step_t), opts.richardson));
  }

  /// d_b DF(b, 0)[d], the mixed (b, t) second derivative.
  SeriesPair mixed_bt(Scalar b, const Direction<Scalar>& d, const FdOptions& opts = {}) const {
    detail::check_fd_steps(opts);
    auto quotient = [&](Scalar h) -> VectorX<Scalar> {
      const Scalar ht = h, hb = h * Scalar(opts.step_b) / Scalar(opts.step_t);
      return (coeffs(b + hb, ht, d) - coeffs(b + hb, -ht, d) - coeffs(b - hb, ht, d) +
              coeffs(b - hb, -ht, d)) /
             (Scalar(4) * hb * ht);
    };
    return to_series(extrapolate(quotient, Scalar(opts.step_t), opts.richardson));
  }

  /// d_b [d^2/dt^2 F(b, t d)] at t = 0.
  SeriesPair b_of_tt(Scalar b, const Direction<Scalar>& d, const FdOptions& opts = {}) const {
    detail::check_fd_steps(opts);
    auto quotient = [&](Scalar h) -> VectorX<Scalar> {
      const Scalar ht = h, hb = h * Scalar(opts.step_b) / Scalar(opts.step_t);
      auto tt = [&](Scalar bb) -> VectorX<Scalar> {
        return (coeffs(bb, ht, d) - Scalar(2) * coeffs(bb, Scalar(0), d) + coeffs(bb, -ht, d)) /
               (ht * ht);
      };
      return (tt(b + hb) - tt(b - hb)) / (Scalar(2) * hb);
    };
    return to_series(extrapolate(quotient, Scalar(opts.step_t), opts.richardson));
  }

  const ResidualEvaluator<Scalar>& evaluator() const { return ev_; }

 private:
  VectorX<Scalar> coeffs(Scalar b, Scalar t, const Direction<Scalar>& d) const {
    return coeffs2(b, t, Scalar(0), d, Direction<Scalar>::zero(n_));
  }

  VectorX<Scalar> coeffs2(Scalar b, Scalar t, Scalar s, const Direction<Scalar>& d1,
                          const Direction<Scalar>& d2) const {
    SheetState<Scalar> st = SheetState<Scalar>::trivial(b, n_);
    add_scaled(st.g, t, d1.g);
    add_scaled(st.g, s, d2.g);
    add_scaled(st.r, t, d1.r);
    add_scaled(st.r, s, d2.r);
    return ev_.residual_coeffs(ev_.residual(st));
  }

  static void add_scaled(FourierSeries<Scalar>& dst, Scalar a, const FourierSeries<Scalar>& src) {
    for (Eigen::Index k = 1; k <= src.n_modes(); ++k) dst.coeff(k) += a * src.coeff(k);
  }

  template <typename Quotient>
  VectorX<Scalar> extrapolate(Quotient quotient, Scalar h, bool richardson) const {
    if (!richardson) return quotient(h);
    const VectorX<Scalar> d1 = quotient(h);
    const VectorX<Scalar> d2 = quotient(h / Scalar(2));
    return (Scalar(4) * d2 - d1) / Scalar(3);
  }

  SeriesPair to_series(const VectorX<Scalar>& c) const {
    return {FourierSeries<Scalar>::sine(c.head(n_)),
            FourierSeries<Scalar>::cosine(c.tail(n_))};
  }

  ResidualEvaluator<Scalar> ev_;
  Eigen::Index n_;
};

// ---------------------------------------------------------------------------
// Integral identities: quadrature against closed form.

enum class IdentityName { lemma1, lemma2, lemma31, lemma32, lemma33, lemma34, lemma4, lemma5 };

inline const char* to_string(IdentityName name) {
  switch (name) {
    case IdentityName::lemma1: return "lemma1";
    case IdentityName::lemma2: return "lemma2";
    case IdentityName::lemma31: return "lemma31";
    case IdentityName::lemma32: return "lemma32";
    case IdentityName::lemma33: return "lemma33";
    case IdentityName::lemma34: return "lemma34";
    case IdentityName::lemma4: return "lemma4";
    case IdentityName::lemma5: return "lemma5";
  }
  return "?";
}

inline IdentityName identity_from_string(const std::string& s) {
  for (IdentityName n : {IdentityName::lemma1, IdentityName::lemma2, IdentityName::lemma31,
                         IdentityName::lemma32, IdentityName::lemma33, IdentityName::lemma34,
                         IdentityName::lemma4, IdentityName::lemma5})
    if (s == to_string(n)) return n;
  throw std::invalid_argument("unknown integral identity: " + s);
}

template <typename Scalar>
struct IdentityResult {
  Scalar quadrature;
  Scalar closed_form;
};

/// One named identity pinned at an angle theta: the raw integrand I(eta), the
/// residue c of its simple pole at eta = theta (so I + c (1/2) cot((theta -
/// eta)/2) is smooth), a single-fraction evaluation of that compensated
/// integrand (stable arbitrarily close to the diagonal), its limit, and the
/// closed form.
template <typename Scalar>
struct IdentityParts {
  std::function<Scalar(Scalar)> integrand;
  std::function<Scalar(Scalar)> compensated;
  Scalar pole_coefficient;
  Scalar diagonal_limit;
  Scalar closed_form;
};

template <typename Scalar>
IdentityParts<Scalar> identity_parts(IdentityName name, Eigen::Index m, Scalar theta) {
  if ((name == IdentityName::lemma1 || name == IdentityName::lemma2) && m < 1)
    throw std::invalid_argument("integral_identity: lemma1/lemma2 need m >= 1");

  auto vers_of = [](Scalar u) {
    const Scalar sh = std::sin(u / Scalar(2));
    return Scalar(2) * sh * sh;  // 1 - cos u
  };

  // difference-quotient family (f(theta) - f(eta)) w(eta) / (2 - 2 cos u):
  // pole coefficient c = -f'(theta) w(theta), diagonal -f'' w / 2 - f' w',
  // compensated single fraction [(f(theta) - f(eta)) w(eta) + c sin u]/(2 vers)
  auto diff_quotient = [&](auto f, auto df, auto ddf, auto w, auto dw, Scalar closed) {
    const Scalar c = -df(theta) * w(theta);
    return IdentityParts<Scalar>{
        [=](Scalar eta) {
          return (f(theta) - f(eta)) * w(eta) / (Scalar(2) * vers_of(theta - eta));
        },
        [=](Scalar eta) {
          const Scalar u = theta - eta;
          return ((f(theta) - f(eta)) * w(eta) + c * std::sin(u)) /
                 (Scalar(2) * vers_of(u));
        },
        c, -ddf(theta) * w(theta) / Scalar(2) - df(theta) * dw(theta), closed};
  };

  const Scalar md = Scalar(m);
  auto cosm = [md](Scalar t) { return std::cos(md * t); };
  auto dcosm = [md](Scalar t) { return -md * std::sin(md * t); };
  auto ddcosm = [md](Scalar t) { return -md * md * std::cos(md * t); };
  auto one = [](Scalar) { return Scalar(1); };
  auto zero = [](Scalar) { return Scalar(0); };
  auto cos2 = [](Scalar t) { return std::cos(2 * t); };
  auto dcos2 = [](Scalar t) { return Scalar(-2) * std::sin(2 * t); };
  auto ddcos2 = [](Scalar t) { return Scalar(-4) * std::cos(2 * t); };
  auto cos4 = [](Scalar t) { return std::cos(4 * t); };
  auto dcos4 = [](Scalar t) { return Scalar(-4) * std::sin(4 * t); };
  auto ddcos4 = [](Scalar t) { return Scalar(-16) * std::cos(4 * t); };
  auto sin2 = [](Scalar t) { return std::sin(2 * t); };
  auto dsin2 = [](Scalar t) { return Scalar(2) * std::cos(2 * t); };

  switch (name) {
    case IdentityName::lemma1:
      return diff_quotient(cosm, dcosm, ddcosm, one, zero, md / Scalar(2) * std::cos(md * theta));
    case IdentityName::lemma2: {
      // cos(m eta) sin(u) / (2 - 2 cos u) = cos(m eta) (1/2) cot(u/2);
      // compensated: (cos(m eta) - cos(m theta)) sin(u) / (2 - 2 cos u)
      const Scalar c = -cosm(theta);
      return {[=](Scalar eta) {
                const Scalar u = theta - eta;
                return cosm(eta) * std::sin(u) / (Scalar(2) * vers_of(u));
              },
              [=](Scalar eta) {
                const Scalar u = theta - eta;
                return (cosm(eta) - cosm(theta)) * std::sin(u) / (Scalar(2) * vers_of(u));
              },
              c, md * std::sin(md * theta), std::sin(md * theta) / Scalar(2)};
    }
    case IdentityName::lemma31:
      return diff_quotient(cos2, dcos2, ddcos2, cos4, dcos4,
                           -std::cos(2 * theta) / Scalar(2) + std::cos(6 * theta) / Scalar(2));
    case IdentityName::lemma32:
      return diff_quotient(cos2, dcos2, ddcos2, cos2, dcos2,
                           Scalar(-0.5) + std::cos(4 * theta) / Scalar(2));
    case IdentityName::lemma33:
      return diff_quotient(cos4, dcos4, ddcos4, cos2, dcos2, std::cos(6 * theta));
    case IdentityName::lemma34:
      return diff_quotient(cos2, dcos2, ddcos2, sin2, dsin2, std::sin(4 * theta) / Scalar(2));
    case IdentityName::lemma4: {
      const Scalar fp = dcos2(theta), fpp = ddcos2(theta);
      const Scalar c = -fp * fp * fp;
      return {[=](Scalar eta) {
                const Scalar d = cos2(theta) - cos2(eta);
                const Scalar den = Scalar(2) * vers_of(theta - eta);
                return d * d * d / (den * den);
              },
              [=](Scalar eta) {
                const Scalar u = theta - eta;
                const Scalar v2 = Scalar(2) * vers_of(u);
                const Scalar d = cos2(theta) - cos2(eta);
                return (d * d * d + c * std::sin(u) * v2) / (v2 * v2);
              },
              c, -Scalar(1.5) * fp * fp * fpp,
              Scalar(2.25) * std::cos(2 * theta) - std::cos(6 * theta)};
    }
    case IdentityName::lemma5: {
      const Scalar fp = dcos2(theta), fpp = ddcos2(theta);
      const Scalar c = -fp * fp;
      return {[=](Scalar eta) {
                const Scalar u = theta - eta;
                const Scalar d = cos2(theta) - cos2(eta);
                const Scalar den = Scalar(2) * vers_of(u);
                return d * d * std::sin(u) / (den * den);
              },
              [=](Scalar eta) {
                const Scalar u = theta - eta;
                const Scalar v2 = Scalar(2) * vers_of(u);
                const Scalar d = cos2(theta) - cos2(eta);
                return std::sin(u) * (d * d + c * v2) / (v2 * v2);
              },
              c, -fp * fpp, -std::sin(4 * theta)};
    }
  }
  throw std::invalid_argument("integral_identity: unknown name");
}

/// Quadrature value and closed form for one of the named identities at angle
/// theta (lemma1/lemma2 additionally take the wavenumber m >= 1).  The
/// compensated integrand I + c (1/2) cot is smooth and gets the periodic
/// trapezoid over the full-period eta grid; the pure cot term has zero mean.
/// theta may sit on a node (the diagonal limit fills in) or between nodes,
/// but not so close to one that the samples lose their accuracy.
template <typename Scalar>
IdentityResult<Scalar> integral_identity(IdentityName name, Eigen::Index m, Scalar theta,
                                         const Grid<Scalar>& grid) {
  const auto parts = identity_parts(name, m, theta);
  const Eigen::Index n_eta = grid.full_period() ? grid.n_points() : 2 * grid.n_points();
  const Grid<Scalar> eta(n_eta, true);
  const Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar acc = 0;
  for (Eigen::Index k = 0; k < n_eta; ++k) {
    const Scalar u = theta - eta.node(k);
    Scalar dist = std::fmod(std::abs(u), two_pi);
    dist = std::min(dist, two_pi - dist);
    if (dist <= Scalar(1e-9)) {
      acc += parts.diagonal_limit;
      continue;
    }
    if (dist < eta.spacing() / Scalar(10))
      throw std::invalid_argument(
          "integral_identity: theta falls too close to a quadrature node; move theta or "
          "refine the grid");
    acc += parts.compensated(eta.node(k));
  }
  return {acc / Scalar(n_eta), parts.closed_form};
}

/// Coefficients of w in the reduced-functional derivatives at (b, t) = (2, 0):
/// the quadratic form (b-2)^2 - 4 t^2 up to the half factors.
struct FredCoefficients {
  double d_bb = 2.0;
  double d_tt = -8.0;
  double d_tb = 0.0;
  double d_b = 0.0;
  double d_t = 0.0;
};

inline FredCoefficients fred_coefficients() { return {}; }

/// Local branch seed r = sign * t * cos(2 theta), t = |b - 2| / 2, from the
/// quadratic branch law (b-2)^2 = 4 t^2.
template <typename Scalar>
SheetState<Scalar> local_branch_predict(Scalar b, int sign, Eigen::Index n_modes,
                                        Scalar trust_radius = Scalar(0.3)) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("local_branch_predict: sign must be +-1");
  if (std::abs(b - Scalar(2)) > trust_radius)
    throw std::invalid_argument("local_branch_predict: |b - 2| = " +
                                std::to_string(std::abs(b - Scalar(2))) +
                                " beyond the trust region " + std::to_string(trust_radius));
  SheetState<Scalar> s = SheetState<Scalar>::trivial(b, n_modes);
  s.r.coeff(1) = Scalar(sign) * std::abs(b - Scalar(2)) / Scalar(2);
  return s;
}

}  // namespace vsheet
