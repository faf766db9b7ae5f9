#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vsheet/fourier.hpp"

#include <random>

using namespace vsheet;
using Series = FourierSeries<double>;
using GridD = Grid<double>;

namespace {
constexpr double pi = 3.14159265358979323846;
}

TEST_CASE("eval: direct pointwise values") {
  Series c1 = Series::single_mode(Parity::cosine, 1, 1.0, 1);
  CHECK(c1(0.0) == doctest::Approx(1.0).epsilon(1e-15));

  Series s1 = Series::single_mode(Parity::sine, 1, 1.0, 1);
  CHECK(s1(pi / 4) == doctest::Approx(1.0).epsilon(1e-15));

  Series mixed = Series::single_mode(Parity::cosine, 1, 0.5, 1);
  mixed.set_constant(2.0);
  CHECK(mixed(pi / 2) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("eval on grid matches pointwise evaluation") {
  GridD grid(16);
  Series s = Series::cosine((Eigen::VectorXd(3) << 0.3, -0.2, 0.05).finished(), 1.1);
  auto vals = eval(s, grid);
  for (Eigen::Index i = 0; i < grid.n_points(); ++i)
    CHECK(vals[i] == doctest::Approx(s(grid.node(i))).epsilon(1e-15));
}

TEST_CASE("differentiate: coefficient mapping") {
  Series c = Series::single_mode(Parity::cosine, 1, 1.0, 2);
  auto dc = differentiate(c);
  CHECK(dc.parity() == Parity::sine);
  CHECK(dc.coeff(1) == -2.0);
  CHECK(dc.coeff(2) == 0.0);

  Series s = Series::single_mode(Parity::sine, 2, 3.0, 2);
  auto ds = differentiate(s);
  CHECK(ds.parity() == Parity::cosine);
  CHECK(ds.coeff(2) == 12.0);
  CHECK(ds.constant() == 0.0);

  Series flat(Parity::cosine, 3);
  flat.set_constant(5.0);
  CHECK(differentiate(flat).is_zero());
}

TEST_CASE("differentiate twice gives -4 n^2 exactly") {
  Series s = Series::cosine((Eigen::VectorXd(4) << 1.0, -0.5, 0.25, 2.0).finished());
  auto dd = differentiate(differentiate(s));
  CHECK(dd.parity() == Parity::cosine);
  for (Eigen::Index n = 1; n <= 4; ++n) CHECK(dd.coeff(n) == -4.0 * n * n * s.coeff(n));
}

TEST_CASE("hilbert: cos(m.) -> sin(m.), constant -> 0") {
  Series c = Series::single_mode(Parity::cosine, 1, 1.0, 1);
  auto h = hilbert(c);
  CHECK(h.parity() == Parity::sine);
  CHECK(h.coeff(1) == 1.0);

  Series flat(Parity::cosine, 2);
  flat.set_constant(7.0);
  CHECK(hilbert(flat).is_zero());

  Series c3 = Series::single_mode(Parity::cosine, 3, -2.0, 3);
  CHECK(hilbert(c3).coeff(3) == -2.0);

  CHECK_THROWS_AS(hilbert(Series(Parity::sine, 2)), std::invalid_argument);
}

TEST_CASE("hilbert twice is minus identity-minus-mean on the even-mode class") {
  // H(cos 2n.) = sin 2n., H(sin 2n.) = -cos 2n., so H(H(s)) = -(s - mean s).
  // hilbert() only accepts the cosine parity, which pins the identity to the
  // coefficient level: the image keeps the coefficients and drops the mean.
  Series s = Series::cosine((Eigen::VectorXd(3) << 0.4, -1.2, 0.9).finished(), 3.5);
  auto h = hilbert(s);
  CHECK(h.constant() == 0.0);
  for (Eigen::Index n = 1; n <= 3; ++n) CHECK(h.coeff(n) == s.coeff(n));
}

TEST_CASE("project_mode: orthogonality on the grid") {
  GridD grid(64);
  Eigen::ArrayXd cos2 = grid.nodes().unaryExpr([](double t) { return std::cos(2 * t); });
  CHECK(project_mode<double>(cos2, grid, 2, Parity::cosine) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(project_mode<double>(cos2, grid, 4, Parity::cosine) == doctest::Approx(0.0).epsilon(1e-13));

  Eigen::ArrayXd s4 = grid.nodes().unaryExpr([](double t) { return 3.0 * std::sin(4 * t); });
  CHECK(project_mode<double>(s4, grid, 4, Parity::sine) == doctest::Approx(3.0).epsilon(1e-13));

  CHECK_THROWS_AS(project_mode<double>(cos2, grid, 3, Parity::cosine), std::invalid_argument);
}

TEST_CASE("trapezoid_integral: normalized mean integral") {
  GridD grid(32);
  Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(32);
  CHECK(trapezoid_integral<double>(ones, grid) == doctest::Approx(1.0).epsilon(1e-15));

  Eigen::ArrayXd cos2 = grid.nodes().unaryExpr([](double t) { return std::cos(2 * t); });
  CHECK(trapezoid_integral<double>(cos2, grid) == doctest::Approx(0.0).epsilon(1e-14));

  Eigen::ArrayXd cos2sq = cos2.square();
  CHECK(trapezoid_integral<double>(cos2sq, grid) == doctest::Approx(0.5).epsilon(1e-14));

  Eigen::ArrayXd bad = ones;
  bad[5] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(trapezoid_integral<double>(bad, grid), doctest::Contains("node j=6"),
                       std::domain_error);
}

TEST_CASE("round trip: project_mode recovers coefficients to 1e-12 when N_theta >= 4 N") {
  std::mt19937 rng(20240811);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Eigen::Index n_max = 8;
  for (bool full : {false, true}) {
    GridD grid(full ? 8 * n_max : 4 * n_max, full);
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::VectorXd coeffs(n_max);
      for (Eigen::Index i = 0; i < n_max; ++i) coeffs[i] = u(rng);
      for (Parity p : {Parity::cosine, Parity::sine}) {
        Series s = p == Parity::cosine ? Series::cosine(coeffs) : Series::sine(coeffs);
        auto vals = eval(s, grid);
        for (Eigen::Index n = 1; n <= n_max; ++n)
          CHECK(project_mode<double>(vals, grid, 2 * n, p) ==
                doctest::Approx(s.coeff(n)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("grid: node placement and spacing") {
  GridD half(8);
  CHECK(half.spacing() == doctest::Approx(pi / 8));
  CHECK(half.node(0) == doctest::Approx(pi / 8));
  CHECK(half.node(7) == doctest::Approx(pi));

  GridD full(8, true);
  CHECK(full.spacing() == doctest::Approx(pi / 4));
  CHECK(full.node(7) == doctest::Approx(2 * pi));

  CHECK_THROWS_AS(GridD(0), std::invalid_argument);
}

TEST_CASE("series guards") {
  CHECK_THROWS_AS(Series(Parity::sine, 2).set_constant(1.0), std::invalid_argument);
  Series s(Parity::cosine, 2);
  CHECK_THROWS_AS(s.coeff(3), std::out_of_range);
  CHECK_THROWS_AS(s.coeff(0), std::out_of_range);
}
