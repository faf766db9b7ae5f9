#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vsheet/levenberg_marquardt.hpp"
#include "vsheet/reduced.hpp"

using namespace vsheet;
using GridD = Grid<double>;
using State = SheetState<double>;
using Vec = Eigen::VectorXd;

TEST_CASE("linear least squares converges to the exact solution in a few steps") {
  auto residual = [](const Vec& x) -> Vec {
    Vec f(2);
    f << 1.0 * x[0] - 1.0, 2.0 * x[1] - 2.0;
    return f;
  };
  auto rep = solve<double>(residual, Vec::Zero(2));
  CHECK(rep.converged);
  CHECK(rep.iterations <= 3);
  CHECK(std::abs(rep.x[0] - 1.0) <= 1e-10);
  CHECK(std::abs(rep.x[1] - 1.0) <= 1e-10);
}

TEST_CASE("accepted residual norms never increase") {
  // Rosenbrock-style valley keeps LM working for a while
  auto residual = [](const Vec& x) -> Vec {
    Vec f(2);
    f << 10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0];
    return f;
  };
  LmOptions opts;
  opts.tol_residual_sup = 1e-12;
  auto rep = solve<double>(residual, (Vec(2) << -1.2, 1.0).finished(), opts);
  CHECK(rep.converged);
  for (size_t i = 1; i < rep.accepted_l2_history.size(); ++i)
    CHECK(rep.accepted_l2_history[i] <= rep.accepted_l2_history[i - 1]);
}

TEST_CASE("a residual without a root ends in a clean non-convergence report") {
  auto residual = [](const Vec& x) -> Vec {
    Vec f(1);
    f << std::sin(x[0]) + 2.0;
    return f;
  };
  auto rep = solve<double>(residual, Vec::Zero(1));
  CHECK(!rep.converged);
  CHECK(!rep.message.empty());
}

TEST_CASE("geometry errors at trial points reject the step and keep the last good iterate") {
  // root sits behind a forbidden wall; steps into it are rejected until
  // lambda reaches its cap
  auto residual = [](const Vec& x) -> Vec {
    if (std::abs(x[0]) > 0.5) throw GeometryError("wall", 0);
    Vec f(1);
    f << x[0] - 1.0;
    return f;
  };
  auto rep = solve<double>(residual, Vec::Zero(1));
  CHECK(!rep.converged);
  CHECK(std::abs(rep.x[0]) <= 0.5);
  CHECK(!rep.message.empty());  // lambda cap or a wall-adjacent Jacobian, never a crash
}

TEST_CASE("fix_b at b = 2 with the trivial guess returns the trivial solution") {
  GridD grid(64);
  auto rep = solve_sheet(SolveMode::fix_b, 2.0, State::trivial(2.0, 8), grid);
  CHECK(rep.converged);
  CHECK(rep.iterations == 0);
  CHECK(rep.state.g.is_zero());
  CHECK(rep.state.r.is_zero());
  CHECK(rep.residual_sup <= 1e-12);
}

TEST_CASE("fix_b away from the bifurcation pulls a perturbed guess back to the trivial branch") {
  // no singular modes at b = 2.7, so the trivial branch is locally unique
  for (const auto& row : kernel_report(2.7, 1.0, 8)) CHECK(!row.flagged);

  GridD grid(64);
  State guess = State::trivial(2.7, 8);
  guess.g.coeff(1) = 0.01;
  guess.r.coeff(1) = 0.01;
  guess.r.coeff(2) = -0.005;
  auto rep = solve_sheet(SolveMode::fix_b, 2.7, guess, grid);
  CHECK(rep.converged);
  CHECK(rep.residual_sup <= 1e-10);
  CHECK(rep.state.g.coeffs().cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(rep.state.r.coeffs().cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("fix_r1 solves land on the two local branches") {
  GridD grid(64);
  const Eigen::Index n = 8;
  const double r1 = 0.03;
  for (int sign : {+1, -1}) {
    State guess = State::trivial(2.0 + sign * 2 * r1, n);
    guess.r.coeff(1) = r1;
    auto rep = solve_sheet(SolveMode::fix_r1, r1, guess, grid);
    CHECK(rep.converged);
    CHECK(rep.residual_sup <= 1e-10);
    CHECK(rep.state.r.coeff(1) == r1);
    CHECK(std::abs(rep.state.b - (2.0 + sign * 2 * r1)) <= 0.02);
  }
}

TEST_CASE("solver runs are deterministic") {
  GridD grid(64);
  State guess = State::trivial(2.1, 6);
  guess.r.coeff(1) = 0.05;
  auto r1 = solve_sheet(SolveMode::fix_r1, 0.05, guess, grid);
  auto r2 = solve_sheet(SolveMode::fix_r1, 0.05, guess, grid);
  CHECK(r1.state.b == r2.state.b);
  CHECK((r1.state.g.coeffs().array() == r2.state.g.coeffs().array()).all());
  CHECK((r1.state.r.coeffs().array() == r2.state.r.coeffs().array()).all());
  CHECK(r1.iterations == r2.iterations);
}

TEST_CASE("converged solutions are grid-stable") {
  GridD grid(64);
  LmOptions opts;
  State guess = State::trivial(2.1, 8);
  guess.r.coeff(1) = 0.05;
  auto rep = solve_sheet(SolveMode::fix_r1, 0.05, guess, grid, opts);
  REQUIRE(rep.converged);
  auto fine = assemble_residual(rep.state, GridD(128));
  CHECK(fine.sup_norm <= 10 * opts.tol_residual_sup);
}

TEST_CASE("raw-node least squares agrees with the coefficient projection") {
  // N = 8 keeps the truncation tail of this state below the 1e-10 tolerance
  GridD grid(64);
  State guess = State::trivial(1.9, 8);
  guess.r.coeff(1) = -0.04;
  LmOptions node_opts;
  node_opts.node_residual = true;
  auto a = solve_sheet(SolveMode::fix_r1, -0.04, guess, grid);
  auto b = solve_sheet(SolveMode::fix_r1, -0.04, guess, grid, node_opts);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(std::abs(a.state.b - b.state.b) <= 1e-8);
  CHECK((a.state.r.coeffs() - b.state.r.coeffs()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("solve_sheet rejects an inadmissible first guess") {
  GridD grid(32);
  State guess = State::trivial(2.0, 4);
  guess.r.coeff(1) = 1.2;
  CHECK_THROWS_AS(solve_sheet(SolveMode::fix_b, 2.0, guess, grid), GeometryError);
}
