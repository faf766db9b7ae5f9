#include "vsheet/cli.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{
      "vsheet: rotating vortex-sheet equilibria by spectral collocation.\n"
      "Solves the steady functional on a Fourier grid, traces the bifurcation\n"
      "branches from the unit circle at b = 2, and verifies the discretization\n"
      "against its closed-form oracles."};

  vsheet::cli::RunConfig config;
  double fix_r1 = 0, fix_b = 0;

  app.add_option("--command", config.command, "verify | solve | continue | export")->required();
  auto* r1_opt = app.add_option("--fix-r1", fix_r1,
                                "fix r_1 (solve) or continue in r1 starting here");
  auto* b_opt = app.add_option("--fix-b", fix_b, "fix b (solve) or continue in b starting here");
  app.add_option("--step", config.step, "continuation increment (default 0.001)");
  app.add_option("--steps", config.steps, "number of continuation steps");
  app.add_option("--N", config.n_modes, "series truncation (default 160)");
  app.add_option("--Ntheta", config.n_theta, "collocation nodes (default 1024)");
  app.add_option("--tol", config.tol, "solver residual sup-norm tolerance");
  app.add_option("--seed", config.seed, "linear+ | linear- | file:<path>");
  app.add_option("--in", config.in_path, "input file (export)");
  app.add_option("--out", config.out_path, "output file");
  app.add_option("--format", config.format, "csv | json");
  app.add_flag("--inject-fault", config.inject_fault)->group("");  // test hook

  CLI11_PARSE(app, argc, argv);

  if (r1_opt->count() > 0) config.fix_r1 = fix_r1;
  if (b_opt->count() > 0) config.fix_b = fix_b;

  return vsheet::cli::run_command(config);
}
