#include "vsheet/cli.hpp"

#include "vsheet/verify.hpp"

#include <iostream>

namespace vsheet::cli {

namespace {

using State = SheetState<double>;

struct SeedSpec {
  int sign = +1;
  std::optional<std::string> file;
};

SeedSpec parse_seed(const std::string& seed) {
  if (seed == "linear+") return {+1, std::nullopt};
  if (seed == "linear-") return {-1, std::nullopt};
  if (seed.rfind("file:", 0) == 0) return {+1, seed.substr(5)};
  throw std::invalid_argument("unrecognized --seed '" + seed + "' (linear+|linear-|file:<path>)");
}

/// Initial guess for a solve with r_1 or b fixed.  Linear theory places the
/// state on the branch selected by the seed sign; a file seed loads a stored
/// solution (for branch CSVs, the row nearest the target parameter).
State resolve_guess(const RunConfig& config, const SeedSpec& seed) {
  if (seed.file) {
    std::filesystem::path p = *seed.file;
    if (p.extension() == ".csv") {
      const auto rows = read_branch(p);
      if (rows.empty()) throw std::runtime_error(p.string() + " holds no branch points");
      const double target = config.fix_r1 ? *config.fix_r1 : *config.fix_b;
      const BranchRow* best = &rows.front();
      for (const auto& row : rows) {
        const double d = config.fix_r1 ? std::abs(row.r1 - target) : std::abs(row.b - target);
        const double dbest = config.fix_r1 ? std::abs(best->r1 - target)
                                           : std::abs(best->b - target);
        if (d < dbest) best = &row;
      }
      if (best->solution_path.empty())
        throw std::runtime_error(p.string() + ": branch row carries no solution file");
      std::filesystem::path sol = best->solution_path;
      if (sol.is_relative() && p.has_parent_path()) {
        const auto sibling = p.parent_path() / sol;
        if (std::filesystem::exists(sibling)) sol = sibling;
      }
      return read_solution(sol).state;
    }
    return read_solution(p).state;
  }
  if (config.fix_b) return local_branch_predict(*config.fix_b, seed.sign, config.n_modes);
  State s = State::trivial(2.0 + seed.sign * 2.0 * *config.fix_r1, config.n_modes);
  s.r.coeff(1) = *config.fix_r1;
  return s;
}

State pad_state(const State& s, Eigen::Index n_modes) {
  if (s.g.n_modes() == n_modes) return s;
  State padded = State::trivial(s.b, n_modes, s.omega);
  const Eigen::Index common = std::min(s.g.n_modes(), n_modes);
  padded.g.coeffs().head(common) = s.g.coeffs().head(common);
  padded.r.coeffs().head(common) = s.r.coeffs().head(common);
  return padded;
}

int cmd_verify(const RunConfig& config) {
  VerifyOptions opts;
  opts.n_theta = config.n_theta;
  opts.inject_fault = config.inject_fault;
  const auto checks = run_verification(opts);
  print_report(std::cout, checks);
  return all_passed(checks) ? kExitOk : kExitVerificationFailure;
}

int cmd_solve(const RunConfig& config) {
  if (config.fix_r1.has_value() == config.fix_b.has_value())
    throw std::invalid_argument("solve needs exactly one of --fix-r1 and --fix-b");
  if (config.out_path.empty()) throw std::invalid_argument("solve needs --out <file>");

  const SeedSpec seed = parse_seed(config.seed);
  const State guess = pad_state(resolve_guess(config, seed), config.n_modes);
  const Grid<double> grid(config.n_theta);
  LmOptions opts;
  opts.tol_residual_sup = config.tol;

  const SolveMode mode = config.fix_r1 ? SolveMode::fix_r1 : SolveMode::fix_b;
  const double fixed = config.fix_r1 ? *config.fix_r1 : *config.fix_b;
  const auto rep = solve_sheet(mode, fixed, guess, grid, opts);

  SolutionRecord rec;
  rec.state = rep.state;
  rec.n_modes = config.n_modes;
  rec.n_theta = config.n_theta;
  rec.residual_sup = rep.field_sup;  // the stored norms are the assembled field's
  rec.residual_l2 = rep.field_l2;
  rec.iterations = rep.iterations;
  rec.lambda_final = rep.lambda_final;
  rec.converged = rep.converged;
  rec.message = rep.message;
  write_solution(config.out_path, rec);

  std::cout << (rep.converged ? "converged" : "NOT converged") << ": b = " << rep.state.b
            << ", r1 = " << (config.n_modes >= 1 ? rep.state.r.coeff(1) : 0.0)
            << ", solved residual sup = " << rep.residual_sup
            << ", field sup = " << rep.field_sup << ", l2 = " << rep.field_l2
            << ", iterations = " << rep.iterations << "\n";
  if (!rep.converged) {
    std::cout << "diagnostics written to " << config.out_path << " (" << rep.message << ")\n";
    return kExitSolverFailure;
  }
  return kExitOk;
}

int cmd_continue(const RunConfig& config) {
  if (config.fix_r1.has_value() == config.fix_b.has_value())
    throw std::invalid_argument("continue needs exactly one of --fix-r1 and --fix-b "
                                "(the continuation parameter and its start)");
  if (config.out_path.empty()) throw std::invalid_argument("continue needs --out <file>");

  const SeedSpec seed = parse_seed(config.seed);
  ContinuationConfig<double> cc;
  cc.parameter = config.fix_r1 ? ContinuationParameter::r1 : ContinuationParameter::b;
  cc.start = config.fix_r1 ? *config.fix_r1 : *config.fix_b;
  cc.step = config.step;
  cc.n_steps = config.steps;
  cc.sign = seed.sign;
  cc.n_modes = config.n_modes;
  cc.n_theta = config.n_theta;
  cc.solver.tol_residual_sup = config.tol;
  if (seed.file) {
    std::filesystem::path p = *seed.file;
    if (p.extension() == ".csv") {
      const auto rows = read_branch(p);
      if (rows.empty()) throw std::runtime_error(p.string() + " holds no branch points");
      cc.seed_state = read_solution(rows.back().solution_path).state;
    } else {
      cc.seed_state = read_solution(p).state;
    }
  }

  const std::filesystem::path out = config.out_path;
  int index_offset = 0;
  if (std::filesystem::exists(out) && std::filesystem::file_size(out) > 0) {
    const auto existing = read_branch(out);
    if (!existing.empty()) index_offset = existing.back().step_index + 1;
  }
  const std::filesystem::path solution_dir = out.string() + ".solutions";

  const auto result = continue_branch(cc);
  for (const auto& point : result.points) {
    SolutionRecord rec;
    rec.state = point.state;
    rec.n_modes = config.n_modes;
    rec.n_theta = config.n_theta;
    rec.residual_sup = point.residual_sup;
    rec.residual_l2 = assemble_residual(point.state, Grid<double>(config.n_theta)).l2_norm;
    const int index = point.step_index + index_offset;
    char name[32];
    std::snprintf(name, sizeof(name), "step_%06d.json", index);
    const auto sol_path = solution_dir / name;
    write_solution(sol_path, rec);
    append_branch_row(out, {index, point.r1, point.b, point.residual_sup, sol_path.string()});
  }
  std::cout << "appended " << result.points.size() << " branch points to " << out << "\n";

  const auto rows = read_branch(out);
  if (rows.size() >= 3) {
    std::vector<BranchPoint<double>> line;
    line.reserve(rows.size());
    for (const auto& row : rows)
      line.push_back({row.r1, row.b, State::trivial(row.b, 1), row.residual_sup, row.step_index});
    if (const auto fold = detect_fold(line))
      std::cout << "fold detected near r1 = " << fold->r1_at_fold
                << ", b = " << fold->b_at_fold << "\n";
  }

  if (!result.completed) {
    std::cout << "branch truncated: " << result.diagnostic << "\n";
    return kExitSolverFailure;
  }
  return kExitOk;
}

int cmd_export(const RunConfig& config) {
  if (config.in_path.empty() || config.out_path.empty())
    throw std::invalid_argument("export needs --in <file> and --out <file>");
  if (config.format != "csv" && config.format != "json")
    throw std::invalid_argument("unrecognized --format '" + config.format + "'");
  const std::filesystem::path in = config.in_path;
  if (!std::filesystem::exists(in))
    throw std::runtime_error("input file " + in.string() + " does not exist");
  const bool as_json = config.format == "json";
  if (in.extension() == ".csv") {
    export_bifurcation(read_branch(in), config.out_path, as_json);
  } else {
    export_solution_curve(read_solution(in), config.out_path, as_json);
  }
  std::cout << "wrote " << config.out_path << "\n";
  return kExitOk;
}

}  // namespace

int run_command(const RunConfig& config) {
  try {
    if (config.command == "verify") return cmd_verify(config);
    if (config.command == "solve") return cmd_solve(config);
    if (config.command == "continue") return cmd_continue(config);
    if (config.command == "export") return cmd_export(config);
    std::cerr << "unknown command '" << config.command
              << "' (verify|solve|continue|export)\n";
    return kExitConfigError;
  } catch (const GeometryError& e) {
    std::cerr << "geometry failure: " << e.what() << "\n";
    return kExitSolverFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace vsheet::cli
