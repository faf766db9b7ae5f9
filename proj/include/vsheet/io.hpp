#pragma once

#include "vsheet/continuation.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace vsheet {

/// One stored solution: the state plus the discretization and solver
/// bookkeeping needed to reproduce and re-verify it.
struct SolutionRecord {
  int version = 1;
  SheetState<double> state;
  Eigen::Index n_modes = 0;
  Eigen::Index n_theta = 0;
  double residual_sup = 0;
  double residual_l2 = 0;
  int iterations = 0;
  double lambda_final = 0;
  bool converged = true;
  std::string message;
};

inline void write_solution(const std::filesystem::path& path, const SolutionRecord& rec) {
  nlohmann::json j;
  j["version"] = rec.version;
  j["b"] = rec.state.b;
  j["omega"] = rec.state.omega;
  j["N"] = rec.n_modes;
  j["N_theta"] = rec.n_theta;
  std::vector<double> gamma(rec.n_modes + 1);
  gamma[0] = rec.state.b;  // gamma_0 = b
  for (Eigen::Index n = 1; n <= rec.n_modes; ++n) gamma[n] = rec.state.g.coeff(n);
  j["gamma_coeffs"] = gamma;
  std::vector<double> r(rec.n_modes);
  for (Eigen::Index n = 1; n <= rec.n_modes; ++n) r[n - 1] = rec.state.r.coeff(n);
  j["r_coeffs"] = r;
  j["residual_sup"] = rec.residual_sup;
  j["residual_l2"] = rec.residual_l2;
  j["solver"] = {{"iterations", rec.iterations}, {"lambda_final", rec.lambda_final}};
  if (!rec.converged) {
    j["converged"] = false;
    j["message"] = rec.message;
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

inline SolutionRecord read_solution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  SolutionRecord rec;
  rec.version = j.at("version").get<int>();
  rec.n_modes = j.at("N").get<Eigen::Index>();
  rec.n_theta = j.at("N_theta").get<Eigen::Index>();
  rec.state = SheetState<double>::trivial(j.at("b").get<double>(), rec.n_modes,
                                          j.at("omega").get<double>());
  const auto gamma = j.at("gamma_coeffs").get<std::vector<double>>();
  const auto r = j.at("r_coeffs").get<std::vector<double>>();
  if (Eigen::Index(gamma.size()) != rec.n_modes + 1 || Eigen::Index(r.size()) != rec.n_modes)
    throw std::runtime_error(path.string() + ": coefficient counts disagree with N");
  for (Eigen::Index n = 1; n <= rec.n_modes; ++n) {
    rec.state.g.coeff(n) = gamma[n];
    rec.state.r.coeff(n) = r[n - 1];
  }
  rec.residual_sup = j.at("residual_sup").get<double>();
  rec.residual_l2 = j.at("residual_l2").get<double>();
  rec.iterations = j.at("solver").at("iterations").get<int>();
  rec.lambda_final = j.at("solver").at("lambda_final").get<double>();
  rec.converged = j.value("converged", true);
  rec.message = j.value("message", std::string());
  return rec;
}

struct BranchRow {
  int step_index = 0;
  double r1 = 0;
  double b = 0;
  double residual_sup = 0;
  std::string solution_path;
};

namespace detail {
inline std::string full_precision(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

inline constexpr const char* kBranchHeader = "step_index,r1,b,residual_sup,solution_path";

/// Append one row, creating the file with its header when absent.
inline void append_branch_row(const std::filesystem::path& path, const BranchRow& row) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for appending");
  if (fresh) out << kBranchHeader << "\n";
  out << row.step_index << ',' << detail::full_precision(row.r1) << ','
      << detail::full_precision(row.b) << ',' << detail::full_precision(row.residual_sup) << ','
      << row.solution_path << "\n";
}

inline std::vector<BranchRow> read_branch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<BranchRow> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == kBranchHeader) continue;
    }
    BranchRow row;
    size_t pos = 0;
    auto next = [&]() {
      const size_t comma = line.find(',', pos);
      const std::string field =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      pos = comma == std::string::npos ? line.size() : comma + 1;
      return field;
    };
    row.step_index = std::stoi(next());
    row.r1 = std::stod(next());
    row.b = std::stod(next());
    row.residual_sup = std::stod(next());
    row.solution_path = line.substr(pos);
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Bifurcation-diagram table r1,b,residual_sup, plus a companion file with
/// the linear-theory lines b = 2 +- 2 r1 for the same r1 samples.
inline void export_bifurcation(const std::vector<BranchRow>& rows,
                               const std::filesystem::path& out_path, bool as_json = false) {
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  if (as_json) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& row : rows)
      j.push_back({{"r1", row.r1},
                   {"b", row.b},
                   {"residual_sup", row.residual_sup},
                   {"b_linear_plus", 2.0 + 2.0 * row.r1},
                   {"b_linear_minus", 2.0 - 2.0 * row.r1}});
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path.string());
    out << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open " + out_path.string());
  out << "r1,b,residual_sup\n";
  for (const auto& row : rows)
    out << detail::full_precision(row.r1) << ',' << detail::full_precision(row.b) << ','
        << detail::full_precision(row.residual_sup) << "\n";

  std::filesystem::path linear = out_path;
  linear.replace_extension(".linear" + out_path.extension().string());
  std::ofstream lin(linear);
  if (!lin) throw std::runtime_error("cannot open " + linear.string());
  lin << "r1,b_linear_plus,b_linear_minus\n";
  for (const auto& row : rows)
    lin << detail::full_precision(row.r1) << ',' << detail::full_precision(2.0 + 2.0 * row.r1)
        << ',' << detail::full_precision(2.0 - 2.0 * row.r1) << "\n";
}

/// Sampled strength gamma(theta) and curve z(theta) = (1+r)(cos, sin) over
/// the full period (2 N_theta rows), straight from the stored coefficients.
inline void export_solution_curve(const SolutionRecord& rec,
                                  const std::filesystem::path& out_path, bool as_json = false) {
  const Grid<double> grid(2 * rec.n_theta, true);
  const auto gamma = eval(rec.state.gamma(), grid);
  const auto radius = (1.0 + eval(rec.state.r, grid).array()).eval();
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open " + out_path.string());
  if (as_json) {
    nlohmann::json j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < grid.n_points(); ++i) {
      const double t = grid.node(i);
      j.push_back({{"theta", t},
                   {"gamma", gamma[i]},
                   {"x", radius[i] * std::cos(t)},
                   {"y", radius[i] * std::sin(t)}});
    }
    out << j.dump(2) << "\n";
    return;
  }
  out << "theta,gamma,x,y\n";
  for (Eigen::Index i = 0; i < grid.n_points(); ++i) {
    const double t = grid.node(i);
    out << detail::full_precision(t) << ',' << detail::full_precision(gamma[i]) << ','
        << detail::full_precision(radius[i] * std::cos(t)) << ','
        << detail::full_precision(radius[i] * std::sin(t)) << "\n";
  }
}

}  // namespace vsheet
