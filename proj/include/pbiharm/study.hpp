#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pbiharm/benchmark.hpp"
#include "pbiharm/functional.hpp"
#include "pbiharm/norms.hpp"
#include "pbiharm/vtk_io.hpp"

namespace pbiharm {

/// One benchmark configuration: solve the manufactured problem on a ladder
/// of structured meshes and report errors and convergence orders.
struct RunConfig {
  double p = 2.0;
  int k = 2;
  double sigma = 10.0;
  std::vector<int> levels{4, 8, 16, 32};
  double epsilon = -1.0;  // negative: automatic
  double newton_tol = 1e-10;
  std::string out_dir;
  bool emit_vtk = false;
  /// Extra quadrature exactness over the default 2k+2. Negative: automatic
  /// (raises the rule to 3k for p >= 4).
  int quad_bump = -1;

  void validate() const {
    if (p != 2.0 && p != 3.0 && p != 4.0 && p != 5.0)
      throw std::invalid_argument("RunConfig: p must be one of 2, 3, 4, 5");
    if (k < 2 || k > 4)
      throw std::invalid_argument("RunConfig: k must be one of 2, 3, 4");
    if (sigma <= 0.0)
      throw std::invalid_argument("RunConfig: sigma must be positive");
    if (levels.empty())
      throw std::invalid_argument("RunConfig: need at least one mesh level");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] < 1 || (i > 0 && levels[i] <= levels[i - 1]))
        throw std::invalid_argument(
            "RunConfig: levels must be positive and strictly increasing");
    }
  }

  int quadrature_degree() const {
    int bump = quad_bump;
    if (bump < 0)
      bump = p >= 4.0 ? std::max(0, k - 2) : 0;
    return 2 * k + 2 + bump;
  }
};

/// Per-level errors and estimated orders of convergence; EOC entries are
/// NaN on the first level.
struct ErrorRecord {
  int n = 0;
  double h = 0.0;
  double err_u = 0.0;
  double err_D = 0.0;
  double err_dg = 0.0;
  double dg_laplacian_part = 0.0;
  double dg_grad_jump_part = 0.0;
  double dg_value_jump_part = 0.0;
  double eoc_u = std::nan("");
  double eoc_D = std::nan("");
  double eoc_dg = std::nan("");
  int iterations = 0;
  bool converged = false;
};

struct StudyResult {
  std::vector<ErrorRecord> records;
  bool all_converged = true;
};

namespace detail {

inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12e", v);
  return buf;
}

inline std::string format_eoc(double v) {
  if (std::isnan(v))
    return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

inline void write_csv(const std::vector<ErrorRecord>& records,
                      std::ostream& out) {
  out << "n,h,err_u_Lp,eoc_u,err_D_Lp,eoc_D,dgnorm_err,eoc_dg,iters\n";
  for (const auto& r : records) {
    out << r.n << "," << detail::format_sci(r.h) << ","
        << detail::format_sci(r.err_u) << "," << detail::format_eoc(r.eoc_u)
        << "," << detail::format_sci(r.err_D) << ","
        << detail::format_eoc(r.eoc_D) << "," << detail::format_sci(r.err_dg)
        << "," << detail::format_eoc(r.eoc_dg) << "," << r.iterations << "\n";
  }
}

/// Two-column (log10 h, log10 error) files, one per error kind, mirroring
/// the usual log-log rate plots.
inline void write_plot_data(const std::vector<ErrorRecord>& records,
                            const std::filesystem::path& dir,
                            const std::string& prefix) {
  const std::pair<std::string, double ErrorRecord::*> kinds[] = {
      {"u", &ErrorRecord::err_u},
      {"D", &ErrorRecord::err_D},
      {"dg", &ErrorRecord::err_dg},
  };
  for (const auto& [name, member] : kinds) {
    std::ofstream out(dir / (prefix + "_" + name + ".dat"));
    for (const auto& r : records)
      out << detail::format_sci(std::log10(r.h)) << " "
          << detail::format_sci(std::log10(r.*member)) << "\n";
  }
}

/// Runs the convergence study: for each level build mesh and space, solve,
/// measure errors against the benchmark solution and append EOCs. Stops
/// after a non-converged level, retaining the partial table.
inline StudyResult run_study(const RunConfig& cfg, std::ostream* log = nullptr) {
  cfg.validate();
  const ExactSolution exact;

  StudyResult result;
  if (!cfg.out_dir.empty())
    std::filesystem::create_directories(cfg.out_dir);

  for (int n : cfg.levels) {
    const Mesh mesh = Mesh::unit_square(n);
    const DgSpace space(mesh, cfg.k, cfg.quadrature_degree());

    SolveConfig scfg;
    scfg.p = cfg.p;
    scfg.sigma = cfg.sigma;
    scfg.epsilon = cfg.epsilon;
    scfg.newton_tol = cfg.newton_tol;
    PBiharmProblem problem(
        space, scfg, [&](const Eigen::Vector2d& x) { return exact.forcing(x, cfg.p); });
    auto [u_h, d_h, report] = problem.solve();

    ErrorRecord rec;
    rec.n = n;
    rec.h = mesh.max_diameter();
    rec.iterations = report.total_iterations();
    rec.converged = report.converged;
    rec.err_u = lp_norm_local(
        [&](int e, const Eigen::Vector2d& xref, const Eigen::Vector2d& x) {
          return exact.value(x) - u_h.evaluate(e, xref).value;
        },
        cfg.p, space);
    rec.err_D = lp_norm_local(
        [&](int e, const Eigen::Vector2d& xref, const Eigen::Vector2d& x) {
          return exact.laplacian(x) - d_h.evaluate(e, xref).value;
        },
        cfg.p, space);
    const DgNormParts parts = dg_error_norm_parts(
        u_h, cfg.p, [&](const Eigen::Vector2d& x) { return exact.laplacian(x); });
    rec.err_dg = parts.total(cfg.p);
    rec.dg_laplacian_part = parts.laplacian(cfg.p);
    rec.dg_grad_jump_part = parts.grad_jump(cfg.p);
    rec.dg_value_jump_part = parts.value_jump(cfg.p);

    if (!result.records.empty()) {
      const ErrorRecord& prev = result.records.back();
      rec.eoc_u = eoc(prev.err_u, rec.err_u, prev.h, rec.h);
      rec.eoc_D = eoc(prev.err_D, rec.err_D, prev.h, rec.h);
      rec.eoc_dg = eoc(prev.err_dg, rec.err_dg, prev.h, rec.h);
    }
    result.records.push_back(rec);

    if (log) {
      *log << "n=" << n << " err_u=" << rec.err_u << " eoc_u="
           << detail::format_eoc(rec.eoc_u) << " err_D=" << rec.err_D
           << " eoc_D=" << detail::format_eoc(rec.eoc_D)
           << " iters=" << rec.iterations
           << (rec.converged ? "" : " [not converged]") << "\n";
    }

    if (cfg.emit_vtk && !cfg.out_dir.empty()) {
      std::ofstream vtk(std::filesystem::path(cfg.out_dir) /
                        ("solution_n" + std::to_string(n) + ".vtk"));
      write_fields_vtk(u_h, d_h, vtk);
    }

    if (!rec.converged) {
      result.all_converged = false;
      if (log)
        *log << "stopping: level n=" << n << " did not converge ("
             << report.failure << ")\n";
      break;
    }
  }

  if (!cfg.out_dir.empty()) {
    std::ofstream csv(std::filesystem::path(cfg.out_dir) / "study.csv");
    write_csv(result.records, csv);
    write_plot_data(result.records, cfg.out_dir, "plot");
  }
  return result;
}

/// EOC table per penalty parameter, probing rate insensitivity to sigma.
inline std::vector<std::pair<double, StudyResult>> sigma_sweep(
    const RunConfig& cfg, const std::vector<double>& sigmas,
    std::ostream* log = nullptr) {
  if (sigmas.size() < 2)
    throw std::invalid_argument("sigma_sweep: need at least two sigma values");
  std::vector<std::pair<double, StudyResult>> table;
  for (double sigma : sigmas) {
    RunConfig c = cfg;
    c.sigma = sigma;
    if (!cfg.out_dir.empty()) {
      std::ostringstream dir;
      dir << cfg.out_dir << "/sigma_" << sigma;
      c.out_dir = dir.str();
    }
    if (log)
      *log << "sigma = " << sigma << "\n";
    table.emplace_back(sigma, run_study(c, log));
  }
  return table;
}

/// Flat key=value configuration file; '#' starts a comment. Unknown keys
/// are rejected so typos do not silently fall back to defaults.
inline RunConfig load_run_config(std::istream& in, RunConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "p")
      base.p = std::stod(value);
    else if (key == "k")
      base.k = std::stoi(value);
    else if (key == "sigma")
      base.sigma = std::stod(value);
    else if (key == "eps")
      base.epsilon = std::stod(value);
    else if (key == "tol")
      base.newton_tol = std::stod(value);
    else if (key == "out")
      base.out_dir = value;
    else if (key == "emit_vtk")
      base.emit_vtk = value == "1" || value == "true";
    else if (key == "quad_bump")
      base.quad_bump = std::stoi(value);
    else if (key == "levels") {
      base.levels.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ','))
        base.levels.push_back(std::stoi(item));
    } else {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
    }
  }
  return base;
}

}  // namespace pbiharm
