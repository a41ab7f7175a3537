// Command-line driver: direct eigensolves, two-grid schemes, convergence tables
// and lambda sweeps.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "crtg/eigsolve.hpp"
#include "crtg/experiments.hpp"

namespace {

using namespace crtg;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::map<std::string, std::string> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty() || key == "config")
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": invalid key '" + key + "'");
    values[key] = trim(line.substr(eq + 1));
  }
  return values;
}

// Appends the config file entries that are not given as flags, so flags win.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw std::runtime_error("--config requires a path");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;

  auto given = [&](const std::string& key) {
    for (const auto& a : rest)
      if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
    return false;
  };
  for (const auto& [key, value] : read_config(path)) {
    if (given(key)) continue;
    if (value == "true") {
      rest.push_back("--" + key);
    } else if (value != "false") {
      rest.push_back("--" + key);
      rest.push_back(value);
    }
  }
  return rest;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) throw std::runtime_error("invalid number '" + item + "' in list");
    values.push_back(v);
  }
  if (values.empty()) throw std::runtime_error("empty list");
  return values;
}

void print(const CsvTable& table) {
  std::vector<std::size_t> width(table.header.size());
  for (std::size_t i = 0; i < width.size(); ++i) {
    width[i] = table.header[i].size();
    for (const auto& r : table.rows) width[i] = std::max(width[i], r[i].size());
  }
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i)
      std::cout << (i ? "  " : "") << row[i] << std::string(width[i] - row[i].size(), ' ');
    std::cout << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
}

void emit(const CsvTable& table, const std::string& csv_path) {
  print(table);
  if (!csv_path.empty()) write_csv_file(csv_path, table);
}

struct Common {
  std::string domain;
  double mu = 1.0;
  double lambda = 1.0;
  std::string csv;
};

void add_domain(CLI::App* cmd, Common& c) {
  cmd->add_option("--domain", c.domain, "square or lshape")->required()->check(CLI::IsMember({"square", "lshape"}));
}

void add_lame(CLI::App* cmd, Common& c) {
  cmd->add_option("--mu", c.mu, "Lamé mu")->required();
  cmd->add_option("--lambda", c.lambda, "Lamé lambda")->required();
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  args = merge_config(std::move(args));

  CLI::App app{"Crouzeix-Raviart elasticity eigenvalues and two-grid schemes", "crtg"};
  app.require_subcommand(1);
  std::string config_hint;
  app.add_option("--config", config_hint, "key=value file; flags override its entries");
  ExperimentOptions options;
  app.add_option("--max-dofs", options.max_dofs, "refuse problems with more unknowns")->capture_default_str();

  Common c;
  int n = 0, k = 1, nH = 0, nh = 0, scheme = 1, start_n = 0, levels = 0, sweep_nH = 8;
  double tol = options.solver.eig_tol;
  bool direct = false;
  std::string lambdas, svg;

  auto* solve = app.add_subcommand("solve", "smallest eigenpairs on one mesh");
  add_domain(solve, c);
  solve->add_option("--n", n, "cells per unit length")->required();
  add_lame(solve, c);
  solve->add_option("--k", k, "number of eigenpairs")->required();
  solve->add_option("--tol", tol, "relative eigen-residual tolerance")->capture_default_str();
  solve->add_option("--csv", c.csv, "write results as CSV");

  auto* twogrid = app.add_subcommand("twogrid", "one two-grid correction");
  twogrid->add_option("--scheme", scheme, "1: inverse iteration, 2: shifted inverse iteration")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  add_domain(twogrid, c);
  twogrid->add_option("--nH", nH, "coarse cells per unit length")->required();
  twogrid->add_option("--nh", nh, "fine cells per unit length (nH times a power of two)")->required();
  add_lame(twogrid, c);
  twogrid->add_option("--csv", c.csv, "write results as CSV");
  twogrid->add_flag("--direct", direct, "also solve the fine eigenproblem directly");

  auto* table = app.add_subcommand("table", "eigenvalues on successively refined meshes");
  add_domain(table, c);
  add_lame(table, c);
  table->add_option("--start-n", start_n, "cells per unit length on the first level")->required();
  table->add_option("--levels", levels, "number of meshes")->required();
  table->add_option("--csv", c.csv, "write results as CSV");

  auto* locking = app.add_subcommand("locking", "proxy errors |w_h - w_h/2| across lambda");
  add_domain(locking, c);
  locking->add_option("--n", n, "cells per unit length of the h mesh")->required();
  locking->add_option("--lambdas", lambdas, "comma-separated lambda values")->required();
  locking->add_option("--mu", c.mu, "Lamé mu")->capture_default_str();
  locking->add_option("--nH", sweep_nH, "coarse mesh of the two-grid schemes")->capture_default_str();
  locking->add_option("--csv", c.csv, "write results as CSV");
  locking->add_option("--svg", svg, "write a log-log plot");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const Domain domain = parse_domain(c.domain);
  if (*solve) {
    options.solver.eig_tol = tol;
    const AssembledSystem sys = assemble_problem(domain, n, ElasticParams{c.mu, c.lambda, 1.0}, options);
    emit(to_csv(smallest_eigenpairs(sys, k, options.solver)), c.csv);
  } else if (*twogrid) {
    TwoGridTable result{domain, ElasticParams{c.mu, c.lambda, 1.0}, static_cast<TwoGridScheme>(scheme), {}};
    result.rows.push_back(run_twogrid(result.scheme, domain, result.params, nH, nh, direct, options));
    emit(to_csv(result), c.csv);
  } else if (*table) {
    emit(to_csv(run_table(domain, ElasticParams{c.mu, c.lambda, 1.0}, levels, start_n, options)), c.csv);
  } else if (*locking) {
    const LockingSweep sweep = run_locking_sweep(domain, parse_list(lambdas), n, sweep_nH, c.mu, options);
    emit(to_csv(sweep), c.csv);
    if (!svg.empty()) write_locking_svg_file(svg, sweep);
    for (const auto& r : sweep.rows)
      if (!r.ok()) std::cerr << "warning: lambda " << format_number(r.lambda) << ": " << r.status << '\n';
  }
  return EXIT_SUCCESS;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return EXIT_FAILURE;
  }
}
