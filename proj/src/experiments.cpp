#include "crtg/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "crtg/eigsolve.hpp"

namespace crtg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Number of uniform refinements taking nH to nh.
int refinement_levels(int nH, int nh) {
  if (nH < 1 || nh < nH) throw std::invalid_argument("two-grid pair needs 1 <= nH <= nh");
  int depth = 0;
  int n = nH;
  while (n < nh) {
    n *= 2;
    ++depth;
  }
  if (n != nh)
    throw std::invalid_argument("nh = " + std::to_string(nh) + " is not nH = " + std::to_string(nH) +
                                " times a power of two");
  return depth;
}

void check_dofs(Domain domain, int n, const ExperimentOptions& options) {
  const std::size_t dofs = expected_dofs(domain, n);
  if (dofs > options.max_dofs)
    throw DofLimitError(to_string(domain) + " mesh n=" + std::to_string(n) + " has " + std::to_string(dofs) +
                        " unknowns, above the limit of " + std::to_string(options.max_dofs));
}

std::shared_ptr<const TriangleMesh> refined_mesh(const TriangleMesh& coarse, int depth) {
  auto mesh = std::make_shared<TriangleMesh>(coarse);
  for (int i = 0; i < depth; ++i) *mesh = uniform_refine(*mesh);
  return mesh;
}

double mesh_size(int n) { return std::sqrt(2.0) / n; }

}  // namespace

double convergence_ratio(double w_h, double w_h2, double w_h4) {
  if (!std::isfinite(w_h) || !std::isfinite(w_h2) || !std::isfinite(w_h4))
    throw std::domain_error("convergence ratio of non-finite values");
  const double num = w_h - w_h2;
  const double den = w_h2 - w_h4;
  if (num == 0.0 || den == 0.0)
    throw std::domain_error("convergence ratio: consecutive values coincide");
  return std::log10(std::abs(num / den)) / std::log10(2.0);
}

std::size_t expected_dofs(Domain domain, int n) {
  if (n < 1 || (domain == Domain::lshape && n % 2 != 0))
    throw std::invalid_argument("invalid mesh parameter n = " + std::to_string(n));
  const auto m = static_cast<std::size_t>(n);
  // interior edges: 3n^2 - 2n on the square, 9n^2/4 - 2n on the L-shape
  if (domain == Domain::square) return 2 * (3 * m * m - 2 * m);
  return 2 * (9 * m * m / 4 - 2 * m);
}

AssembledSystem assemble_problem(Domain domain, int n, const ElasticParams& params, const ExperimentOptions& options) {
  check_dofs(domain, n, options);
  return assemble(std::make_shared<const TriangleMesh>(build_mesh(domain, n)), params);
}

ConvergenceTable run_table(Domain domain, const ElasticParams& params, int levels, int start_n,
                           const ExperimentOptions& options) {
  if (levels < 1) throw std::invalid_argument("table needs at least one level");
  if (start_n < 1) throw std::invalid_argument("start n must be positive");
  params.validate();
  for (int l = 0, n = start_n; l < levels; ++l, n *= 2) check_dofs(domain, n, options);

  ConvergenceTable table{domain, params, {}};
  for (int l = 0, n = start_n; l < levels; ++l, n *= 2) {
    const AssembledSystem sys = assemble_problem(domain, n, params, options);
    const auto start = Clock::now();
    const auto pairs = smallest_eigenpairs(sys, 1, options.solver);
    ConvergenceRow row;
    row.n = n;
    row.h = mesh_size(n);
    row.omega = pairs.front().omega;
    row.dofs = sys.dim();
    row.seconds = seconds_since(start);
    table.rows.push_back(row);
  }
  for (std::size_t i = 0; i + 2 < table.rows.size(); ++i)
    table.rows[i].ratio = convergence_ratio(table.rows[i].omega, table.rows[i + 1].omega, table.rows[i + 2].omega);
  return table;
}

TwoGridRow run_twogrid(TwoGridScheme scheme, Domain domain, const ElasticParams& params, int nH, int nh,
                       bool with_direct, const ExperimentOptions& options) {
  const int depth = refinement_levels(nH, nh);
  check_dofs(domain, nh, options);
  params.validate();
  const auto coarse_mesh = std::make_shared<const TriangleMesh>(build_mesh(domain, nH));
  const AssembledSystem coarse = assemble(coarse_mesh, params);
  const AssembledSystem fine = assemble(refined_mesh(*coarse_mesh, depth), params);

  const TwoGridResult result = run_scheme(scheme, coarse, fine, options.solver);
  TwoGridRow row;
  row.nH = nH;
  row.nh = nh;
  row.omega_H = result.omega_H;
  row.omega = result.omega_h_super;
  row.seconds = result.timings.total;
  row.linear_iterations = result.linear_iterations;
  row.shift_regularized = result.shift_regularized;
  if (with_direct) {
    const auto start = Clock::now();
    row.omega_direct = smallest_eigenpairs(fine, 1, options.solver).front().omega;
    row.direct_seconds = seconds_since(start);
  }
  return row;
}

TwoGridTable run_twogrid_table(Domain domain, const ElasticParams& params, const std::vector<std::pair<int, int>>& pairs,
                               TwoGridScheme scheme, bool with_direct, const ExperimentOptions& options) {
  for (const auto& [nH, nh] : pairs) {
    refinement_levels(nH, nh);
    check_dofs(domain, nh, options);
  }
  TwoGridTable table{domain, params, scheme, {}};
  for (const auto& [nH, nh] : pairs)
    table.rows.push_back(run_twogrid(scheme, domain, params, nH, nh, with_direct, options));
  return table;
}

double LockingRow::proxy_direct() const { return std::abs(direct_h - direct_h2); }
double LockingRow::proxy_scheme1() const { return std::abs(scheme1_h - scheme1_h2); }
double LockingRow::proxy_scheme2() const { return std::abs(scheme2_h - scheme2_h2); }

LockingSweep run_locking_sweep(Domain domain, const std::vector<double>& lambdas, int n, int nH, double mu,
                               const ExperimentOptions& options) {
  if (lambdas.empty()) throw std::invalid_argument("locking sweep needs at least one lambda");
  const int depth = refinement_levels(nH, n);
  check_dofs(domain, 2 * n, options);
  for (double lambda : lambdas) ElasticParams{mu, lambda, 1.0}.validate();

  const auto coarse_mesh = std::make_shared<const TriangleMesh>(build_mesh(domain, nH));
  const auto mesh_h = refined_mesh(*coarse_mesh, depth);
  const auto mesh_h2 = refined_mesh(*mesh_h, 1);

  LockingSweep sweep{domain, n, nH, mu, {}};
  for (double lambda : lambdas) {
    const ElasticParams params{mu, lambda, 1.0};
    LockingRow row;
    row.lambda = lambda;
    try {
      const AssembledSystem coarse = assemble(coarse_mesh, params);
      const AssembledSystem fine_h = assemble(mesh_h, params);
      const AssembledSystem fine_h2 = assemble(mesh_h2, params);
      row.direct_h = smallest_eigenpairs(fine_h, 1, options.solver).front().omega;
      row.direct_h2 = smallest_eigenpairs(fine_h2, 1, options.solver).front().omega;
      row.scheme1_h = scheme_41(coarse, fine_h, options.solver).omega_h_super;
      row.scheme1_h2 = scheme_41(coarse, fine_h2, options.solver).omega_h_super;
      row.scheme2_h = scheme_42(coarse, fine_h, options.solver).omega_h_super;
      row.scheme2_h2 = scheme_42(coarse, fine_h2, options.solver).omega_h_super;
    } catch (const SolverError& e) {
      row.direct_h = row.direct_h2 = row.scheme1_h = row.scheme1_h2 = row.scheme2_h = row.scheme2_h2 = kNaN;
      row.status = e.what();
    }
    sweep.rows.push_back(row);
  }
  return sweep;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  std::string shortest(buf, res.ptr);
  int digits = 0;
  bool leading = true;
  for (char c : shortest) {
    if (c == 'e' || c == 'E') break;
    if (c < '0' || c > '9') continue;
    if (c == '0' && leading) continue;
    leading = false;
    ++digits;
  }
  if (digits >= 9) return shortest;
  std::snprintf(buf, sizeof buf, "%#.9g", x);
  std::string padded(buf);
  if (padded.back() == '.') padded.pop_back();
  return padded;
}

void write_csv(std::ostream& out, const CsvTable& table) {
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].find_first_of(",\n") != std::string::npos)
        throw std::invalid_argument("CSV field contains a separator: " + row[i]);
      out << (i ? "," : "") << row[i];
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw std::invalid_argument("CSV row length differs from header");
    write_row(row);
  }
}

CsvTable read_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return fields;
  };
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV input is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != table.header.size())
      throw std::runtime_error("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                               std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  return table;
}

void write_csv_file(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(out, table);
  if (!out) throw std::runtime_error("error writing " + path);
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

namespace {

std::string opt_number(const std::optional<double>& x) { return x ? format_number(*x) : ""; }

std::size_t column(const CsvTable& csv, const std::string& name) {
  const auto it = std::find(csv.header.begin(), csv.header.end(), name);
  if (it == csv.header.end()) throw std::runtime_error("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - csv.header.begin());
}

double parse_double(const std::string& s) {
  if (s == "nan") return kNaN;
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("CSV field '" + s + "' is not a number");
  }
  if (used != s.size()) throw std::runtime_error("CSV field '" + s + "' is not a number");
  return x;
}

long long parse_integer(const std::string& s) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("CSV field '" + s + "' is not an integer");
  return v;
}

}  // namespace

CsvTable to_csv(const ConvergenceTable& table) {
  CsvTable csv;
  csv.header = {"domain", "mu", "lambda", "n", "h", "omega", "ratio", "dofs", "seconds"};
  for (const auto& r : table.rows)
    csv.rows.push_back({to_string(table.domain), format_number(table.params.mu), format_number(table.params.lambda),
                        std::to_string(r.n), format_number(r.h), format_number(r.omega), opt_number(r.ratio),
                        std::to_string(r.dofs), format_number(r.seconds)});
  return csv;
}

CsvTable to_csv(const TwoGridTable& table) {
  CsvTable csv;
  csv.header = {"domain", "mu",    "lambda",  "scheme",            "nH",           "nh",
                "H",      "h",     "omega_H", "omega",             "seconds",      "linear_iterations",
                "shift_regularized", "omega_direct", "direct_seconds"};
  for (const auto& r : table.rows)
    csv.rows.push_back({to_string(table.domain), format_number(table.params.mu), format_number(table.params.lambda),
                        std::to_string(static_cast<int>(table.scheme)), std::to_string(r.nH), std::to_string(r.nh),
                        format_number(mesh_size(r.nH)), format_number(mesh_size(r.nh)), format_number(r.omega_H),
                        format_number(r.omega), format_number(r.seconds), std::to_string(r.linear_iterations),
                        r.shift_regularized ? "1" : "0", opt_number(r.omega_direct), opt_number(r.direct_seconds)});
  return csv;
}

CsvTable to_csv(const LockingSweep& sweep) {
  CsvTable csv;
  csv.header = {"domain",    "n",          "nH",          "mu",           "lambda",        "direct_h",
                "direct_h2", "scheme1_h",  "scheme1_h2",  "scheme2_h",    "scheme2_h2",    "proxy_direct",
                "proxy_scheme1", "proxy_scheme2", "status"};
  for (const auto& r : sweep.rows) {
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    csv.rows.push_back({to_string(sweep.domain), std::to_string(sweep.n), std::to_string(sweep.nH),
                        format_number(sweep.mu), format_number(r.lambda), format_number(r.direct_h),
                        format_number(r.direct_h2), format_number(r.scheme1_h), format_number(r.scheme1_h2),
                        format_number(r.scheme2_h), format_number(r.scheme2_h2), format_number(r.proxy_direct()),
                        format_number(r.proxy_scheme1()), format_number(r.proxy_scheme2()), status});
  }
  return csv;
}

CsvTable to_csv(const std::vector<EigenPair>& pairs) {
  CsvTable csv;
  csv.header = {"index", "omega", "residual", "iterations"};
  for (std::size_t i = 0; i < pairs.size(); ++i)
    csv.rows.push_back({std::to_string(i + 1), format_number(pairs[i].omega), format_number(pairs[i].residual),
                        std::to_string(pairs[i].iterations)});
  return csv;
}

ConvergenceTable convergence_table_from_csv(const CsvTable& csv) {
  ConvergenceTable table;
  const std::size_t c_domain = column(csv, "domain"), c_mu = column(csv, "mu"), c_lambda = column(csv, "lambda"),
                    c_n = column(csv, "n"), c_h = column(csv, "h"), c_omega = column(csv, "omega"),
                    c_ratio = column(csv, "ratio"), c_dofs = column(csv, "dofs"), c_sec = column(csv, "seconds");
  for (const auto& f : csv.rows) {
    table.domain = parse_domain(f[c_domain]);
    table.params.mu = parse_double(f[c_mu]);
    table.params.lambda = parse_double(f[c_lambda]);
    ConvergenceRow row;
    row.n = static_cast<int>(parse_integer(f[c_n]));
    row.h = parse_double(f[c_h]);
    row.omega = parse_double(f[c_omega]);
    if (!f[c_ratio].empty()) row.ratio = parse_double(f[c_ratio]);
    row.dofs = static_cast<std::size_t>(parse_integer(f[c_dofs]));
    row.seconds = parse_double(f[c_sec]);
    table.rows.push_back(row);
  }
  return table;
}

LockingSweep locking_sweep_from_csv(const CsvTable& csv) {
  LockingSweep sweep;
  const std::size_t c_domain = column(csv, "domain"), c_n = column(csv, "n"), c_nH = column(csv, "nH"),
                    c_mu = column(csv, "mu"), c_lambda = column(csv, "lambda");
  const std::size_t c_vals[6] = {column(csv, "direct_h"),  column(csv, "direct_h2"), column(csv, "scheme1_h"),
                                 column(csv, "scheme1_h2"), column(csv, "scheme2_h"), column(csv, "scheme2_h2")};
  const std::size_t c_status = column(csv, "status");
  for (const auto& f : csv.rows) {
    sweep.domain = parse_domain(f[c_domain]);
    sweep.n = static_cast<int>(parse_integer(f[c_n]));
    sweep.nH = static_cast<int>(parse_integer(f[c_nH]));
    sweep.mu = parse_double(f[c_mu]);
    LockingRow row;
    row.lambda = parse_double(f[c_lambda]);
    double* targets[6] = {&row.direct_h, &row.direct_h2, &row.scheme1_h, &row.scheme1_h2, &row.scheme2_h,
                          &row.scheme2_h2};
    for (int i = 0; i < 6; ++i) *targets[i] = parse_double(f[c_vals[i]]);
    row.status = f[c_status];
    sweep.rows.push_back(row);
  }
  return sweep;
}

void write_locking_svg(std::ostream& out, const LockingSweep& sweep) {
  constexpr double width = 640, height = 420, left = 80, right = 150, top = 30, bottom = 60;
  struct Series {
    const char* name;
    const char* color;
    double (LockingRow::*proxy)() const;
  };
  const Series series[] = {{"direct", "#1f77b4", &LockingRow::proxy_direct},
                           {"scheme 1", "#d62728", &LockingRow::proxy_scheme1},
                           {"scheme 2", "#2ca02c", &LockingRow::proxy_scheme2}};

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& r : sweep.rows) {
    if (!(r.lambda > 0.0)) continue;
    for (const auto& s : series) {
      const double y = (r.*s.proxy)();
      if (!std::isfinite(y) || !(y > 0.0)) continue;
      xmin = std::min(xmin, std::log10(r.lambda));
      xmax = std::max(xmax, std::log10(r.lambda));
      ymin = std::min(ymin, std::log10(y));
      ymax = std::max(ymax, std::log10(y));
    }
  }
  const bool empty = !(xmin <= xmax);
  if (empty) xmin = 0, xmax = 1, ymin = -1, ymax = 0;
  xmin = std::floor(xmin), xmax = std::ceil(xmax), ymin = std::floor(ymin), ymax = std::ceil(ymax);
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double ly) { return top + (ymax - ly) / (ymax - ymin) * ph; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\">" << to_string(sweep.domain)
      << ", n=" << sweep.n << ": |omega_h - omega_h/2| against lambda</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(xmin); e <= static_cast<int>(xmax); ++e)
    out << "<text x=\"" << px(e) << "\" y=\"" << top + ph + 18
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">1e" << e << "</text>\n";
  for (int e = static_cast<int>(ymin); e <= static_cast<int>(ymax); ++e) {
    out << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(e) << "\" y2=\"" << py(e)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(e) + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">lambda</text>\n";

  int legend = 0;
  for (const auto& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (const auto& r : sweep.rows) {
      const double y = (r.*s.proxy)();
      if (!(r.lambda > 0.0) || !std::isfinite(y) || !(y > 0.0)) continue;
      out << px(std::log10(r.lambda)) << ',' << py(std::log10(y)) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + 20 + 20 * legend++;
    out << "<line x1=\"" << left + pw + 15 << "\" x2=\"" << left + pw + 40 << "\" y1=\"" << ly << "\" y2=\"" << ly
        << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << s.name << "</text>\n";
  }
  out << "</svg>\n";
}

void write_locking_svg_file(const std::string& path, const LockingSweep& sweep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_locking_svg(out, sweep);
  if (!out) throw std::runtime_error("error writing " + path);
}

}  // namespace crtg
