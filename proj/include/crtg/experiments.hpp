#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crtg/cr_elasticity.hpp"
#include "crtg/linear_solvers.hpp"
#include "crtg/mesh.hpp"
#include "crtg/twogrid.hpp"

namespace crtg {

/// log2 |(w_h - w_h2) / (w_h2 - w_h4)|. Throws std::domain_error if either
/// difference is zero or the inputs are not finite.
double convergence_ratio(double w_h, double w_h2, double w_h4);

struct ExperimentOptions {
  SolverConfig solver;
  std::size_t max_dofs = 1'500'000;  // larger problems are refused before assembly
};

class DofLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Free C-R unknowns of build_mesh(domain, n) (two per interior edge), computed
/// without building the mesh.
std::size_t expected_dofs(Domain domain, int n);

/// Builds and assembles the level-n mesh; throws DofLimitError past max_dofs.
AssembledSystem assemble_problem(Domain domain, int n, const ElasticParams& params, const ExperimentOptions& options);

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  double omega = 0.0;
  std::optional<double> ratio;  // from this row and the next two
  std::size_t dofs = 0;
  double seconds = 0.0;
};

struct ConvergenceTable {
  Domain domain = Domain::square;
  ElasticParams params;
  std::vector<ConvergenceRow> rows;
};

/// Smallest eigenvalue on n = start_n, 2 start_n, ... (levels rows).
ConvergenceTable run_table(Domain domain, const ElasticParams& params, int levels, int start_n,
                           const ExperimentOptions& options = {});

struct TwoGridRow {
  int nH = 0;
  int nh = 0;
  double omega_H = 0.0;
  double omega = 0.0;  // two-grid eigenvalue
  double seconds = 0.0;
  int linear_iterations = 0;
  bool shift_regularized = false;
  std::optional<double> omega_direct;  // direct fine-grid eigenvalue
  std::optional<double> direct_seconds;
};

struct TwoGridTable {
  Domain domain = Domain::square;
  ElasticParams params;
  TwoGridScheme scheme = TwoGridScheme::inverse_iteration;
  std::vector<TwoGridRow> rows;
};

/// The fine mesh is built by refining the nH mesh, so nh / nH must be a power of two.
TwoGridRow run_twogrid(TwoGridScheme scheme, Domain domain, const ElasticParams& params, int nH, int nh,
                       bool with_direct, const ExperimentOptions& options = {});

TwoGridTable run_twogrid_table(Domain domain, const ElasticParams& params, const std::vector<std::pair<int, int>>& pairs,
                               TwoGridScheme scheme, bool with_direct = true, const ExperimentOptions& options = {});

struct LockingRow {
  double lambda = 0.0;
  double direct_h = 0.0, direct_h2 = 0.0;
  double scheme1_h = 0.0, scheme1_h2 = 0.0;
  double scheme2_h = 0.0, scheme2_h2 = 0.0;
  std::string status = "ok";  // solver message when this lambda could not be computed

  double proxy_direct() const;
  double proxy_scheme1() const;
  double proxy_scheme2() const;
  bool ok() const { return status == "ok"; }
};

struct LockingSweep {
  Domain domain = Domain::square;
  int n = 0;
  int nH = 0;
  double mu = 1.0;
  std::vector<LockingRow> rows;
};

/// For every lambda: eigenvalues on n and 2n, directly and by both schemes with
/// the coarse mesh nH shared by the two fine levels. A SolverError for one lambda
/// is recorded in its row (values NaN) and the sweep continues.
LockingSweep run_locking_sweep(Domain domain, const std::vector<double>& lambdas, int n, int nH = 8, double mu = 1.0,
                               const ExperimentOptions& options = {});

/// Raw CSV: one header row followed by data rows. Fields never contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Shortest decimal form that reads back to the same double, padded to at least
/// 9 significant digits.
std::string format_number(double x);

void write_csv(std::ostream& out, const CsvTable& table);
CsvTable read_csv(std::istream& in);
void write_csv_file(const std::string& path, const CsvTable& table);
CsvTable read_csv_file(const std::string& path);

CsvTable to_csv(const ConvergenceTable& table);
CsvTable to_csv(const TwoGridTable& table);
CsvTable to_csv(const LockingSweep& sweep);
CsvTable to_csv(const std::vector<EigenPair>& pairs);

ConvergenceTable convergence_table_from_csv(const CsvTable& csv);
LockingSweep locking_sweep_from_csv(const CsvTable& csv);

/// Log-log plot of the three proxy errors against lambda as standalone SVG.
void write_locking_svg(std::ostream& out, const LockingSweep& sweep);
void write_locking_svg_file(const std::string& path, const LockingSweep& sweep);

}  // namespace crtg
