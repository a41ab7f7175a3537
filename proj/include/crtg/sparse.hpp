#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace crtg {

using Vector = std::vector<double>;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Symmetric sparse matrix in compressed-row storage. Both triangles are stored,
/// column indices are sorted within each row.
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;

  /// Sums duplicate entries. Entries are accumulated in (row, col, insertion)
  /// order, so the result does not depend on how the triplets were produced
  /// beyond their order.
  static SparseSymMatrix from_triplets(std::size_t dim, std::vector<Triplet> triplets);
  static SparseSymMatrix diagonal(std::span<const double> diag);
  static SparseSymMatrix identity(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<int>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t row, std::size_t col) const;
  Vector diagonal_values() const;
  bool is_diagonal() const;
  double max_abs() const;
  /// max_i sum_j |a_ij|
  double norm_inf() const;
  /// max |a_ij - a_ji| over stored entries and their transposes.
  double asymmetry() const;
  bool is_symmetric(double rel_tol = 1e-12) const { return asymmetry() <= rel_tol * max_abs(); }

  void multiply(std::span<const double> x, std::span<double> y) const;
  Vector multiply(std::span<const double> x) const;
  double quadratic_form(std::span<const double> x) const;

  /// this + alpha * other, on the union pattern.
  SparseSymMatrix add_scaled(const SparseSymMatrix& other, double alpha) const;
  SparseSymMatrix scaled(double alpha) const;

  /// `i j value` per stored entry, 0-based.
  void write_coordinate(std::ostream& os) const;

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<int> col_indices_;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

void write_vector(std::ostream& os, std::span<const double> v);

}  // namespace crtg
