#include "crtg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace crtg {

SparseSymMatrix SparseSymMatrix::from_triplets(std::size_t dim, std::vector<Triplet> triplets) {
  for (const Triplet& t : triplets)
    if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= dim ||
        static_cast<std::size_t>(t.col) >= dim)
      throw std::invalid_argument("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                                  ") outside a " + std::to_string(dim) + "x" + std::to_string(dim) +
                                  " matrix");

  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseSymMatrix m;
  m.dim_ = dim;
  m.row_offsets_.assign(dim + 1, 0);
  m.col_indices_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size();) {
    const int row = triplets[k].row;
    const int col = triplets[k].col;
    double sum = 0.0;
    for (; k < triplets.size() && triplets[k].row == row && triplets[k].col == col; ++k)
      sum += triplets[k].value;
    m.col_indices_.push_back(col);
    m.values_.push_back(sum);
    ++m.row_offsets_[static_cast<std::size_t>(row) + 1];
  }
  for (std::size_t i = 0; i < dim; ++i) m.row_offsets_[i + 1] += m.row_offsets_[i];
  return m;
}

SparseSymMatrix SparseSymMatrix::diagonal(std::span<const double> diag) {
  std::vector<Triplet> t;
  t.reserve(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i)
    t.push_back({static_cast<int>(i), static_cast<int>(i), diag[i]});
  return from_triplets(diag.size(), std::move(t));
}

SparseSymMatrix SparseSymMatrix::identity(std::size_t dim) {
  const Vector ones(dim, 1.0);
  return diagonal(ones);
}

double SparseSymMatrix::at(std::size_t row, std::size_t col) const {
  const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row]);
  const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[row + 1]);
  const auto it = std::lower_bound(first, last, static_cast<int>(col));
  if (it == last || *it != static_cast<int>(col)) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

Vector SparseSymMatrix::diagonal_values() const {
  Vector d(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) d[i] = at(i, i);
  return d;
}

bool SparseSymMatrix::is_diagonal() const {
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      if (static_cast<std::size_t>(col_indices_[k]) != i && values_[k] != 0.0) return false;
  return true;
}

double SparseSymMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseSymMatrix::norm_inf() const {
  double m = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) row += std::abs(values_[k]);
    m = std::max(m, row);
  }
  return m;
}

double SparseSymMatrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      worst = std::max(worst, std::abs(values_[k] - at(static_cast<std::size_t>(col_indices_[k]), i)));
  return worst;
}

void SparseSymMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != dim_ || y.size() != dim_)
    throw std::invalid_argument("matrix-vector product dimension mismatch");
  for (std::size_t i = 0; i < dim_; ++i) {
    double sum = 0.0;
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      sum += values_[k] * x[static_cast<std::size_t>(col_indices_[k])];
    y[i] = sum;
  }
}

Vector SparseSymMatrix::multiply(std::span<const double> x) const {
  Vector y(dim_);
  multiply(x, y);
  return y;
}

double SparseSymMatrix::quadratic_form(std::span<const double> x) const {
  return dot(x, multiply(x));
}

SparseSymMatrix SparseSymMatrix::add_scaled(const SparseSymMatrix& other, double alpha) const {
  if (other.dim_ != dim_) throw std::invalid_argument("matrix sum dimension mismatch");
  std::vector<Triplet> t;
  t.reserve(nnz() + other.nnz());
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      t.push_back({static_cast<int>(i), col_indices_[k], values_[k]});
    for (std::size_t k = other.row_offsets_[i]; k < other.row_offsets_[i + 1]; ++k)
      t.push_back({static_cast<int>(i), other.col_indices_[k], alpha * other.values_[k]});
  }
  return from_triplets(dim_, std::move(t));
}

SparseSymMatrix SparseSymMatrix::scaled(double alpha) const {
  SparseSymMatrix m = *this;
  for (double& v : m.values_) v *= alpha;
  return m;
}

void SparseSymMatrix::write_coordinate(std::ostream& os) const {
  os.precision(17);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
      os << i << ' ' << col_indices_[k] << ' ' << values_[k] << '\n';
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot product dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void write_vector(std::ostream& os, std::span<const double> v) {
  os.precision(17);
  for (double x : v) os << x << '\n';
}

}  // namespace crtg
