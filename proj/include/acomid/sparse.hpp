#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace acomid {

using DenseVec = std::vector<double>;

/// Sparse vector with strictly increasing indices and no stored zeros.
///
/// Used both for samples and for the loss gradients pushed by workers.
class SparseVec {
 public:
  SparseVec() = default;
  explicit SparseVec(std::size_t dim) : dim_(dim) {}

  /// Builds from unordered (index, value) pairs. Sorts, drops exact zeros.
  /// Throws std::invalid_argument on duplicate indices or index >= dim.
  SparseVec(std::size_t dim, std::vector<std::pair<std::size_t, double>> entries);

  /// Builds from already-sorted parallel arrays; same validation as above
  /// but without the sort.
  static SparseVec from_sorted(std::size_t dim, std::vector<std::size_t> indices,
                               std::vector<double> values);

  std::size_t dim() const { return dim_; }
  std::size_t nnz() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }

  std::span<const std::size_t> indices() const { return indices_; }
  std::span<const double> values() const { return values_; }

  /// Returns a * this. Entries that become exactly zero are dropped.
  SparseVec scaled(double a) const;

  DenseVec densify() const;

  friend bool operator==(const SparseVec&, const SparseVec&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
};

double sparse_dot(const SparseVec& x, std::span<const double> w);

/// w[i] += a * g[i] over the support of g. Other coordinates are not touched.
void axpy_sparse(std::span<double> w, double a, const SparseVec& g);

inline std::size_t nnz(const SparseVec& x) { return x.nnz(); }

double l2_norm(std::span<const double> v);
double l2_norm(const SparseVec& v);

double linf_distance(std::span<const double> a, std::span<const double> b);

}  // namespace acomid
