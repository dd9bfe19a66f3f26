#include "acomid/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace acomid {

namespace {

void check_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(expected) + " vs " +
                                std::to_string(got) + ")");
  }
}

}  // namespace

SparseVec::SparseVec(std::size_t dim,
                     std::vector<std::pair<std::size_t, double>> entries)
    : dim_(dim) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  indices_.reserve(entries.size());
  values_.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const auto [idx, val] = entries[k];
    if (idx >= dim) {
      throw std::invalid_argument("SparseVec: index " + std::to_string(idx) +
                                  " out of range for dim " + std::to_string(dim));
    }
    if (k > 0 && entries[k - 1].first == idx) {
      throw std::invalid_argument("SparseVec: duplicate index " + std::to_string(idx));
    }
    if (val == 0.0) continue;
    indices_.push_back(idx);
    values_.push_back(val);
  }
}

SparseVec SparseVec::from_sorted(std::size_t dim, std::vector<std::size_t> indices,
                                 std::vector<double> values) {
  if (indices.size() != values.size()) {
    throw std::invalid_argument("SparseVec: index/value length mismatch");
  }
  SparseVec out(dim);
  out.indices_.reserve(indices.size());
  out.values_.reserve(values.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] >= dim) {
      throw std::invalid_argument("SparseVec: index " + std::to_string(indices[k]) +
                                  " out of range for dim " + std::to_string(dim));
    }
    if (k > 0 && indices[k] <= indices[k - 1]) {
      throw std::invalid_argument("SparseVec: indices not strictly increasing");
    }
    if (values[k] == 0.0) continue;
    out.indices_.push_back(indices[k]);
    out.values_.push_back(values[k]);
  }
  return out;
}

SparseVec SparseVec::scaled(double a) const {
  SparseVec out(dim_);
  out.indices_.reserve(indices_.size());
  out.values_.reserve(values_.size());
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    const double v = a * values_[k];
    if (v == 0.0) continue;
    out.indices_.push_back(indices_[k]);
    out.values_.push_back(v);
  }
  return out;
}

DenseVec SparseVec::densify() const {
  DenseVec out(dim_, 0.0);
  for (std::size_t k = 0; k < indices_.size(); ++k) out[indices_[k]] = values_[k];
  return out;
}

double sparse_dot(const SparseVec& x, std::span<const double> w) {
  check_dim(x.dim(), w.size(), "sparse_dot");
  const auto idx = x.indices();
  const auto val = x.values();
  double sum = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) sum += val[k] * w[idx[k]];
  return sum;
}

void axpy_sparse(std::span<double> w, double a, const SparseVec& g) {
  check_dim(g.dim(), w.size(), "axpy_sparse");
  const auto idx = g.indices();
  const auto val = g.values();
  for (std::size_t k = 0; k < idx.size(); ++k) w[idx[k]] += a * val[k];
}

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double l2_norm(const SparseVec& v) { return l2_norm(v.values()); }

double linf_distance(std::span<const double> a, std::span<const double> b) {
  check_dim(a.size(), b.size(), "linf_distance");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace acomid
