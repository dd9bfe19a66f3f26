#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "acomid/data_io.hpp"
#include "acomid/objectives.hpp"

namespace acomid {

/// One evaluation point of a run.
struct RunRecord {
  std::uint64_t step = 0;
  double logloss_sum = 0.0;
  double logloss_mean = 0.0;
  std::optional<double> regret;
  std::uint64_t tx_values = 0;
  double wall_ms = 0.0;
};

/// Sum (not mean) of per-sample logistic losses.
double logloss_dataset(const Dataset& data, std::span<const double> w);

/// Running regularized regret against a fixed comparator.
class RegretAccumulator {
 public:
  RegretAccumulator(DenseVec w_star, Regularizer reg);

  /// Adds c_t(w_t) - c_t(w*) for the loss of `sample`; returns the added term.
  double update(std::span<const double> w_t, const LabeledSample& sample);

  double total() const { return total_; }
  std::uint64_t count() const { return count_; }
  const DenseVec& w_star() const { return w_star_; }

 private:
  DenseVec w_star_;
  Regularizer reg_;
  double r_star_;
  double total_ = 0.0;
  std::uint64_t count_ = 0;
};

struct WStarOptions {
  double tol = 1e-8;
  std::size_t max_iter = 200000;
};

struct WStarResult {
  DenseVec w;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Minimizes (1/m) sum_i logloss_i(w) + r(w) by gradient descent with a
/// backtracking line search. Requires an L2 (or none) regularizer; with
/// lambda = 0 the run may stop at max_iter without converging.
WStarResult solve_w_star(const Dataset& data, const Regularizer& reg,
                         const WStarOptions& opts = {});

/// As solve_w_star, memoized in `cache_dir` under a hash of (data, reg, tol).
WStarResult solve_w_star_cached(const Dataset& data, const Regularizer& reg,
                                const WStarOptions& opts,
                                const std::filesystem::path& cache_dir);

std::uint64_t content_hash(const Dataset& data, const Regularizer& reg, double tol);

/// Right-hand side of the delayed regret bound
///   B/eta + r_head + tau_max * eta * alpha * T * (2 M^2 + M_in M_out)
/// with M = M_out (as the theorem is stated) and M = M_in (as in the lemma).
struct RegretBound {
  double m_out_variant = 0.0;
  double m_in_variant = 0.0;
};
RegretBound theorem2_rhs(const BoundConstants& c, std::uint64_t T);

}  // namespace acomid
