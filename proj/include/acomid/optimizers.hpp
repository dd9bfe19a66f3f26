#pragma once

#include <cstdint>
#include <span>

#include "acomid/objectives.hpp"
#include "acomid/sparse.hpp"

namespace acomid {

struct ModelState {
  DenseVec w;
  std::uint64_t t = 0;
};

/// A loss gradient pushed by a worker, computed against snapshot w_{produced_at}.
struct GradientMsg {
  SparseVec g;
  std::uint64_t produced_at = 0;
  std::size_t nnz_pushed = 0;
};

inline GradientMsg make_msg(SparseVec g, std::uint64_t produced_at) {
  const std::size_t n = g.nnz();
  return GradientMsg{std::move(g), produced_at, n};
}

/// Bounded delay of the fixed schedule: 0 while t <= tau_max, else t - tau_max.
inline std::uint64_t tau_fixed(std::uint64_t t, std::uint64_t tau_max) {
  return t <= tau_max ? 0 : t - tau_max;
}

// ---------------------------------------------------------------------------
// Server step rules. All take the state by value and return the next state.

/// Delayed SGD: w <- w - eta * (g + lambda * w_stale). The regularizer term is
/// evaluated at the stale snapshot the worker pulled.
ModelState dsgd_step(ModelState state, const GradientMsg& msg, double lambda,
                     std::span<const double> stale_w, double eta);

/// Exact minimizer of eta<g, w> + eta r(w) + B_psi(w, w_t), coordinatewise.
ModelState comid_step_generic(ModelState state, const GradientMsg& msg,
                              const Regularizer& reg, const MirrorMap& psi, double eta);

/// w <- w / (1 + lambda eta) - eta g.
ModelState comid_l2_closed_step(ModelState state, const GradientMsg& msg, double lambda,
                                double eta);

/// w <- w - eta (g + lambda w), with lambda applied to the server's latest w.
/// Throws std::invalid_argument unless lambda * eta < 1.
ModelState l2_trick_step(ModelState state, const GradientMsg& msg, double lambda,
                         double eta);

// ---------------------------------------------------------------------------
// Per-coordinate FTRL-proximal server state.

struct FtrlParams {
  double alpha = 0.1;
  double beta = 1.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  void validate() const;
};

struct FtrlState {
  FtrlState() = default;
  FtrlState(std::size_t dim, FtrlParams params);

  DenseVec z;
  DenseVec n;
  DenseVec w;
  FtrlParams params;
  std::uint64_t t = 0;

  /// Weight coordinate i implied by the current (z_i, n_i).
  double materialize(std::size_t i) const;
  DenseVec materialize_all() const;
};

/// Closed-form per-coordinate FTRL weight.
double ftrl_weight(double z, double n, const FtrlParams& p);

/// Sets z so that the first materialized weight equals w1 (with n = 0).
void ftrl_init_weights(FtrlState& state, std::span<const double> w1);

/// Lazy update over support(msg.g): materialize w_i from the old (z_i, n_i),
/// then accumulate z and n. Coordinates outside the support are not touched.
FtrlState ftrl_coordinate_update(FtrlState state, const GradientMsg& msg);

// ---------------------------------------------------------------------------
// The two iterate sequences whose equality is the FTRL/COMID equivalence.
// Both use per-coordinate quadratic stabilizers psi_i(w) = sigma_i/2 |w - c_i|^2
// where c_i is the iterate at the step psi_i is introduced.

/// Proximal FTRL in argmin form:
///   w_{t+1} = argmin (g_{1:t} + sum_{i<t} r'(w_{i+1})) . w + psi_{1:t}(w) + r(w)
/// kept through running accumulators.
class FtrlArgminSequence {
 public:
  FtrlArgminSequence(std::size_t dim, Regularizer reg);

  const DenseVec& current() const { return w_; }
  std::uint64_t steps() const { return t_; }

  /// Adds gradient g and stabilizer weights sigma (>= 0 per coordinate).
  /// Throws std::domain_error when a coordinate's total sigma is still 0.
  const DenseVec& step(const SparseVec& g, std::span<const double> sigma);

  /// Test hook: adds delta to the linear accumulator of coordinate i.
  void perturb_accumulator(std::size_t i, double delta) { lin_[i] += delta; }

 private:
  Regularizer reg_;
  DenseVec lin_;        // g_{1:t} + sum of r'(w_{i+1})
  DenseVec sigma_sum_;  // sigma_{1:t}
  DenseVec centered_;   // sum_i sigma_i * c_i
  DenseVec w_;
  std::uint64_t t_ = 0;
};

/// The same sequence in mirror-descent form:
///   w_{t+1} = argmin g_t . w + r(w) + B_{psi_{1:t}}(w, w_t)
class ComidProxSequence {
 public:
  ComidProxSequence(std::size_t dim, Regularizer reg);

  const DenseVec& current() const { return w_; }
  std::uint64_t steps() const { return t_; }

  const DenseVec& step(const SparseVec& g, std::span<const double> sigma);

 private:
  Regularizer reg_;
  DenseVec sigma_sum_;
  DenseVec w_;
  std::uint64_t t_ = 0;
};

}  // namespace acomid
