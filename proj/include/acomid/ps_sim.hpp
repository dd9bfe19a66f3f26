#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acomid/data_io.hpp"
#include "acomid/metrics.hpp"
#include "acomid/optimizers.hpp"

namespace acomid {

enum class Algo {
  dsgd,          // delayed SGD, worker pushes the dense L2 term
  comid,         // exact COMID argmin with r from (lambda1, lambda)
  comid_closed,  // explicit COMID with L2: w / (1 + lambda eta) - eta g
  l2trick,       // L2 term applied at the server on the latest w
  ftrl,          // sequential per-coordinate FTRL-proximal
  aftrl,         // asynchronous per-coordinate FTRL-proximal
};

std::string_view algo_name(Algo a);
std::optional<Algo> parse_algo(std::string_view name);

/// Maps a server step t to the step tau(t) whose snapshot produced the
/// gradient applied at t. Every schedule satisfies 0 <= t - tau(t) <= tau_max.
class DelaySchedule {
 public:
  enum class Kind { fixed, random_bounded, trace };

  static DelaySchedule fixed(std::uint64_t tau_max);
  static DelaySchedule random_bounded(std::uint64_t tau_max, std::uint64_t seed);
  /// Replays `taus` verbatim. Throws if any entry violates the bound.
  static DelaySchedule trace(std::vector<std::uint64_t> taus, std::uint64_t tau_max);

  Kind kind() const { return kind_; }
  std::uint64_t tau_max() const { return tau_max_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::uint64_t>& trace_values() const { return trace_; }

  /// tau(0), ..., tau(T - 1).
  std::vector<std::uint64_t> taus(std::uint64_t T) const;

 private:
  DelaySchedule(Kind kind, std::uint64_t tau_max) : kind_(kind), tau_max_(tau_max) {}

  Kind kind_;
  std::uint64_t tau_max_;
  std::uint64_t seed_ = 0;
  std::vector<std::uint64_t> trace_;
};

/// Trace file: header `tau_max=<k>` then one tau(t) per line.
DelaySchedule read_delay_trace(const std::filesystem::path& path);
void write_delay_trace(const std::filesystem::path& path, std::span<const std::uint64_t> taus,
                       std::uint64_t tau_max);

struct SimConfig {
  std::size_t workers = 1;
  Algo algo = Algo::l2trick;
  double eta = 0.01;
  double lambda = 0.0;   // L2 coefficient for dsgd / comid / comid_closed / l2trick
  double lambda1 = 0.0;  // L1 coefficient for comid and FTRL
  double lambda2 = 0.0;  // L2 coefficient for FTRL
  double alpha = 0.1;
  double beta = 1.0;
  std::size_t epochs = 1;
  std::uint64_t seed = 1;
  DelaySchedule delay = DelaySchedule::fixed(0);
  std::uint64_t eval_every = 0;  // 0 means once per epoch
  bool init_w1_ones = false;     // FTRL only: choose z so the first w is all ones

  void validate() const;
  /// Bound on realized staleness: the schedule's tau_max, and 0 for one worker
  /// or for sequential FTRL.
  std::uint64_t effective_tau_max() const;
};

/// The regularizer r(w) the configured algorithm optimizes with.
Regularizer sim_regularizer(const SimConfig& cfg);

/// Sample index consumed at each server step: per epoch, a seed-shuffled
/// permutation. Step t always consumes entry t, whichever worker computes it.
std::vector<std::size_t> sample_order(std::size_t n_samples, std::size_t epochs,
                                      std::uint64_t seed);

struct RunOptions {
  bool log_iterates = false;              // keep w_0..w_T and applied gradients (d <= 64)
  std::optional<DenseVec> regret_w_star;  // fills RunRecord::regret; implies log_iterates
  bool wall_clock = false;                // simulated mode records 0 unless set
};

struct RunResult {
  std::vector<RunRecord> records;
  DenseVec final_w;
  std::vector<std::uint64_t> taus;          // realized tau(t) per applied step
  std::vector<std::size_t> samples;         // sample index per applied step
  std::vector<std::size_t> worker_of_step;  // worker that produced step t
  std::uint64_t pushes = 0;
  std::uint64_t applied = 0;
  std::uint64_t tx_values = 0;
  std::uint64_t max_staleness = 0;
  std::uint64_t tau_cap = 0;

  std::vector<DenseVec> iterates;        // w_0 .. w_T when logged
  std::vector<SparseVec> applied_grads;  // g_t per step when logged
  std::vector<double> regret_terms;      // c_t(w_t) - c_t(w*) when requested

  std::vector<std::uint64_t> staleness_histogram() const;
};

/// Deterministic single-threaded run: at step t the server applies the
/// gradient of sample(t) computed against the snapshot w_{tau(t)}.
RunResult run_simulated(const SimConfig& cfg, const Dataset& data, const RunOptions& opts = {});

/// Real threads: `workers` worker threads pull, compute and push; the calling
/// thread serves as the parameter server. Realized staleness is capped at
/// effective_tau_max() by throttling pulls; the realized delays are returned
/// in `taus` for replay through DelaySchedule::trace.
RunResult run_threaded(const SimConfig& cfg, const Dataset& data, const RunOptions& opts = {});

/// Measures M_in, M_out and the head terms of the regret bound from a run
/// made with log_iterates.
BoundConstants measure_bound_constants(const RunResult& run, const SimConfig& cfg,
                                       std::span<const double> w_star);

enum class TxBaseline { sparse, dense };

/// Cumulative transmitted value counts: nnz of each push, or dim for dense.
class TxCounter {
 public:
  TxCounter(TxBaseline baseline, std::size_t dim) : baseline_(baseline), dim_(dim) {}
  void add(const GradientMsg& msg) {
    total_ += baseline_ == TxBaseline::dense ? dim_ : msg.nnz_pushed;
  }
  std::uint64_t total() const { return total_; }

 private:
  TxBaseline baseline_;
  std::size_t dim_;
  std::uint64_t total_ = 0;
};

std::vector<std::uint64_t> tx_accounting(std::span<const GradientMsg> msgs, TxBaseline baseline,
                                         std::size_t dim);

inline TxBaseline tx_baseline(Algo a) {
  return a == Algo::dsgd ? TxBaseline::dense : TxBaseline::sparse;
}

}  // namespace acomid
