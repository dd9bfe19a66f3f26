#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "acomid/ps_sim.hpp"
#include "server_model.hpp"

namespace acomid::detail {

inline constexpr std::size_t kMaxLoggedDim = 64;

/// Records what the server applied, evaluates at eval points, and fills in
/// regret after the run. Used identically by both runners.
class RunBook {
 public:
  RunBook(const SimConfig& cfg, const Dataset& data, const RunOptions& opts);

  std::uint64_t total_steps() const { return T_; }
  const std::vector<std::size_t>& order() const { return order_; }

  void begin(const ServerModel& server);
  void after_apply(const ServerModel& server, const Push& p);
  RunResult finish(const ServerModel& server);

 private:
  const SimConfig& cfg_;
  const Dataset& data_;
  const RunOptions& opts_;
  TxCounter tx_;
  std::uint64_t T_ = 0;
  std::uint64_t eval_every_ = 1;
  bool logging_ = false;
  std::vector<std::size_t> order_;
  RunResult result_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace acomid::detail
