#pragma once

#include <memory>
#include <span>
#include <vector>

#include "acomid/ps_sim.hpp"

namespace acomid::detail {

/// What a worker sends: the loss gradient, plus the stale dense w for the
/// delayed-SGD baseline (which pushes lambda * w_{tau(t)} over the wire).
struct Push {
  GradientMsg msg;
  std::uint64_t ticket = 0;  // server step this push is applied at
  std::size_t sample = 0;
  std::size_t worker = 0;
  DenseVec stale_w;
};

/// Server-side model state for one algorithm. Not thread safe; callers
/// serialize access.
class ServerModel {
 public:
  virtual ~ServerModel() = default;

  /// Current weights on `support`, as a pull at this version returns them.
  virtual void pull(std::span<const std::size_t> support, std::vector<double>& out) const = 0;
  virtual void apply(const Push& push) = 0;
  virtual DenseVec weights() const = 0;
  virtual bool dense_push() const { return false; }
};

std::unique_ptr<ServerModel> make_server(const SimConfig& cfg, std::size_t dim);

/// Worker side: gradient of `sample` against pulled support values.
Push compute_push(const LabeledSample& sample, std::span<const double> pulled,
                  std::uint64_t version);

}  // namespace acomid::detail
