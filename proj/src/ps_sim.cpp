#include "acomid/ps_sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "run_common.hpp"
#include "server_model.hpp"

namespace acomid {

std::string_view algo_name(Algo a) {
  switch (a) {
    case Algo::dsgd: return "dsgd";
    case Algo::comid: return "comid";
    case Algo::comid_closed: return "comid-closed";
    case Algo::l2trick: return "l2trick";
    case Algo::ftrl: return "ftrl";
    case Algo::aftrl: return "aftrl";
  }
  return "?";
}

std::optional<Algo> parse_algo(std::string_view name) {
  for (Algo a : {Algo::dsgd, Algo::comid, Algo::comid_closed, Algo::l2trick, Algo::ftrl,
                 Algo::aftrl}) {
    if (algo_name(a) == name) return a;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Delay schedules

DelaySchedule DelaySchedule::fixed(std::uint64_t tau_max) {
  return DelaySchedule(Kind::fixed, tau_max);
}

DelaySchedule DelaySchedule::random_bounded(std::uint64_t tau_max, std::uint64_t seed) {
  DelaySchedule d(Kind::random_bounded, tau_max);
  d.seed_ = seed;
  return d;
}

DelaySchedule DelaySchedule::trace(std::vector<std::uint64_t> taus, std::uint64_t tau_max) {
  for (std::uint64_t t = 0; t < taus.size(); ++t) {
    if (taus[t] > t || t - taus[t] > tau_max) {
      throw std::invalid_argument("delay trace: tau(" + std::to_string(t) + ") = " +
                                  std::to_string(taus[t]) + " violates 0 <= t - tau(t) <= " +
                                  std::to_string(tau_max));
    }
  }
  DelaySchedule d(Kind::trace, tau_max);
  d.trace_ = std::move(taus);
  return d;
}

std::vector<std::uint64_t> DelaySchedule::taus(std::uint64_t T) const {
  std::vector<std::uint64_t> out(T);
  switch (kind_) {
    case Kind::fixed:
      for (std::uint64_t t = 0; t < T; ++t) out[t] = tau_fixed(t, tau_max_);
      break;
    case Kind::random_bounded: {
      std::mt19937_64 rng(seed_);
      for (std::uint64_t t = 0; t < T; ++t) {
        const std::uint64_t hi = std::min(t, tau_max_);
        out[t] = t - std::uniform_int_distribution<std::uint64_t>(0, hi)(rng);
      }
      break;
    }
    case Kind::trace:
      if (trace_.size() < T) {
        throw std::invalid_argument("delay trace has " + std::to_string(trace_.size()) +
                                    " entries, run needs " + std::to_string(T));
      }
      std::copy_n(trace_.begin(), T, out.begin());
      break;
  }
  return out;
}

DelaySchedule read_delay_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("tau_max=", 0) != 0) {
    throw ParseError(path.string(), 1, "expected header 'tau_max=<k>'");
  }
  std::uint64_t tau_max = 0;
  try {
    tau_max = std::stoull(line.substr(8));
  } catch (const std::exception&) {
    throw ParseError(path.string(), 1, "bad tau_max value");
  }
  std::vector<std::uint64_t> taus;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(line, &used);
    } catch (const std::exception&) {
      throw ParseError(path.string(), lineno, "expected an integer");
    }
    if (used != line.size() || line.front() == '-') {
      throw ParseError(path.string(), lineno, "expected a nonnegative integer");
    }
    taus.push_back(v);
  }
  return DelaySchedule::trace(std::move(taus), tau_max);
}

void write_delay_trace(const std::filesystem::path& path, std::span<const std::uint64_t> taus,
                       std::uint64_t tau_max) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "tau_max=" << tau_max << '\n';
  for (auto t : taus) out << t << '\n';
}

// ---------------------------------------------------------------------------
// Configuration

void SimConfig::validate() const {
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be >= 0");
  if (!(lambda >= 0.0) || !(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw std::invalid_argument("regularization coefficients must be >= 0");
  }
  if (algo == Algo::l2trick && !(lambda * eta < 1.0)) {
    throw std::invalid_argument("l2trick requires lambda * eta < 1");
  }
  if (algo == Algo::ftrl || algo == Algo::aftrl) {
    FtrlParams{alpha, beta, lambda1, lambda2}.validate();
  }
  if (init_w1_ones && algo != Algo::ftrl && algo != Algo::aftrl) {
    throw std::invalid_argument("init-z-for-w1-ones applies to ftrl/aftrl only");
  }
}

std::uint64_t SimConfig::effective_tau_max() const {
  if (workers == 1 || algo == Algo::ftrl) return 0;
  return delay.tau_max();
}

Regularizer sim_regularizer(const SimConfig& cfg) {
  switch (cfg.algo) {
    case Algo::dsgd:
    case Algo::comid_closed:
    case Algo::l2trick:
      return cfg.lambda > 0.0 ? Regularizer::l2(cfg.lambda) : Regularizer::none();
    case Algo::comid:
      if (cfg.lambda1 > 0.0 && cfg.lambda > 0.0) {
        return Regularizer::elastic_net(cfg.lambda1, cfg.lambda);
      }
      if (cfg.lambda1 > 0.0) return Regularizer::l1(cfg.lambda1);
      if (cfg.lambda > 0.0) return Regularizer::l2(cfg.lambda);
      return Regularizer::none();
    case Algo::ftrl:
    case Algo::aftrl:
      return Regularizer::elastic_net(cfg.lambda1, cfg.lambda2);
  }
  return Regularizer::none();
}

std::vector<std::size_t> sample_order(std::size_t n_samples, std::size_t epochs,
                                      std::uint64_t seed) {
  std::vector<std::size_t> order;
  order.reserve(n_samples * epochs);
  std::vector<std::size_t> perm(n_samples);
  for (std::size_t e = 0; e < epochs; ++e) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ull * (e + 1));
    std::shuffle(perm.begin(), perm.end(), rng);
    order.insert(order.end(), perm.begin(), perm.end());
  }
  return order;
}

std::vector<std::uint64_t> RunResult::staleness_histogram() const {
  std::vector<std::uint64_t> hist;
  for (std::uint64_t t = 0; t < taus.size(); ++t) {
    const std::uint64_t s = t - taus[t];
    if (hist.size() <= s) hist.resize(s + 1, 0);
    ++hist[s];
  }
  return hist;
}

std::vector<std::uint64_t> tx_accounting(std::span<const GradientMsg> msgs, TxBaseline baseline,
                                         std::size_t dim) {
  TxCounter counter(baseline, dim);
  std::vector<std::uint64_t> out;
  out.reserve(msgs.size());
  for (const auto& m : msgs) {
    counter.add(m);
    out.push_back(counter.total());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Server models

namespace detail {
namespace {

class DenseModelServer : public ServerModel {
 public:
  explicit DenseModelServer(std::size_t dim) { state_.w.assign(dim, 0.0); }

  void pull(std::span<const std::size_t> support, std::vector<double>& out) const override {
    out.resize(support.size());
    for (std::size_t k = 0; k < support.size(); ++k) out[k] = state_.w[support[k]];
  }
  DenseVec weights() const override { return state_.w; }

 protected:
  ModelState state_;
};

class DsgdServer final : public DenseModelServer {
 public:
  DsgdServer(std::size_t dim, double lambda, double eta)
      : DenseModelServer(dim), lambda_(lambda), eta_(eta) {}
  void apply(const Push& p) override {
    state_ = dsgd_step(std::move(state_), p.msg, lambda_, p.stale_w, eta_);
  }
  bool dense_push() const override { return true; }

 private:
  double lambda_, eta_;
};

class ComidServer final : public DenseModelServer {
 public:
  ComidServer(std::size_t dim, Regularizer reg, double eta)
      : DenseModelServer(dim), reg_(reg), psi_(MirrorMap::quadratic()), eta_(eta) {}
  void apply(const Push& p) override {
    state_ = comid_step_generic(std::move(state_), p.msg, reg_, psi_, eta_);
  }

 private:
  Regularizer reg_;
  MirrorMap psi_;
  double eta_;
};

class ComidClosedServer final : public DenseModelServer {
 public:
  ComidClosedServer(std::size_t dim, double lambda, double eta)
      : DenseModelServer(dim), lambda_(lambda), eta_(eta) {}
  void apply(const Push& p) override {
    state_ = comid_l2_closed_step(std::move(state_), p.msg, lambda_, eta_);
  }

 private:
  double lambda_, eta_;
};

class L2TrickServer final : public DenseModelServer {
 public:
  L2TrickServer(std::size_t dim, double lambda, double eta)
      : DenseModelServer(dim), lambda_(lambda), eta_(eta) {}
  void apply(const Push& p) override {
    state_ = l2_trick_step(std::move(state_), p.msg, lambda_, eta_);
  }

 private:
  double lambda_, eta_;
};

class FtrlServer final : public ServerModel {
 public:
  FtrlServer(std::size_t dim, FtrlParams params, bool w1_ones) : state_(dim, params) {
    if (w1_ones) ftrl_init_weights(state_, DenseVec(dim, 1.0));
  }
  void pull(std::span<const std::size_t> support, std::vector<double>& out) const override {
    out.resize(support.size());
    for (std::size_t k = 0; k < support.size(); ++k) out[k] = state_.materialize(support[k]);
  }
  void apply(const Push& p) override { state_ = ftrl_coordinate_update(std::move(state_), p.msg); }
  DenseVec weights() const override { return state_.materialize_all(); }

 private:
  FtrlState state_;
};

}  // namespace

std::unique_ptr<ServerModel> make_server(const SimConfig& cfg, std::size_t dim) {
  switch (cfg.algo) {
    case Algo::dsgd: return std::make_unique<DsgdServer>(dim, cfg.lambda, cfg.eta);
    case Algo::comid: return std::make_unique<ComidServer>(dim, sim_regularizer(cfg), cfg.eta);
    case Algo::comid_closed: return std::make_unique<ComidClosedServer>(dim, cfg.lambda, cfg.eta);
    case Algo::l2trick: return std::make_unique<L2TrickServer>(dim, cfg.lambda, cfg.eta);
    case Algo::ftrl:
    case Algo::aftrl:
      return std::make_unique<FtrlServer>(
          dim, FtrlParams{cfg.alpha, cfg.beta, cfg.lambda1, cfg.lambda2}, cfg.init_w1_ones);
  }
  throw std::logic_error("unknown algorithm");
}

Push compute_push(const LabeledSample& sample, std::span<const double> pulled,
                  std::uint64_t version) {
  // Same summation order as sparse_dot so pulled and dense margins agree bitwise.
  const auto val = sample.x.values();
  double margin = 0.0;
  for (std::size_t k = 0; k < val.size(); ++k) margin += val[k] * pulled[k];
  Push p;
  p.msg = make_msg(logloss_grad_from_margin(sample, margin), version);
  return p;
}

// ---------------------------------------------------------------------------
// Shared bookkeeping for both runners

RunBook::RunBook(const SimConfig& cfg, const Dataset& data, const RunOptions& opts)
    : cfg_(cfg), data_(data), opts_(opts), tx_(tx_baseline(cfg.algo), data.dim) {
  if (data.empty()) throw std::invalid_argument("dataset is empty");
  cfg.validate();
  T_ = static_cast<std::uint64_t>(cfg.epochs) * data.size();
  eval_every_ = cfg.eval_every > 0 ? cfg.eval_every : data.size();
  logging_ = opts.log_iterates || opts.regret_w_star.has_value();
  if (logging_ && data.dim > kMaxLoggedDim) {
    throw std::invalid_argument("iterate logging is limited to dim <= " +
                                std::to_string(kMaxLoggedDim));
  }
  if (opts.regret_w_star && opts.regret_w_star->size() != data.dim) {
    throw std::invalid_argument("w* dimension mismatch");
  }
  order_ = sample_order(data.size(), cfg.epochs, cfg.seed);
  result_.tau_cap = cfg.effective_tau_max();
  result_.taus.reserve(T_);
  result_.samples.reserve(T_);
  result_.worker_of_step.reserve(T_);
  start_ = std::chrono::steady_clock::now();
}

void RunBook::begin(const ServerModel& server) {
  if (logging_) result_.iterates.push_back(server.weights());
}

void RunBook::after_apply(const ServerModel& server, const Push& p) {
  const std::uint64_t t = result_.applied;
  result_.taus.push_back(p.msg.produced_at);
  result_.samples.push_back(p.sample);
  result_.worker_of_step.push_back(p.worker);
  result_.max_staleness = std::max(result_.max_staleness, t - p.msg.produced_at);
  ++result_.applied;
  tx_.add(p.msg);
  if (logging_) {
    result_.iterates.push_back(server.weights());
    result_.applied_grads.push_back(p.msg.g);
  }
  if (result_.applied % eval_every_ == 0 || result_.applied == T_) {
    RunRecord rec;
    rec.step = result_.applied;
    const DenseVec w = server.weights();
    rec.logloss_sum = logloss_dataset(data_, w);
    rec.logloss_mean = rec.logloss_sum / static_cast<double>(data_.size());
    rec.tx_values = tx_.total();
    if (opts_.wall_clock) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    }
    result_.records.push_back(rec);
  }
}

RunResult RunBook::finish(const ServerModel& server) {
  result_.final_w = server.weights();
  result_.tx_values = tx_.total();
  if (opts_.regret_w_star) {
    RegretAccumulator acc(*opts_.regret_w_star, sim_regularizer(cfg_));
    result_.regret_terms.reserve(T_);
    for (std::uint64_t t = 0; t < result_.applied; ++t) {
      result_.regret_terms.push_back(
          acc.update(result_.iterates[t], data_.samples[result_.samples[t]]));
    }
    double running = 0.0;
    std::uint64_t next = 0;
    for (auto& rec : result_.records) {
      for (; next < rec.step; ++next) running += result_.regret_terms[next];
      rec.regret = running;
    }
  }
  return std::move(result_);
}

}  // namespace detail

// ---------------------------------------------------------------------------

RunResult run_simulated(const SimConfig& cfg, const Dataset& data, const RunOptions& opts) {
  detail::RunBook book(cfg, data, opts);
  const std::uint64_t T = book.total_steps();
  const std::uint64_t cap = cfg.effective_tau_max();
  const auto taus = (cap == 0 ? DelaySchedule::fixed(0) : cfg.delay).taus(T);
  auto server = detail::make_server(cfg, data.dim);
  const auto& order = book.order();

  // Pushes computed at version s for steps t in [s, s + cap], keyed by t mod (cap + 1).
  std::vector<std::optional<detail::Push>> pending(cap + 1);
  std::vector<double> pulled;
  book.begin(*server);
  for (std::uint64_t s = 0; s < T; ++s) {
    for (std::uint64_t t = s; t < std::min(T, s + cap + 1); ++t) {
      if (taus[t] != s) continue;
      const auto& sample = data.samples[order[t]];
      server->pull(sample.x.indices(), pulled);
      detail::Push p = detail::compute_push(sample, pulled, s);
      p.ticket = t;
      p.sample = order[t];
      p.worker = static_cast<std::size_t>(t % cfg.workers);
      if (server->dense_push()) p.stale_w = server->weights();
      pending[t % (cap + 1)] = std::move(p);
    }
    auto& slot = pending[s % (cap + 1)];
    if (!slot || slot->ticket != s) throw std::logic_error("run_simulated: missing push");
    server->apply(*slot);
    book.after_apply(*server, *slot);
    slot.reset();
  }
  RunResult res = book.finish(*server);
  res.pushes = res.applied;
  return res;
}

BoundConstants measure_bound_constants(const RunResult& run, const SimConfig& cfg,
                                       std::span<const double> w_star) {
  if (run.iterates.size() != run.applied + 1 || run.applied_grads.size() != run.applied) {
    throw std::invalid_argument("measure_bound_constants: run was not made with log_iterates");
  }
  const Regularizer reg = sim_regularizer(cfg);
  BoundConstants c;
  c.tau_max = run.tau_cap;
  c.eta = cfg.eta;
  c.alpha = MirrorMap::quadratic().alpha();
  c.b_init = MirrorMap::quadratic().bregman(w_star, run.iterates.front());
  for (std::uint64_t i = 0; i < std::min<std::uint64_t>(c.tau_max, run.iterates.size()); ++i) {
    c.r_head += reg.value(run.iterates[i]);
  }
  for (std::uint64_t t = 0; t < run.applied; ++t) {
    const SparseVec& g = run.applied_grads[t];
    c.observe_loss_grad(l2_norm(g));
    for (const DenseVec* at : {&run.iterates[run.taus[t]], &run.iterates[t + 1]}) {
      DenseVec full = reg.subgrad(*at);
      axpy_sparse(full, 1.0, g);
      c.observe_full_grad(l2_norm(full));
    }
  }
  return c;
}

}  // namespace acomid
