#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "acomid/ps_sim.hpp"
#include "run_common.hpp"
#include "server_model.hpp"

namespace acomid {

namespace {

// FIFO from workers to the server.
class Channel {
 public:
  void push(detail::Push p) {
    {
      std::lock_guard lock(mu_);
      queue_.push_back(std::move(p));
    }
    cv_.notify_one();
  }
  detail::Push pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty(); });
    detail::Push p = std::move(queue_.front());
    queue_.pop_front();
    return p;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<detail::Push> queue_;
};

}  // namespace

RunResult run_threaded(const SimConfig& cfg, const Dataset& data, const RunOptions& opts) {
  detail::RunBook book(cfg, data, opts);
  const std::uint64_t T = book.total_steps();
  const std::uint64_t cap = cfg.effective_tau_max();
  auto server = detail::make_server(cfg, data.dim);
  const auto& order = book.order();

  // Guarded by model_mu: server model, applied count, next ticket.
  std::mutex model_mu;
  std::condition_variable pull_cv;
  std::uint64_t applied = 0;
  std::uint64_t next_ticket = 0;
  bool abort = false;
  Channel channel;
  std::exception_ptr worker_error;

  auto worker_loop = [&](std::size_t id) {
    std::vector<double> pulled;
    try {
      for (;;) {
        std::unique_lock lock(model_mu);
        // A ticket k pulled at version `applied` is applied at step k, so its
        // staleness is k - applied. Throttle until that is within the cap.
        pull_cv.wait(lock, [&] { return abort || next_ticket >= T || next_ticket - applied <= cap; });
        if (abort || next_ticket >= T) return;
        const std::uint64_t ticket = next_ticket++;
        const std::uint64_t version = applied;
        const auto& sample = data.samples[order[ticket]];
        server->pull(sample.x.indices(), pulled);
        DenseVec stale;
        if (server->dense_push()) stale = server->weights();
        lock.unlock();

        detail::Push p = detail::compute_push(sample, pulled, version);
        p.ticket = ticket;
        p.sample = order[ticket];
        p.worker = id;
        p.stale_w = std::move(stale);
        channel.push(std::move(p));
      }
    } catch (...) {
      std::lock_guard lock(model_mu);
      if (!worker_error) worker_error = std::current_exception();
      abort = true;
      pull_cv.notify_all();
      // Wake the server with a sentinel so it can observe the failure.
      detail::Push sentinel;
      sentinel.ticket = ~std::uint64_t{0};
      channel.push(std::move(sentinel));
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(cfg.workers);
  {
    std::lock_guard lock(model_mu);
    book.begin(*server);
  }
  for (std::size_t k = 0; k < cfg.workers; ++k) threads.emplace_back(worker_loop, k);

  // Out-of-order arrivals wait here until their ticket comes up.
  std::map<std::uint64_t, detail::Push> deferred;
  std::exception_ptr server_error;
  std::uint64_t received = 0;
  try {
    while (applied < T) {
      detail::Push p = channel.pop();
      {
        std::lock_guard lock(model_mu);
        if (abort) break;
      }
      ++received;
      deferred.emplace(p.ticket, std::move(p));
      for (auto it = deferred.find(applied); it != deferred.end(); it = deferred.find(applied)) {
        {
          std::lock_guard lock(model_mu);
          server->apply(it->second);
          book.after_apply(*server, it->second);
          ++applied;
        }
        pull_cv.notify_all();
        deferred.erase(it);
      }
    }
  } catch (...) {
    server_error = std::current_exception();
    std::lock_guard lock(model_mu);
    abort = true;
  }
  pull_cv.notify_all();
  for (auto& th : threads) th.join();
  if (server_error) std::rethrow_exception(server_error);
  if (worker_error) std::rethrow_exception(worker_error);

  RunResult res = book.finish(*server);
  res.pushes = received;
  return res;
}

}  // namespace acomid
