#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "acomid/experiment.hpp"
#include "acomid/metrics.hpp"
#include "acomid/optimizers.hpp"

namespace acomid {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

Dataset small_planted(std::size_t dim, std::size_t n, std::size_t lo, std::size_t hi,
                      std::uint64_t seed) {
  SyntheticProfile p;
  p.dim = dim;
  p.n_samples = n;
  p.nnz_lo = lo;
  p.nnz_hi = hi;
  p.seed = seed;
  p.planted_w = make_planted_w(dim, seed + 1);
  p.noise_sd = 0.5;
  return gen_synthetic(p);
}

// Runs both FTRL/COMID forms side by side on delayed logistic gradients, each
// from its own iterate history, and returns max_t |w_t - w^_t|_inf.
double theorem4_gap(std::size_t dim, std::uint64_t T, const DelaySchedule& delay,
                    const Regularizer& reg, std::uint64_t seed, double perturbation) {
  const Dataset data = small_planted(dim, 200, 1, std::min<std::size_t>(dim, 8), seed);
  const auto taus = delay.taus(T);
  std::mt19937_64 rng(seed ^ 0x51ed2701ull);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<std::size_t> samples(T);
  for (auto& s : samples) s = pick(rng);

  const double alpha = 0.5, beta = 1.0;
  FtrlArgminSequence ftrl(dim, reg);
  ComidProxSequence comid(dim, reg);
  std::vector<DenseVec> hist_f{ftrl.current()}, hist_c{comid.current()};
  DenseVec n_f(dim, 0.0), n_c(dim, 0.0), sigma(dim);
  auto adagrad_sigma = [&](DenseVec& n, const SparseVec& g, std::uint64_t t) {
    std::fill(sigma.begin(), sigma.end(), t == 0 ? beta / alpha : 0.0);
    const auto idx = g.indices();
    const auto val = g.values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double n_new = n[idx[k]] + val[k] * val[k];
      sigma[idx[k]] += (std::sqrt(n_new) - std::sqrt(n[idx[k]])) / alpha;
      n[idx[k]] = n_new;
    }
  };
  double worst = 0.0;
  for (std::uint64_t t = 0; t < T; ++t) {
    const auto& s = data.samples[samples[t]];
    const SparseVec gf = logloss_grad(s, hist_f[taus[t]]);
    adagrad_sigma(n_f, gf, t);
    hist_f.push_back(ftrl.step(gf, sigma));
    if (t == 0 && perturbation != 0.0) ftrl.perturb_accumulator(0, perturbation);

    const SparseVec gc = logloss_grad(s, hist_c[taus[t]]);
    adagrad_sigma(n_c, gc, t);
    hist_c.push_back(comid.step(gc, sigma));
    worst = std::max(worst, linf_distance(hist_f.back(), hist_c.back()));
  }
  return worst;
}

CheckResult check_theorem4(const VerifyOptions& opts) {
  struct Case {
    std::size_t dim;
    std::uint64_t tau;
    bool random;
    Regularizer reg;
  };
  const Case cases[] = {
      {4, 0, false, Regularizer::l2(0.01)},
      {8, 3, true, Regularizer::l1(0.01)},
      {16, 5, false, Regularizer::l2(0.001)},
      {16, 8, true, Regularizer::elastic_net(0.005, 0.01)},
  };
  double worst = 0.0;
  std::uint64_t k = 0;
  for (const auto& c : cases) {
    const auto sched = c.random ? DelaySchedule::random_bounded(c.tau, opts.seed + k)
                                : DelaySchedule::fixed(c.tau);
    worst = std::max(worst, theorem4_gap(c.dim, 500, sched, c.reg, opts.seed + 10 * k,
                                         opts.ftrl_perturbation));
    ++k;
  }
  return {"theorem4_equivalence", worst < 1e-8, fmt("max_linf=%.3e", worst)};
}

CheckResult check_l2_gap(const VerifyOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t d = 1 + rng() % 32;
    ModelState st;
    st.w.resize(d);
    for (auto& v : st.w) v = 3.0 * normal(rng);
    std::vector<std::pair<std::size_t, double>> e;
    for (std::size_t i = 0; i < d; ++i) {
      if (unit(rng) < 0.3) e.emplace_back(i, normal(rng));
    }
    const auto msg = make_msg(SparseVec(d, std::move(e)), 0);
    const double eta = 0.5 * unit(rng), lambda = unit(rng);
    const auto closed = comid_l2_closed_step(st, msg, lambda, eta);
    const auto trick = l2_trick_step(st, msg, lambda, eta);
    DenseVec diff(d);
    for (std::size_t i = 0; i < d; ++i) diff[i] = closed.w[i] - trick.w[i];
    const double el = eta * lambda;
    const double predicted = el * el / (1.0 + el) * l2_norm(st.w);
    worst = std::max(worst, std::abs(l2_norm(diff) - predicted) / std::max(1.0, predicted));
  }
  return {"l2_trick_gap_identity", worst < 1e-12, fmt("max_err=%.3e", worst)};
}

CheckResult check_gradient(const VerifyOptions& opts) {
  std::mt19937_64 rng(opts.seed + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 1 + rng() % 64;
    const Dataset one = small_planted(d, 1, 1, d, rng());
    const auto& s = one.samples[0];
    DenseVec w(d);
    for (auto& v : w) v = normal(rng) / std::sqrt(static_cast<double>(d));
    const DenseVec g = logloss_grad(s, w).densify();
    for (std::size_t i = 0; i < d; ++i) {
      const double h = 1e-6, keep = w[i];
      w[i] = keep + h;
      const double up = logloss_sample(s, w);
      w[i] = keep - h;
      const double down = logloss_sample(s, w);
      w[i] = keep;
      const double fd = (up - down) / (2 * h);
      const double denom = std::max({std::abs(g[i]), std::abs(fd), 1e-7});
      worst = std::max(worst, std::abs(g[i] - fd) / denom);
    }
  }
  return {"gradient_finite_difference", worst < 1e-5, fmt("max_rel_err=%.3e", worst)};
}

CheckResult check_optimality(const VerifyOptions& opts) {
  const Dataset data = small_planted(16, 300, 2, 8, opts.seed + 2);
  const double eta = 0.05, lambda = 0.1;
  const auto reg = Regularizer::l2(lambda);
  const auto psi = MirrorMap::quadratic();
  const auto taus = DelaySchedule::fixed(4).taus(2000);
  std::vector<DenseVec> hist{DenseVec(16, 0.0)};
  ModelState st{hist[0], 0};
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 2000; ++t) {
    const auto msg = make_msg(logloss_grad(data.samples[t % data.size()], hist[taus[t]]), taus[t]);
    const DenseVec prev = st.w;
    st = comid_step_generic(std::move(st), msg, reg, psi, eta);
    const DenseVec g = msg.g.densify();
    for (std::size_t i = 0; i < 16; ++i) {
      worst = std::max(worst, std::abs(eta * g[i] + eta * lambda * st.w[i] + st.w[i] - prev[i]));
    }
    hist.push_back(st.w);
  }
  return {"comid_optimality_residual", worst < 1e-10, fmt("max_residual=%.3e", worst)};
}

CheckResult check_degeneration(const VerifyOptions& opts) {
  const Dataset data = small_planted(500, 400, 5, 20, opts.seed + 3);
  bool ok = true;
  std::string detail;
  for (Algo algo : {Algo::aftrl, Algo::l2trick}) {
    SimConfig cfg;
    cfg.algo = algo;
    cfg.workers = 1;
    cfg.delay = DelaySchedule::fixed(5);  // ignored with one worker
    cfg.eta = 0.05;
    cfg.lambda = 0.01;
    cfg.alpha = 0.1;
    cfg.beta = 1.0;
    cfg.lambda1 = 0.01;
    cfg.lambda2 = 0.001;
    cfg.epochs = 2;
    cfg.seed = opts.seed;
    const auto sim = run_simulated(cfg, data);
    const auto order = sample_order(data.size(), cfg.epochs, cfg.seed);
    DenseVec seq;
    if (algo == Algo::aftrl) {
      FtrlState st(data.dim, {cfg.alpha, cfg.beta, cfg.lambda1, cfg.lambda2});
      for (auto idx : order) {
        const auto& s = data.samples[idx];
        double margin = 0.0;
        const auto xi = s.x.indices();
        const auto xv = s.x.values();
        for (std::size_t k = 0; k < xi.size(); ++k) margin += xv[k] * st.materialize(xi[k]);
        st = ftrl_coordinate_update(std::move(st),
                                    make_msg(logloss_grad_from_margin(s, margin), st.t));
      }
      seq = st.materialize_all();
    } else {
      ModelState st{DenseVec(data.dim, 0.0), 0};
      for (auto idx : order) {
        st = l2_trick_step(std::move(st), make_msg(logloss_grad(data.samples[idx], st.w), st.t),
                           cfg.lambda, cfg.eta);
      }
      seq = st.w;
    }
    const bool same = seq == sim.final_w;
    ok = ok && same;
    detail += std::string(algo_name(algo)) + (same ? ":bit-identical " : ":DIFFERS ");
  }
  return {"delay_degeneration", ok, detail};
}

CheckResult check_tau_bounds(const VerifyOptions& opts) {
  bool ok = true;
  for (std::uint64_t tau_max : {0u, 1u, 3u, 8u}) {
    for (const auto& sched :
         {DelaySchedule::fixed(tau_max), DelaySchedule::random_bounded(tau_max, opts.seed)}) {
      const auto taus = sched.taus(1000);
      for (std::uint64_t t = 0; t < taus.size(); ++t) {
        ok = ok && taus[t] <= t && t - taus[t] <= tau_max;
      }
    }
  }
  return {"delay_bounds", ok, ""};
}

CheckResult check_ftrl_lazy(const VerifyOptions& opts) {
  std::mt19937_64 rng(opts.seed + 4);
  std::normal_distribution<double> normal(0.0, 1.0);
  bool ok = true;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t d = 40;
    FtrlState st(d, {0.1, 1.0, 0.01, 0.001});
    for (std::size_t i = 0; i < d; ++i) {
      st.z[i] = normal(rng);
      st.n[i] = std::abs(normal(rng));
      st.w[i] = normal(rng);
    }
    std::vector<std::pair<std::size_t, double>> e;
    for (std::size_t i = 0; i < d; i += 1 + rng() % 5) e.emplace_back(i, normal(rng));
    const SparseVec g(d, std::move(e));
    const FtrlState next = ftrl_coordinate_update(st, make_msg(g, 0));
    std::size_t k = 0;
    const auto idx = g.indices();
    for (std::size_t i = 0; i < d; ++i) {
      if (k < idx.size() && idx[k] == i) {
        ++k;
        continue;
      }
      ok = ok && next.z[i] == st.z[i] && next.n[i] == st.n[i] && next.w[i] == st.w[i];
    }
  }
  return {"ftrl_laziness", ok, ""};
}

CheckResult check_replay(const VerifyOptions& opts) {
  const Dataset data = small_planted(300, 400, 5, 20, opts.seed + 5);
  SimConfig cfg;
  cfg.algo = Algo::l2trick;
  cfg.workers = 4;
  cfg.delay = DelaySchedule::fixed(3);
  cfg.eta = 0.05;
  cfg.lambda = 0.01;
  cfg.epochs = 2;
  cfg.seed = opts.seed;
  const auto threaded = run_threaded(cfg, data);
  SimConfig replay = cfg;
  replay.delay = DelaySchedule::trace(threaded.taus, threaded.tau_cap);
  const auto sim = run_simulated(replay, data);
  const double dist = linf_distance(threaded.final_w, sim.final_w);
  const bool ok = dist < 1e-12 && threaded.max_staleness <= threaded.tau_cap &&
                  threaded.pushes == threaded.applied;
  return {"replay_fidelity", ok,
          fmt("linf=%.3e", dist) + " max_staleness=" + std::to_string(threaded.max_staleness)};
}

CheckResult check_regret_bound(const VerifyOptions& opts) {
  const Dataset data = small_planted(8, 300, 2, 6, opts.seed + 6);
  SimConfig cfg;
  cfg.algo = Algo::comid;
  cfg.workers = 5;
  cfg.delay = DelaySchedule::fixed(4);
  cfg.eta = 0.01;
  cfg.lambda = 0.01;
  cfg.epochs = 3;
  cfg.seed = opts.seed;
  cfg.eval_every = 1;
  const auto wstar = solve_w_star(data, sim_regularizer(cfg)).w;
  RunOptions ro;
  ro.regret_w_star = wstar;
  const auto run = run_simulated(cfg, data, ro);
  const auto consts = measure_bound_constants(run, cfg, wstar);
  bool ok = true;
  double tightest = 0.0;
  for (const auto& rec : run.records) {
    const double rhs = theorem2_rhs(consts, rec.step).m_out_variant;
    ok = ok && *rec.regret <= rhs;
    tightest = std::max(tightest, *rec.regret / rhs);
  }
  return {"regret_bound", ok, fmt("max_regret_over_bound=%.3e", tightest)};
}

}  // namespace

std::vector<CheckResult> run_verify_suite(const VerifyOptions& opts) {
  return {check_theorem4(opts), check_l2_gap(opts),    check_gradient(opts),
          check_optimality(opts), check_degeneration(opts), check_tau_bounds(opts),
          check_ftrl_lazy(opts),  check_replay(opts),  check_regret_bound(opts)};
}

}  // namespace acomid
