#include "acomid/metrics.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace acomid {

double logloss_dataset(const Dataset& data, std::span<const double> w) {
  double sum = 0.0;
  for (const auto& s : data.samples) sum += logloss_sample(s, w);
  return sum;
}

RegretAccumulator::RegretAccumulator(DenseVec w_star, Regularizer reg)
    : w_star_(std::move(w_star)), reg_(reg), r_star_(reg_.value(w_star_)) {}

double RegretAccumulator::update(std::span<const double> w_t, const LabeledSample& sample) {
  const double term = (logloss_sample(sample, w_t) - logloss_sample(sample, w_star_)) +
                      (reg_.value(w_t) - r_star_);
  total_ += term;
  ++count_;
  return term;
}

namespace {

struct Objective {
  const Dataset& data;
  const Regularizer& reg;

  double value(std::span<const double> w) const {
    return logloss_dataset(data, w) / static_cast<double>(data.size()) + reg.value(w);
  }

  DenseVec gradient(std::span<const double> w) const {
    DenseVec g(w.size(), 0.0);
    const double inv_m = 1.0 / static_cast<double>(data.size());
    for (const auto& s : data.samples) {
      const double coef = (sigmoid(sparse_dot(s.x, w)) - s.y01()) * inv_m;
      axpy_sparse(g, coef, s.x);
    }
    for (std::size_t i = 0; i < w.size(); ++i) g[i] += reg.lambda2() * w[i];
    return g;
  }
};

}  // namespace

WStarResult solve_w_star(const Dataset& data, const Regularizer& reg,
                         const WStarOptions& opts) {
  if (reg.kind() == Regularizer::Kind::l1 || reg.kind() == Regularizer::Kind::elastic_net) {
    throw std::invalid_argument("solve_w_star: only L2 or no regularization is supported");
  }
  if (data.empty()) throw std::invalid_argument("solve_w_star: empty dataset");
  if (reg.lambda2() == 0.0) {
    std::cerr << "solve_w_star: warning: objective is not strongly convex (lambda = 0); "
                 "the minimizer may not exist\n";
  }
  const Objective f{data, reg};
  WStarResult res;
  res.w.assign(data.dim, 0.0);
  double fw = f.value(res.w);
  DenseVec g = f.gradient(res.w);
  double step = 1.0;
  DenseVec trial(data.dim);
  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    res.grad_norm = l2_norm(g);
    if (res.grad_norm < opts.tol) {
      res.converged = true;
      break;
    }
    const double gg = res.grad_norm * res.grad_norm;
    // Armijo backtracking; the accepted step seeds the next search, doubled.
    double ft = 0.0;
    for (;;) {
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = res.w[i] - step * g[i];
      ft = f.value(trial);
      if (ft <= fw - 0.5 * step * gg || step < 1e-16) break;
      step *= 0.5;
    }
    res.w.swap(trial);
    fw = ft;
    g = f.gradient(res.w);
    step *= 2.0;
  }
  if (!res.converged) {
    res.grad_norm = l2_norm(g);
    res.converged = res.grad_norm < opts.tol;
  }
  return res;
}

std::uint64_t content_hash(const Dataset& data, const Regularizer& reg, double tol) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  auto mixd = [&mix](double v) { mix(std::bit_cast<std::uint64_t>(v)); };
  mix(data.dim);
  mix(data.size());
  for (const auto& s : data.samples) {
    mix(static_cast<std::uint64_t>(s.y + 2));
    mix(s.x.nnz());
    for (auto i : s.x.indices()) mix(i);
    for (double v : s.x.values()) mixd(v);
  }
  mix(static_cast<std::uint64_t>(reg.kind()));
  mixd(reg.lambda1());
  mixd(reg.lambda2());
  mixd(tol);
  return h;
}

WStarResult solve_w_star_cached(const Dataset& data, const Regularizer& reg,
                                const WStarOptions& opts,
                                const std::filesystem::path& cache_dir) {
  char name[64];
  std::snprintf(name, sizeof(name), "wstar-%016llx.txt",
                static_cast<unsigned long long>(content_hash(data, reg, opts.tol)));
  const auto file = cache_dir / name;
  if (std::ifstream in(file); in) {
    WStarResult res;
    std::string tag, gnorm;
    in >> tag >> gnorm >> res.iterations >> res.converged;
    res.grad_norm = std::strtod(gnorm.c_str(), nullptr);
    std::size_t dim = 0;
    in >> dim;
    res.w.resize(dim);
    for (auto& v : res.w) {
      std::string tok;
      in >> tok;
      v = std::strtod(tok.c_str(), nullptr);
    }
    if (in && tag == "wstar" && dim == data.dim) return res;
  }
  WStarResult res = solve_w_star(data, reg, opts);
  std::filesystem::create_directories(cache_dir);
  std::ofstream out(file);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", res.grad_norm);
  out << "wstar " << buf << ' ' << res.iterations << ' ' << res.converged << '\n'
      << res.w.size() << '\n';
  for (double v : res.w) {
    std::snprintf(buf, sizeof(buf), "%a", v);
    out << buf << '\n';
  }
  return res;
}

RegretBound theorem2_rhs(const BoundConstants& c, std::uint64_t T) {
  RegretBound out;
  const double head = (c.eta > 0.0 ? c.b_init / c.eta
                                   : (c.b_init > 0.0 ? std::numeric_limits<double>::infinity()
                                                     : 0.0)) +
                      c.r_head;
  const double scale = static_cast<double>(c.tau_max) * c.eta * c.alpha * static_cast<double>(T);
  out.m_out_variant = head + scale * (2.0 * c.m_out * c.m_out + c.m_in * c.m_out);
  out.m_in_variant = head + scale * (2.0 * c.m_in * c.m_in + c.m_in * c.m_out);
  return out;
}

}  // namespace acomid
