#pragma once

// Test-only reference computations. Nothing here calls into the optimizer
// code paths it is used to check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "acomid/data_io.hpp"
#include "acomid/sparse.hpp"

namespace oracle {

inline constexpr double kArgminTol = 1e-7;

inline double dense_dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Minimizes a 1-D convex function: grid scan over [lo, hi], then golden
/// section on the bracket around the best grid point. Comparing function
/// values limits the minimizer to about sqrt(eps) relative accuracy, so
/// callers compare against it at kArgminTol.
inline double argmin_1d(const std::function<double(double)>& f, double lo, double hi,
                        int grid = 2001) {
  double best_x = lo, best_f = f(lo);
  const double h = (hi - lo) / (grid - 1);
  for (int k = 1; k < grid; ++k) {
    const double x = lo + h * k;
    const double fx = f(x);
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  double a = best_x - h, b = best_x + h;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-13) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Central finite difference of f along coordinate i.
inline double central_diff(const std::function<double(std::span<const double>)>& f,
                           std::vector<double> w, std::size_t i, double h = 1e-6) {
  const double keep = w[i];
  w[i] = keep + h;
  const double up = f(w);
  w[i] = keep - h;
  const double down = f(w);
  return (up - down) / (2.0 * h);
}

inline double log1p_exp(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }

/// Random sparse vector with each coordinate present with probability p.
inline acomid::SparseVec random_sparse(std::mt19937_64& rng, std::size_t dim, double p,
                                       double scale = 1.0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<std::pair<std::size_t, double>> e;
  for (std::size_t i = 0; i < dim; ++i) {
    if (unit(rng) < p) e.emplace_back(i, normal(rng));
  }
  return acomid::SparseVec(dim, std::move(e));
}

inline std::vector<double> random_dense(std::mt19937_64& rng, std::size_t dim,
                                        double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> w(dim);
  for (auto& v : w) v = normal(rng);
  return w;
}

inline acomid::Dataset planted(std::size_t dim, std::size_t n, std::size_t lo, std::size_t hi,
                               std::uint64_t seed, double noise = 0.5) {
  acomid::SyntheticProfile p;
  p.dim = dim;
  p.n_samples = n;
  p.nnz_lo = lo;
  p.nnz_hi = hi;
  p.seed = seed;
  p.planted_w = acomid::make_planted_w(dim, seed + 1);
  p.noise_sd = noise;
  return acomid::gen_synthetic(p);
}

}  // namespace oracle
