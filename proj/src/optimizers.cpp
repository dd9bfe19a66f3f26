#include "acomid/optimizers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace acomid {

namespace {

void check_dim(std::size_t model, std::size_t other, const char* what) {
  if (model != other) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(model) + " vs " + std::to_string(other) +
                                ")");
  }
}

void check_stabilizer(std::span<const double> sum, std::span<const double> sigma,
                      const char* who) {
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    if (!(sigma[j] >= 0.0)) {
      throw std::invalid_argument(std::string(who) + ": sigma must be nonnegative");
    }
    if (!(sum[j] + sigma[j] > 0.0)) {
      throw std::domain_error(std::string(who) + ": zero total stabilizer on coordinate " +
                              std::to_string(j));
    }
  }
}

double soft_threshold(double v, double thr) {
  if (v > thr) return v - thr;
  if (v < -thr) return v + thr;
  return 0.0;
}

// Visits every coordinate of w, passing g_i (0 outside the support).
template <typename F>
void for_each_coordinate(std::size_t dim, const SparseVec& g, F&& f) {
  const auto idx = g.indices();
  const auto val = g.values();
  std::size_t k = 0;
  for (std::size_t i = 0; i < dim; ++i) {
    double gi = 0.0;
    if (k < idx.size() && idx[k] == i) gi = val[k++];
    f(i, gi);
  }
}

}  // namespace

ModelState dsgd_step(ModelState state, const GradientMsg& msg, double lambda,
                     std::span<const double> stale_w, double eta) {
  check_dim(state.w.size(), msg.g.dim(), "dsgd_step");
  check_dim(state.w.size(), stale_w.size(), "dsgd_step");
  auto& w = state.w;
  for_each_coordinate(w.size(), msg.g, [&](std::size_t i, double gi) {
    w[i] = w[i] - eta * (gi + lambda * stale_w[i]);
  });
  ++state.t;
  return state;
}

ModelState comid_step_generic(ModelState state, const GradientMsg& msg,
                              const Regularizer& reg, const MirrorMap& psi, double eta) {
  check_dim(state.w.size(), msg.g.dim(), "comid_step_generic");
  auto& w = state.w;
  const double m = psi.modulus();
  const double step = eta / m;
  const double thr = eta * reg.lambda1() / m;
  const double shrink = 1.0 + eta * reg.lambda2() / m;
  switch (reg.kind()) {
    case Regularizer::Kind::none:
      axpy_sparse(w, -step, msg.g);
      break;
    case Regularizer::Kind::l2:
      for_each_coordinate(w.size(), msg.g, [&](std::size_t i, double gi) {
        w[i] = (w[i] - step * gi) / shrink;
      });
      break;
    case Regularizer::Kind::l1:
      for_each_coordinate(w.size(), msg.g, [&](std::size_t i, double gi) {
        w[i] = soft_threshold(w[i] - step * gi, thr);
      });
      break;
    case Regularizer::Kind::elastic_net:
      for_each_coordinate(w.size(), msg.g, [&](std::size_t i, double gi) {
        w[i] = soft_threshold(w[i] - step * gi, thr) / shrink;
      });
      break;
  }
  ++state.t;
  return state;
}

ModelState comid_l2_closed_step(ModelState state, const GradientMsg& msg, double lambda,
                                double eta) {
  check_dim(state.w.size(), msg.g.dim(), "comid_l2_closed_step");
  if (!(lambda * eta >= 0.0)) {
    throw std::invalid_argument("comid_l2_closed_step: lambda * eta must be >= 0");
  }
  auto& w = state.w;
  const double shrink = 1.0 + lambda * eta;
  for_each_coordinate(w.size(), msg.g, [&](std::size_t i, double gi) {
    w[i] = w[i] / shrink - eta * gi;
  });
  ++state.t;
  return state;
}

ModelState l2_trick_step(ModelState state, const GradientMsg& msg, double lambda,
                         double eta) {
  check_dim(state.w.size(), msg.g.dim(), "l2_trick_step");
  if (!(lambda * eta >= 0.0) || !(lambda * eta < 1.0)) {
    throw std::invalid_argument("l2_trick_step: requires 0 <= lambda * eta < 1");
  }
  auto& w = state.w;
  for_each_coordinate(w.size(), msg.g, [&](std::size_t i, double gi) {
    w[i] = w[i] - eta * (gi + lambda * w[i]);
  });
  ++state.t;
  return state;
}

void FtrlParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("ftrl: alpha must be > 0");
  if (!(beta >= 0.0)) throw std::invalid_argument("ftrl: beta must be >= 0");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw std::invalid_argument("ftrl: lambda1 and lambda2 must be >= 0");
  }
}

FtrlState::FtrlState(std::size_t dim, FtrlParams p)
    : z(dim, 0.0), n(dim, 0.0), w(dim, 0.0), params(p) {
  params.validate();
}

double ftrl_weight(double z, double n, const FtrlParams& p) {
  if (std::abs(z) <= p.lambda1) return 0.0;
  return -(z - sgn(z) * p.lambda1) / ((p.beta + std::sqrt(n)) / p.alpha + p.lambda2);
}

double FtrlState::materialize(std::size_t i) const { return ftrl_weight(z[i], n[i], params); }

DenseVec FtrlState::materialize_all() const {
  DenseVec out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = materialize(i);
  return out;
}

void ftrl_init_weights(FtrlState& state, std::span<const double> w1) {
  check_dim(state.z.size(), w1.size(), "ftrl_init_weights");
  const auto& p = state.params;
  for (std::size_t i = 0; i < w1.size(); ++i) {
    const double k = (p.beta + std::sqrt(state.n[i])) / p.alpha + p.lambda2;
    state.z[i] = -w1[i] * k - sgn(w1[i]) * p.lambda1;
    state.w[i] = state.materialize(i);
  }
}

FtrlState ftrl_coordinate_update(FtrlState state, const GradientMsg& msg) {
  state.params.validate();
  check_dim(state.z.size(), msg.g.dim(), "ftrl_coordinate_update");
  const auto idx = msg.g.indices();
  const auto val = msg.g.values();
  const double alpha = state.params.alpha;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t i = idx[k];
    const double g = val[k];
    const double wi = state.materialize(i);
    state.w[i] = wi;
    const double n_old = state.n[i];
    const double n_new = n_old + g * g;
    const double sigma = (std::sqrt(n_new) - std::sqrt(n_old)) / alpha;
    state.z[i] += g - sigma * wi;
    state.n[i] = n_new;
  }
  ++state.t;
  return state;
}

FtrlArgminSequence::FtrlArgminSequence(std::size_t dim, Regularizer reg)
    : reg_(reg), lin_(dim, 0.0), sigma_sum_(dim, 0.0), centered_(dim, 0.0), w_(dim, 0.0) {}

const DenseVec& FtrlArgminSequence::step(const SparseVec& g, std::span<const double> sigma) {
  const std::size_t d = w_.size();
  check_dim(d, g.dim(), "FtrlArgminSequence::step");
  check_dim(d, sigma.size(), "FtrlArgminSequence::step");
  check_stabilizer(sigma_sum_, sigma, "FtrlArgminSequence");
  for (std::size_t j = 0; j < d; ++j) {
    sigma_sum_[j] += sigma[j];
    centered_[j] += sigma[j] * w_[j];
  }
  axpy_sparse(lin_, 1.0, g);
  const double l1 = reg_.lambda1();
  const double l2 = reg_.lambda2();
  for (std::size_t j = 0; j < d; ++j) {
    const double s = sigma_sum_[j];
    const double u = lin_[j] - centered_[j];
    const double wj = -soft_threshold(u, l1) / (s + l2);
    // The subgradient of r at the new point that the optimality condition
    // selects; it enters the linear term of every later step.
    const double rho = wj != 0.0 ? reg_.subgrad(wj) : -u;
    lin_[j] += rho;
    w_[j] = wj;
  }
  ++t_;
  return w_;
}

ComidProxSequence::ComidProxSequence(std::size_t dim, Regularizer reg)
    : reg_(reg), sigma_sum_(dim, 0.0), w_(dim, 0.0) {}

const DenseVec& ComidProxSequence::step(const SparseVec& g, std::span<const double> sigma) {
  const std::size_t d = w_.size();
  check_dim(d, g.dim(), "ComidProxSequence::step");
  check_dim(d, sigma.size(), "ComidProxSequence::step");
  const double l1 = reg_.lambda1();
  const double l2 = reg_.lambda2();
  check_stabilizer(sigma_sum_, sigma, "ComidProxSequence");
  for_each_coordinate(d, g, [&](std::size_t j, double gj) {
    const double s = sigma_sum_[j] + sigma[j];
    sigma_sum_[j] = s;
    w_[j] = soft_threshold(s * w_[j] - gj, l1) / (s + l2);
  });
  ++t_;
  return w_;
}

}  // namespace acomid
