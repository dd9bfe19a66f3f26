#include "acomid/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace acomid {

LabeledSample::LabeledSample(SparseVec x_, int y_) : x(std::move(x_)), y(y_) {
  if (y != 1 && y != -1) {
    throw std::invalid_argument("LabeledSample: label must be -1 or +1, got " +
                                std::to_string(y));
  }
}

Regularizer::Regularizer(Kind kind, double lambda1, double lambda2)
    : kind_(kind), lambda1_(lambda1), lambda2_(lambda2) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw std::invalid_argument("Regularizer: coefficients must be nonnegative");
  }
}

double Regularizer::value(std::span<const double> w) const {
  if (kind_ == Kind::none) return 0.0;
  double l1 = 0.0, sq = 0.0;
  for (double v : w) {
    l1 += std::abs(v);
    sq += v * v;
  }
  return lambda1_ * l1 + 0.5 * lambda2_ * sq;
}

double Regularizer::subgrad(double wi) const {
  switch (kind_) {
    case Kind::none: return 0.0;
    case Kind::l1: return lambda1_ * sgn(wi);
    case Kind::l2: return lambda2_ * wi;
    case Kind::elastic_net: return lambda1_ * sgn(wi) + lambda2_ * wi;
  }
  return 0.0;
}

DenseVec Regularizer::subgrad(std::span<const double> w) const {
  DenseVec out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = subgrad(w[i]);
  return out;
}

double MirrorMap::value(std::span<const double> w) const {
  double sq = 0.0;
  for (double v : w) sq += v * v;
  return 0.5 * modulus_ * sq;
}

DenseVec MirrorMap::gradient(std::span<const double> w) const {
  DenseVec out(w.begin(), w.end());
  for (double& v : out) v *= modulus_;
  return out;
}

double MirrorMap::bregman(std::span<const double> w, std::span<const double> v) const {
  if (w.size() != v.size()) throw std::invalid_argument("bregman: dimension mismatch");
  // Closed form of psi(w) - psi(v) - <grad psi(v), w - v> for quadratic psi.
  double sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = w[i] - v[i];
    sq += d * d;
  }
  return 0.5 * modulus_ * sq;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logloss_margin(double margin, int y) {
  const double z = -static_cast<double>(y) * margin;
  if (z > 30.0) return z;
  return std::log1p(std::exp(z));
}

double logloss_sample(const LabeledSample& s, std::span<const double> w) {
  return logloss_margin(sparse_dot(s.x, w), s.y);
}

SparseVec logloss_grad_from_margin(const LabeledSample& s, double margin) {
  return s.x.scaled(sigmoid(margin) - s.y01());
}

SparseVec logloss_grad(const LabeledSample& s, std::span<const double> w) {
  return logloss_grad_from_margin(s, sparse_dot(s.x, w));
}

void BoundConstants::observe_loss_grad(double norm) { m_in = std::max(m_in, norm); }
void BoundConstants::observe_full_grad(double norm) { m_out = std::max(m_out, norm); }

}  // namespace acomid
