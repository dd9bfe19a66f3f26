#pragma once

#include <span>

#include "acomid/sparse.hpp"

namespace acomid {

/// A sample x with a label in {-1, +1}.
struct LabeledSample {
  LabeledSample(SparseVec x_, int y_);

  SparseVec x;
  int y;

  /// Label in {0, 1}, the form the (p - y) gradient expression uses.
  double y01() const { return y > 0 ? 1.0 : 0.0; }
};

/// r(w) = lambda1 * |w|_1 + lambda2 / 2 * |w|^2, restricted by kind.
class Regularizer {
 public:
  enum class Kind { none, l1, l2, elastic_net };

  static Regularizer none() { return Regularizer(Kind::none, 0.0, 0.0); }
  static Regularizer l1(double lambda1) { return Regularizer(Kind::l1, lambda1, 0.0); }
  static Regularizer l2(double lambda) { return Regularizer(Kind::l2, 0.0, lambda); }
  static Regularizer elastic_net(double lambda1, double lambda2) {
    return Regularizer(Kind::elastic_net, lambda1, lambda2);
  }

  Kind kind() const { return kind_; }
  double lambda1() const { return lambda1_; }
  double lambda2() const { return lambda2_; }

  double value(std::span<const double> w) const;
  /// Coordinate subgradient with sgn(0) = 0.
  double subgrad(double wi) const;
  DenseVec subgrad(std::span<const double> w) const;

 private:
  Regularizer(Kind kind, double lambda1, double lambda2);

  Kind kind_;
  double lambda1_;
  double lambda2_;
};

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Mirror map psi(w) = modulus / 2 * |w|^2. Only the quadratic kind exists;
/// the COMID step is written against this type so its scale is explicit.
class MirrorMap {
 public:
  static MirrorMap quadratic() { return MirrorMap(1.0); }

  /// Strong-convexity modulus of psi (the lambda of B_psi >= lambda/2 |w-v|^2).
  double modulus() const { return modulus_; }
  /// Constant with alpha * |grad psi(w) - grad psi(v)| >= |w - v|.
  double alpha() const { return 1.0 / modulus_; }

  double value(std::span<const double> w) const;
  DenseVec gradient(std::span<const double> w) const;
  double bregman(std::span<const double> w, std::span<const double> v) const;

 private:
  explicit MirrorMap(double modulus) : modulus_(modulus) {}
  double modulus_;
};

inline double bregman(const MirrorMap& psi, std::span<const double> w,
                      std::span<const double> v) {
  return psi.bregman(w, v);
}

double sigmoid(double z);

/// log(1 + exp(-y * margin)), overflow-safe.
double logloss_margin(double margin, int y);
double logloss_sample(const LabeledSample& s, std::span<const double> w);

/// (sigmoid(margin) - y01) * x.
SparseVec logloss_grad_from_margin(const LabeledSample& s, double margin);
SparseVec logloss_grad(const LabeledSample& s, std::span<const double> w);

inline double reg_value(const Regularizer& r, std::span<const double> w) {
  return r.value(w);
}
inline DenseVec reg_subgrad(const Regularizer& r, std::span<const double> w) {
  return r.subgrad(w);
}

/// Running maxima of the gradient norms the regret bound is stated in.
struct BoundConstants {
  double m_in = 0.0;    // sup |L'_t| over applied gradients
  double m_out = 0.0;   // sup |L'_t + r'| at visited iterates
  std::size_t tau_max = 0;
  double eta = 0.0;
  double alpha = 1.0;
  double b_init = 0.0;  // B_psi(w*, w_1)
  double r_head = 0.0;  // sum of r(w_i) over the first tau_max iterates

  void observe_loss_grad(double norm);
  void observe_full_grad(double norm);
};

}  // namespace acomid
