#include <doctest.h>

#include <cmath>
#include <random>

#include "acomid/optimizers.hpp"
#include "oracles.hpp"

using namespace acomid;

namespace {

ModelState st(DenseVec w) { return ModelState{std::move(w), 0}; }

GradientMsg msg(std::size_t d, std::vector<std::pair<std::size_t, double>> e = {}) {
  return make_msg(SparseVec(d, std::move(e)), 0);
}

}  // namespace

TEST_CASE("dsgd_step examples") {
  const auto m = msg(2, {{0, 1.0}});
  const auto s = dsgd_step(st({1, 0}), m, 1.0, DenseVec{1, 0}, 0.1);
  CHECK(s.w[0] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(s.w[1] == 0.0);
  CHECK(s.t == 1);

  const auto plain = dsgd_step(st({1, 2}), m, 0.0, DenseVec{5, 5}, 0.3);
  CHECK(plain.w == DenseVec{1 - 0.3, 2});
  CHECK(dsgd_step(st({1, 2}), m, 1.0, DenseVec{5, 5}, 0.0).w == DenseVec{1, 2});
}

TEST_CASE("comid_step_generic examples against a numeric argmin") {
  const auto psi = MirrorMap::quadratic();
  CHECK(comid_step_generic(st({1, 2}), msg(2, {{1, 1.0}}), Regularizer::none(), psi, 0.5).w ==
        DenseVec{1, 1.5});

  const auto l2 = comid_step_generic(st({1}), msg(1), Regularizer::l2(1.0), psi, 0.1);
  CHECK(l2.w[0] == doctest::Approx(0.9090909090909091).epsilon(1e-15));
  const double num_l2 = oracle::argmin_1d(
      [](double w) { return 0.1 * 0.5 * w * w + 0.5 * (w - 1) * (w - 1); }, -3, 3);
  CHECK(std::abs(l2.w[0] - num_l2) < oracle::kArgminTol);

  const auto l1 = comid_step_generic(st({0.05}), msg(1), Regularizer::l1(0.1), psi, 1.0);
  CHECK(l1.w[0] == 0.0);
  const double num_l1 = oracle::argmin_1d(
      [](double w) { return 0.1 * std::abs(w) + 0.5 * (w - 0.05) * (w - 0.05); }, -3, 3);
  CHECK(std::abs(num_l1) < oracle::kArgminTol);
}

TEST_CASE("property: generic COMID step is the numeric argmin for every regularizer") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-2, 2);
  const auto psi = MirrorMap::quadratic();
  for (int rep = 0; rep < 60; ++rep) {
    const double w0 = u(rng), g = u(rng), eta = 0.05 + 0.5 * std::abs(u(rng));
    const double l1 = 0.3 * std::abs(u(rng)), l2 = std::abs(u(rng));
    const Regularizer regs[] = {Regularizer::none(), Regularizer::l1(l1), Regularizer::l2(l2),
                                Regularizer::elastic_net(l1, l2)};
    for (const auto& r : regs) {
      const auto out = comid_step_generic(st({w0}), msg(1, {{0, g}}), r, psi, eta);
      const double num = oracle::argmin_1d(
          [&](double w) {
            return eta * g * w + eta * (r.lambda1() * std::abs(w) + 0.5 * r.lambda2() * w * w) +
                   0.5 * (w - w0) * (w - w0);
          },
          -10, 10);
      CHECK(std::abs(out.w[0] - num) < oracle::kArgminTol);
    }
  }
}

TEST_CASE("comid_l2_closed_step examples") {
  const auto s = comid_l2_closed_step(st({1, 1}), msg(2), 1.0, 0.1);
  CHECK(s.w[0] == doctest::Approx(1 / 1.1).epsilon(1e-15));
  CHECK(s.w[1] == doctest::Approx(1 / 1.1).epsilon(1e-15));
  CHECK(comid_l2_closed_step(st({1, 1}), msg(2, {{0, 2.0}}), 0.0, 0.1).w ==
        DenseVec{1 - 0.2, 1});
  CHECK_THROWS_AS(comid_l2_closed_step(st({1}), msg(1), -1.0, 0.1), std::invalid_argument);
}

TEST_CASE("property: closed form matches generic L2 COMID") {
  // The explicit form shrinks w but not g, so it equals the generic step fed
  // with (1 + eta lambda) g. With g = 0 the two coincide directly.
  std::mt19937_64 rng(8);
  const auto psi = MirrorMap::quadratic();
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t d = 1 + rng() % 20;
    const DenseVec w = oracle::random_dense(rng, d);
    const SparseVec g = oracle::random_sparse(rng, d, 0.5);
    const double eta = 0.01 + 0.2 * (rng() % 100) / 100.0, lambda = (rng() % 100) / 50.0;
    const auto closed = comid_l2_closed_step(st(w), make_msg(g, 0), lambda, eta);
    const auto generic =
        comid_step_generic(st(w), make_msg(g.scaled(1 + eta * lambda), 0), Regularizer::l2(lambda),
                           psi, eta);
    CHECK(linf_distance(closed.w, generic.w) < 1e-12);

    const auto c0 = comid_l2_closed_step(st(w), msg(d), lambda, eta);
    const auto g0 = comid_step_generic(st(w), msg(d), Regularizer::l2(lambda), psi, eta);
    CHECK(linf_distance(c0.w, g0.w) < 1e-12);
  }
}

TEST_CASE("l2_trick_step examples") {
  CHECK(l2_trick_step(st({1}), msg(1), 1.0, 0.1).w[0] == doctest::Approx(0.9).epsilon(1e-15));
  const auto m = msg(2, {{1, 0.7}});
  CHECK(l2_trick_step(st({1, 2}), m, 0.0, 0.1).w == comid_l2_closed_step(st({1, 2}), m, 0.0, 0.1).w);
  CHECK_THROWS_AS(l2_trick_step(st({1}), msg(1), 10.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(l2_trick_step(st({1}), msg(1), 20.0, 0.1), std::invalid_argument);
}

TEST_CASE("property: single-step L2-trick gap identity") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t d = 1 + rng() % 16;
    const DenseVec w = oracle::random_dense(rng, d);
    const SparseVec g = oracle::random_sparse(rng, d, 0.5);
    const double eta = 0.001 + 0.2 * u(rng), lambda = u(rng);
    const double el = eta * lambda;
    const auto a = comid_l2_closed_step(st(w), make_msg(g, 0), lambda, eta);
    const auto b = l2_trick_step(st(w), make_msg(g, 0), lambda, eta);
    DenseVec diff(d);
    for (std::size_t i = 0; i < d; ++i) diff[i] = a.w[i] - b.w[i];
    const double expect = el * el / (1 + el) * l2_norm(w);
    CHECK(std::abs(l2_norm(diff) - expect) <= 1e-12 * std::max(1.0, expect));
  }
}

TEST_CASE("property: optimality residual of L2 COMID") {
  std::mt19937_64 rng(4);
  const auto psi = MirrorMap::quadratic();
  const double eta = 0.05, lambda = 0.3;
  ModelState s = st(oracle::random_dense(rng, 10));
  for (int t = 0; t < 2000; ++t) {
    const SparseVec g = oracle::random_sparse(rng, 10, 0.3);
    const auto next = comid_step_generic(s, make_msg(g, 0), Regularizer::l2(lambda), psi, eta);
    const DenseVec gd = g.densify();
    double worst = 0;
    for (std::size_t i = 0; i < 10; ++i) {
      worst = std::max(worst, std::abs(eta * gd[i] + eta * lambda * next.w[i] + next.w[i] - s.w[i]));
    }
    CHECK(worst < 1e-10);
    s = next;
  }
}

TEST_CASE("tau_fixed examples and bounded staleness") {
  CHECK(tau_fixed(5, 10) == 0);
  CHECK(tau_fixed(10, 3) == 7);
  CHECK(tau_fixed(0, 0) == 0);
  for (std::uint64_t k = 0; k < 10; ++k) {
    for (std::uint64_t t = 0; t < 100; ++t) {
      CHECK(t - tau_fixed(t, k) <= k);
      CHECK(tau_fixed(t, k) <= t);
    }
  }
}

TEST_CASE("ftrl closed form examples") {
  FtrlParams p{1.0, 1.0, 0.01, 0.001};
  CHECK(ftrl_weight(0.005, 0.0, p) == 0.0);
  const double w = ftrl_weight(1.0, 0.0, p);
  CHECK(w == doctest::Approx(-0.989010989010989).epsilon(1e-15));
  // q(w) = z w + l1 |w| + 1/2 ((beta + sqrt n) / alpha + l2) w^2 at the same point.
  const double num_q = oracle::argmin_1d(
      [&](double v) { return 1.0 * v + 0.01 * std::abs(v) + 0.5 * (1.0 + 0.001) * v * v; }, -5, 5);
  CHECK(std::abs(w - num_q) < oracle::kArgminTol);
  CHECK_THROWS_AS(FtrlState(3, FtrlParams{0.0, 1.0, 0, 0}), std::invalid_argument);
}

TEST_CASE("ftrl_coordinate_update: empty gradient and laziness") {
  std::mt19937_64 rng(17);
  FtrlState s(12, FtrlParams{0.5, 1.0, 0.05, 0.01});
  for (int t = 0; t < 50; ++t) s = ftrl_coordinate_update(s, make_msg(oracle::random_sparse(rng, 12, 0.3), 0));

  const auto same = ftrl_coordinate_update(s, msg(12));
  CHECK(same.z == s.z);
  CHECK(same.n == s.n);
  CHECK(same.w == s.w);

  for (int rep = 0; rep < 100; ++rep) {
    const SparseVec g = oracle::random_sparse(rng, 12, 0.25);
    const auto next = ftrl_coordinate_update(s, make_msg(g, 0));
    const DenseVec gd = g.densify();
    for (std::size_t i = 0; i < 12; ++i) {
      if (gd[i] == 0.0) {
        CHECK(next.z[i] == s.z[i]);
        CHECK(next.n[i] == s.n[i]);
        CHECK(next.w[i] == s.w[i]);
      } else {
        // Materialized from the old (z, n), then accumulated.
        CHECK(next.w[i] == ftrl_weight(s.z[i], s.n[i], s.params));
        const double sigma = (std::sqrt(s.n[i] + gd[i] * gd[i]) - std::sqrt(s.n[i])) / 0.5;
        CHECK(next.z[i] == doctest::Approx(s.z[i] + gd[i] - sigma * next.w[i]).epsilon(1e-14));
        CHECK(next.n[i] == s.n[i] + gd[i] * gd[i]);
      }
    }
    s = next;
  }
}

TEST_CASE("ftrl_init_weights reproduces the requested first iterate") {
  FtrlState s(4, FtrlParams{0.1, 1.0, 0.01, 0.001});
  ftrl_init_weights(s, DenseVec{1, -1, 0, 0.5});
  const auto w = s.materialize_all();
  CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(w[2] == 0.0);
  CHECK(w[3] == doctest::Approx(0.5).epsilon(1e-14));
}
