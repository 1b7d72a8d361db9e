#include "coda/error.hpp"
#include "coda/factorization.hpp"

#include "doctest.h"
#include "random_data.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

using namespace coda;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Reference exponential divergence written straight from its definition.
double d_exp_ref(double x, double y) { return std::exp(y) * (std::exp(x - y) - 1.0 - x + y); }

double loss_ref(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Theta) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < Z.cols(); ++i)
    for (Eigen::Index j = 0; j < Z.rows(); ++j) s += d_exp_ref(Z(j, i), Theta(j, i));
  return s;
}

// sin of the largest principal angle between the row spaces of two orthonormal-row matrices.
double max_principal_sine(const Eigen::MatrixXd& V1, const Eigen::MatrixXd& V2) {
  const Eigen::MatrixXd residual = V2.transpose() - V1.transpose() * (V1 * V2.transpose());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
  return svd.singularValues()[0];
}

// Golden-section minimization of a unimodal function on [lo, hi].
double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d, d = c, fd = fc, c = b - g * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd, d = a + g * (b - a), fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// min over a of sum_j D_exp(z_j, v_j a): coarse grid, then golden section on the best bracket.
double best_column_loss(const Eigen::Vector3d& z, const Eigen::Vector3d& v) {
  auto f = [&](double a) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += d_exp_ref(z[j], v[j] * a);
    return s;
  };
  const double lo = -12.0, hi = 12.0;
  const int grid = 240;
  const double h = (hi - lo) / grid;
  int best = 0;
  double fbest = f(lo);
  for (int k = 1; k <= grid; ++k) {
    const double fk = f(lo + k * h);
    if (fk < fbest) fbest = fk, best = k;
  }
  const double a = golden_min(f, lo + (best - 1) * h, lo + (best + 1) * h, 1e-10);
  return std::min(fbest, f(a));
}

Eigen::Vector3d unit(double polar, double azimuth) {
  return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

// Independent global minimization for l = 1 on a 3-row matrix: search unit directions on
// a dense grid of the upper hemisphere, refine around the best cell, and minimize every
// column's score separately.
double brute_force_rank1_loss(const Eigen::MatrixXd& Zc) {
  auto loss_for = [&](const Eigen::Vector3d& v) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < Zc.cols(); ++i) s += best_column_loss(Zc.col(i), v);
    return s;
  };
  const double pi = std::acos(-1.0);
  double best = std::numeric_limits<double>::infinity();
  double bp = 0.0, ba = 0.0;
  const int np = 60, na = 120;
  for (int i = 0; i <= np; ++i) {
    for (int k = 0; k < na; ++k) {
      const double p = pi * i / np, a = 2.0 * pi * k / na;
      const double l = loss_for(unit(p, a));
      if (l < best) best = l, bp = p, ba = a;
    }
  }
  double hp = pi / np, ha = 2.0 * pi / na;
  for (int round = 0; round < 12; ++round) {
    double cp = bp, ca = ba;
    for (int i = -4; i <= 4; ++i) {
      for (int k = -4; k <= 4; ++k) {
        const double p = cp + i * hp / 4.0, a = ca + k * ha / 4.0;
        const double l = loss_for(unit(p, a));
        if (l < best) best = l, bp = p, ba = a;
      }
    }
    hp /= 3.0;
    ha /= 3.0;
  }
  return best;
}

}  // namespace

TEST_CASE("bregman divergences") {
  CHECK(bregman(BregmanKind::SquaredNorm, vec({1, 2}), vec({0, 0})) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(bregman(BregmanKind::ExpSum, vec({0.3, -1.0}), vec({0.3, -1.0})) == 0.0);
  CHECK(bregman(BregmanKind::ExpSum, vec({0}), vec({std::log(2.0)})) ==
        doctest::Approx(0.386294361119890619).epsilon(1e-14));
  CHECK_THROWS_AS(bregman(BregmanKind::ExpSum, vec({0}), vec({0, 1})), Error);
}

TEST_CASE("bregman divergences are nonnegative and vanish only on the diagonal") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int t = 0; t < 2000; ++t) {
    Eigen::VectorXd x(4), y(4);
    for (int j = 0; j < 4; ++j) x[j] = normal(rng), y[j] = normal(rng);
    for (auto kind : {BregmanKind::SquaredNorm, BregmanKind::ExpSum}) {
      CHECK(bregman(kind, x, y) > 0.0);
      CHECK(bregman(kind, x, x) == 0.0);
    }
    CHECK(bregman(BregmanKind::ExpSum, x, y) ==
          doctest::Approx(d_exp_ref(x[0], y[0]) + d_exp_ref(x[1], y[1]) + d_exp_ref(x[2], y[2]) +
                          d_exp_ref(x[3], y[3]))
              .epsilon(1e-9));
  }
}

TEST_CASE("negative log-likelihood and exponential divergence share their minimizer") {
  // Scalar family with G(theta) = exp(theta): -log P(x|theta) = -log P0(x) - x theta + exp(theta).
  // Up to terms free of theta this is D_exp(theta, log x).
  for (double x : {0.3, 1.0, 2.5, 7.0}) {
    auto nll = [x](double theta) { return -x * theta + std::exp(theta); };
    auto div = [x](double y) {
      return bregman(BregmanKind::ExpSum, Eigen::VectorXd::Constant(1, std::log(x)), Eigen::VectorXd::Constant(1, y));
    };
    const double theta_star = golden_min(nll, -10.0, 10.0, 1e-9);
    const double y_star = golden_min(div, -10.0, 10.0, 1e-9);
    CHECK(std::abs(theta_star - y_star) < 1e-6);
    CHECK(std::abs(theta_star - std::log(x)) < 1e-6);
    const double offset = nll(0.0) - d_exp_ref(0.0, std::log(x));
    for (double theta : {-2.0, -0.5, 0.4, 1.7}) {
      CHECK(nll(theta) - d_exp_ref(theta, std::log(x)) == doctest::Approx(offset).epsilon(1e-12));
    }
  }
}

TEST_CASE("pca recovers exact low-rank structure") {
  std::mt19937_64 rng(3);
  const Eigen::VectorXd u = testing::random_matrix(rng, 6, 1);
  const Eigen::RowVectorXd w = testing::random_matrix(rng, 1, 25);
  const Eigen::MatrixXd Z = u * w + Eigen::VectorXd::LinSpaced(6, -1.0, 2.0) * Eigen::RowVectorXd::Ones(25);
  const FactorizationResult res = pca_fit(Z, 1);
  const Eigen::MatrixXd Zc = Z.colwise() - res.center;
  CHECK((Zc - res.natural_parameters()).squaredNorm() < 1e-18);
  CHECK(res.trace.back().loss < 1e-9);
  const Eigen::VectorXd ve = variance_explained(res);
  CHECK(ve[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ve.tail(ve.size() - 1).sum() < 1e-12);
  CHECK_THROWS_AS(pca_fit(Z, 2), Error);
}

TEST_CASE("pca error is no worse than random subspaces") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd Z = testing::random_matrix(rng, 5, 20);
  for (Eigen::Index l = 1; l <= 4; ++l) {
    const FactorizationResult res = pca_fit(Z, l);
    const Eigen::MatrixXd Zc = Z.colwise() - res.center;
    const double best = (Zc - res.natural_parameters()).squaredNorm();
    CHECK((res.loadings * res.loadings.transpose() - Eigen::MatrixXd::Identity(l, l)).cwiseAbs().maxCoeff() < 1e-8);
    for (int t = 0; t < 200; ++t) {
      const Eigen::MatrixXd V = testing::random_orthonormal_rows(rng, l, 5);
      const double err = (Zc - V.transpose() * (V * Zc)).squaredNorm();
      CHECK(best <= err + 1e-12);
    }
  }
}

TEST_CASE("variance explained") {
  FactorizationResult equal;
  equal.singular_values = Eigen::VectorXd::Constant(4, 2.5);
  const Eigen::VectorXd ve = variance_explained(equal);
  for (Eigen::Index k = 0; k < 4; ++k) CHECK(ve[k] == doctest::Approx(0.25));

  std::mt19937_64 rng(5);
  const FactorizationResult res = pca_fit(testing::random_matrix(rng, 6, 40), 3);
  const Eigen::VectorXd v = variance_explained(res);
  double cum = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    CHECK(v[k] >= 0.0);
    CHECK(v[k] <= 1.0);
    if (k > 0) CHECK(v[k] <= v[k - 1] + 1e-15);
    cum += v[k];
  }
  CHECK(cum == doctest::Approx(1.0).epsilon(1e-14));

  FactorizationResult epca;
  epca.method = FactorizationMethod::EPCA;
  epca.singular_values = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(variance_explained(epca), Error);
}

TEST_CASE("epca loss") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd V = testing::random_orthonormal_rows(rng, 2, 4);
  const Eigen::MatrixXd A = testing::random_matrix(rng, 2, 7);
  const Eigen::MatrixXd Z = V.transpose() * A;
  CHECK(epca_loss(Z, A, V) < 1e-20);

  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  CHECK(epca_loss(Eigen::MatrixXd::Zero(1, 1), std::log(2.0) * one, one) ==
        doctest::Approx(0.386294361119890619).epsilon(1e-14));

  for (int t = 0; t < 100; ++t) {
    const Eigen::MatrixXd Zr = testing::random_matrix(rng, 4, 7, 2.0);
    const Eigen::MatrixXd Ar = testing::random_matrix(rng, 2, 7, 2.0);
    const double loss = epca_loss(Zr, Ar, V);
    CHECK(loss >= 0.0);
    CHECK(loss == doctest::Approx(loss_ref(Zr, V.transpose() * Ar)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(epca_loss(Z, A.topRows(1), V), Error);
}

TEST_CASE("epca clamps extreme natural parameters") {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  std::size_t clamps = 0;
  const double loss = epca_loss(Eigen::MatrixXd::Zero(1, 1), 40.0 * one, one, &clamps);
  CHECK(std::isfinite(loss));
  CHECK(clamps >= 1);
}

TEST_CASE("epca gradient matches central differences") {
  std::mt19937_64 rng(8);
  const double h = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd Z = testing::random_matrix(rng, 3, 4);
    const Eigen::MatrixXd A = testing::random_matrix(rng, 2, 4);
    const Eigen::MatrixXd V = testing::random_matrix(rng, 2, 3);
    const auto [gA, gV] = epca_gradient(Z, A, V);
    for (Eigen::Index k = 0; k < A.size(); ++k) {
      Eigen::MatrixXd Ap = A, Am = A;
      Ap(k) += h, Am(k) -= h;
      const double fd = (loss_ref(Z, V.transpose() * Ap) - loss_ref(Z, V.transpose() * Am)) / (2 * h);
      CHECK(std::abs(gA(k) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
    for (Eigen::Index k = 0; k < V.size(); ++k) {
      Eigen::MatrixXd Vp = V, Vm = V;
      Vp(k) += h, Vm(k) -= h;
      const double fd = (loss_ref(Z, Vp.transpose() * A) - loss_ref(Z, Vm.transpose() * A)) / (2 * h);
      CHECK(std::abs(gV(k) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("epca gradient special cases") {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd V = testing::random_orthonormal_rows(rng, 2, 4);
  const Eigen::MatrixXd A = testing::random_matrix(rng, 2, 5);
  const auto [gA, gV] = epca_gradient(V.transpose() * A, A, V);
  CHECK(gA.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(gV.cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  const auto [g1, unused] = epca_gradient(Eigen::MatrixXd::Zero(1, 1), one, one);
  CHECK(g1(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  const double fd = (d_exp_ref(0.0, 1.0 + 1e-6) - d_exp_ref(0.0, 1.0 - 1e-6)) / 2e-6;
  CHECK(g1(0, 0) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("epca converges on exactly representable data") {
  std::mt19937_64 rng(10);
  const Eigen::MatrixXd V = testing::random_orthonormal_rows(rng, 2, 5);
  const Eigen::MatrixXd Z = V.transpose() * testing::random_matrix(rng, 2, 30);
  const FactorizationResult res = epca_fit(Z, 2);
  CHECK(res.converged);
  CHECK(res.trace.back().loss < 1e-8);
}

TEST_CASE("epca matches a brute-force rank-1 minimization") {
  Eigen::MatrixXd Z(3, 6);
  Z << 0.8, -0.4, 1.1, 0.2, -0.9, 0.5,
       -0.3, 0.6, -0.8, 0.1, 0.7, -0.2,
       0.4, 0.2, 0.9, -0.6, -0.5, 0.3;
  EpcaOptions opts;
  opts.rel_tol = 1e-13;
  opts.max_iters = 5000;
  const FactorizationResult res = epca_fit(Z, 1, opts);
  const Eigen::MatrixXd Zc = Z.colwise() - res.center;
  const double oracle = brute_force_rank1_loss(Zc);
  const double fitted = res.trace.back().loss;
  CHECK(fitted == doctest::Approx(loss_ref(Zc, res.natural_parameters())).epsilon(1e-10));
  CHECK(std::abs(fitted - oracle) < 1e-4);
}

TEST_CASE("epca trace is monotone, orthonormal, deterministic and beats its start") {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd Z = testing::random_matrix(rng, 6, 80, 1.5);
  EpcaOptions opts;
  opts.max_iters = 200;
  opts.rel_tol = 1e-10;
  const FactorizationResult a = epca_fit(Z, 3, opts);
  const FactorizationResult b = epca_fit(Z, 3, opts);
  REQUIRE(a.trace.size() >= 2);
  for (std::size_t k = 1; k < a.trace.size(); ++k) {
    CHECK(a.trace[k].loss <= a.trace[k - 1].loss * (1.0 + 1e-12));
  }
  CHECK(a.trace.back().loss <= a.trace.front().loss);
  CHECK(a.trace.back().loss < 0.99 * a.trace.front().loss);
  CHECK((a.loadings * a.loadings.transpose() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) CHECK(a.trace[k].loss == b.trace[k].loss);
  CHECK(a.loadings == b.loadings);
  CHECK(a.scores == b.scores);

  // Canonical ordering and signs.
  for (Eigen::Index k = 0; k + 1 < 3; ++k) {
    const double vk = (a.scores.row(k).array() - a.scores.row(k).mean()).square().sum();
    const double vn = (a.scores.row(k + 1).array() - a.scores.row(k + 1).mean()).square().sum();
    CHECK(vk >= vn);
  }
  for (Eigen::Index k = 0; k < 3; ++k) {
    Eigen::Index arg;
    a.loadings.row(k).cwiseAbs().maxCoeff(&arg);
    CHECK(a.loadings(k, arg) > 0.0);
  }
}

TEST_CASE("orthonormality holds after every iteration") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd Z = testing::random_matrix(rng, 5, 40);
  for (int iters = 1; iters <= 6; ++iters) {
    EpcaOptions opts;
    opts.max_iters = iters;
    opts.rel_tol = 0.0;
    const FactorizationResult res = epca_fit(Z, 2, opts);
    CHECK((res.loadings * res.loadings.transpose() - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("squared-norm alternating minimization recovers the PCA subspace") {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd Z = testing::random_matrix(rng, 5, 30);
    for (Eigen::Index l : {1, 2, 3}) {
      EpcaOptions opts;
      opts.divergence = BregmanKind::SquaredNorm;
      opts.init = EpcaInit::Given;
      opts.initial_loadings = testing::random_matrix(rng, l, 5);
      opts.rel_tol = 0.0;
      opts.max_iters = 20000;
      const FactorizationResult alt = bregman_pca_fit(Z, l, opts);
      const FactorizationResult pca = pca_fit(Z, l);
      CHECK(max_principal_sine(pca.loadings, alt.loadings) < 1e-6);
      CHECK(alt.trace.back().loss == doctest::Approx(pca.trace.back().loss).epsilon(1e-9));
    }
  }
}

TEST_CASE("epca options are validated") {
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Random(4, 10);
  EpcaOptions bad;
  bad.line_search.shrink = 1.0;
  CHECK_THROWS_AS(epca_fit(Z, 1, bad), Error);
  CHECK_THROWS_AS(epca_fit(Z, 4), Error);
  CHECK_THROWS_AS(epca_fit(Z, 0), Error);
  EpcaOptions given;
  given.init = EpcaInit::Given;
  CHECK_THROWS_AS(epca_fit(Z, 2, given), Error);
}

TEST_CASE("non-convergence is reported with the trace") {
  std::mt19937_64 rng(15);
  const Eigen::MatrixXd Z = testing::random_matrix(rng, 5, 50, 2.0);
  EpcaOptions opts;
  opts.max_iters = 2;
  opts.rel_tol = 0.0;
  const FactorizationResult res = epca_fit(Z, 2, opts);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 2);
  CHECK(res.trace.size() == 3);

  std::ostringstream csv;
  write_loss_trace_csv(res, csv);
  CHECK(csv.str().rfind("iteration,loss,step_size\n0,", 0) == 0);
}
