#include "coda/factorization.hpp"

#include "coda/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace coda {
namespace {

struct ClampedExp {
  std::size_t* counter;

  double operator()(double t) const {
    if (t > kExpClamp) {
      if (counter) ++*counter;
      return std::exp(kExpClamp);
    }
    if (t < -kExpClamp) {
      if (counter) ++*counter;
      return std::exp(-kExpClamp);
    }
    return std::exp(t);
  }
};

// Per-cell divergence D(z, theta) together with dD/dtheta and a positive curvature
// surrogate (phi''(theta)) used to precondition the block updates.
struct CellEval {
  double loss;
  double grad;
  double weight;
};

inline CellEval eval_cell(BregmanKind kind, double z, double theta, const ClampedExp& ex) {
  const double t = z - theta;
  if (kind == BregmanKind::SquaredNorm) return {0.5 * t * t, -t, 1.0};
  const double et = ex(theta);
  // e^theta (e^t - 1 - t), written with expm1 to avoid cancellation near t = 0.
  double inner;
  if (t > 2.0 * kExpClamp) {
    if (ex.counter) ++*ex.counter;
    inner = std::exp(2.0 * kExpClamp) - 1.0 - t;
  } else {
    inner = std::expm1(t) - t;
  }
  return {et * inner, -t * et, et * std::max(1.0, 1.0 - t)};
}

inline double eval_loss_only(BregmanKind kind, double z, double theta, const ClampedExp& ex) {
  return eval_cell(kind, z, theta, ex).loss;
}

void check_shapes(const Eigen::Ref<const Eigen::MatrixXd>& Z, const Eigen::Ref<const Eigen::MatrixXd>& A,
                  const Eigen::Ref<const Eigen::MatrixXd>& V) {
  if (A.rows() != V.rows() || V.cols() != Z.rows() || A.cols() != Z.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected Z (d x n), A (l x n), V (l x d); got Z " + std::to_string(Z.rows()) + "x" +
                    std::to_string(Z.cols()) + ", A " + std::to_string(A.rows()) + "x" +
                    std::to_string(A.cols()) + ", V " + std::to_string(V.rows()) + "x" +
                    std::to_string(V.cols()));
  }
}

double total_loss(BregmanKind kind, const Eigen::MatrixXd& Zc, const Eigen::MatrixXd& A,
                  const Eigen::MatrixXd& V, std::size_t* clamp_count) {
  const ClampedExp ex{clamp_count};
  const Eigen::MatrixXd theta = V.transpose() * A;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < Zc.cols(); ++i) {
    double col = 0.0;
    for (Eigen::Index j = 0; j < Zc.rows(); ++j) col += eval_loss_only(kind, Zc(j, i), theta(j, i), ex);
    loss += col;
  }
  return loss;
}

void check_components(Eigen::Index d, Eigen::Index n, Eigen::Index l) {
  if (l < 1 || l > std::min(d - 1, n)) {
    throw Error(ErrorCode::InvalidArgument, "number of components " + std::to_string(l) +
                                                " outside [1, min(d-1, n)] = [1, " +
                                                std::to_string(std::min(d - 1, n)) + "]");
  }
}

// Flip each loading row so its largest-magnitude entry is positive.
void fix_signs(Eigen::MatrixXd& V, Eigen::MatrixXd& A) {
  for (Eigen::Index k = 0; k < V.rows(); ++k) {
    Eigen::Index arg = 0;
    V.row(k).cwiseAbs().maxCoeff(&arg);
    if (V(k, arg) < 0.0) {
      V.row(k) *= -1.0;
      A.row(k) *= -1.0;
    }
  }
}

void sort_by_score_variance(Eigen::MatrixXd& V, Eigen::MatrixXd& A) {
  const Eigen::Index l = V.rows();
  Eigen::VectorXd var(l);
  for (Eigen::Index k = 0; k < l; ++k) {
    const double mean = A.row(k).mean();
    var[k] = (A.row(k).array() - mean).square().sum();
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(l));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return var[a] > var[b]; });
  Eigen::MatrixXd V2(V.rows(), V.cols());
  Eigen::MatrixXd A2(A.rows(), A.cols());
  for (Eigen::Index k = 0; k < l; ++k) {
    V2.row(k) = V.row(order[static_cast<std::size_t>(k)]);
    A2.row(k) = A.row(order[static_cast<std::size_t>(k)]);
  }
  V = std::move(V2);
  A = std::move(A2);
}

// Result of one preconditioned block step on a separable sub-problem.
struct BlockStep {
  double step = 0.0;
  bool moved = false;
};

// Minimizes f(u) = sum_k D(z_k, b_k^T u) along a Newton-like direction built from the
// curvature surrogate, with Armijo backtracking. `basis` is l x m (columns b_k),
// `target` holds z_k and `theta` holds b_k^T u on entry and on exit.
BlockStep block_update(BregmanKind kind, const Eigen::Ref<const Eigen::MatrixXd>& basis,
                       const Eigen::Ref<const Eigen::VectorXd>& target, Eigen::Ref<Eigen::VectorXd> u,
                       Eigen::VectorXd& theta, const LineSearchOptions& ls, Eigen::VectorXd& scratch_theta,
                       Eigen::VectorXd& scratch_w, Eigen::VectorXd& scratch_g) {
  const Eigen::Index m = target.size();
  const ClampedExp ex{nullptr};

  double f0 = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    const CellEval c = eval_cell(kind, target[k], theta[k], ex);
    f0 += c.loss;
    scratch_g[k] = c.grad;
    scratch_w[k] = c.weight;
  }
  const Eigen::VectorXd grad = basis * scratch_g.head(m);
  if (grad.squaredNorm() == 0.0) return {};

  Eigen::MatrixXd hess = basis * scratch_w.head(m).asDiagonal() * basis.transpose();
  const double ridge = 1e-12 * std::max(hess.diagonal().maxCoeff(), 1e-300);
  hess.diagonal().array() += ridge;
  Eigen::VectorXd dir = -hess.ldlt().solve(grad);
  double slope = grad.dot(dir);
  if (!(slope < 0.0) || !dir.allFinite()) {
    dir = -grad;
    slope = -grad.squaredNorm();
  }
  const Eigen::VectorXd dtheta = basis.transpose() * dir;

  double step = ls.initial_step;
  for (int it = 0; it <= ls.max_backtracks; ++it, step *= ls.shrink) {
    scratch_theta.head(m) = theta + step * dtheta;
    double f1 = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) f1 += eval_loss_only(kind, target[k], scratch_theta[k], ex);
    if (f1 <= f0 + ls.sufficient_decrease * step * slope && f1 <= f0) {
      u += step * dir;
      theta = scratch_theta.head(m);
      return {step, true};
    }
  }
  return {};
}

}  // namespace

double bregman(BregmanKind kind, const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "bregman arguments have different lengths");
  }
  const ClampedExp ex{nullptr};
  double sum = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) sum += eval_loss_only(kind, x[j], y[j], ex);
  return sum;
}

std::vector<double> FactorizationResult::loss_trace() const {
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& r : trace) out.push_back(r.loss);
  return out;
}

FactorizationResult pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& Z, Eigen::Index l) {
  const Eigen::Index d = Z.rows();
  const Eigen::Index n = Z.cols();
  check_components(d, n, l);

  FactorizationResult res;
  res.method = FactorizationMethod::PCA;
  res.divergence = BregmanKind::SquaredNorm;
  res.center = Z.rowwise().mean();
  const Eigen::MatrixXd Zc = Z.colwise() - res.center;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(Zc, Eigen::ComputeThinU);
  res.singular_values = svd.singularValues();
  const double smax = res.singular_values.size() > 0 ? res.singular_values[0] : 0.0;
  const double tol = static_cast<double>(std::max(d, n)) * std::numeric_limits<double>::epsilon() * smax;
  const Eigen::Index rank = (res.singular_values.array() > tol).count();
  if (smax == 0.0 || rank < l) {
    throw Error(ErrorCode::RankDeficient, "centered data has rank " + std::to_string(rank) +
                                              " < " + std::to_string(l) + " components");
  }

  res.loadings = svd.matrixU().leftCols(l).transpose();
  res.scores = res.loadings * Zc;
  fix_signs(res.loadings, res.scores);
  const double loss = 0.5 * (Zc - res.loadings.transpose() * res.scores).squaredNorm();
  res.trace.push_back({0, loss, 0.0});
  res.converged = true;
  res.iterations = 0;
  return res;
}

Eigen::VectorXd variance_explained(const FactorizationResult& res) {
  if (res.method != FactorizationMethod::PCA || res.singular_values.size() == 0) {
    throw Error(ErrorCode::WrongMethod, "variance explained needs a PCA result");
  }
  const Eigen::VectorXd sq = res.singular_values.array().square();
  const double total = sq.sum();
  if (total == 0.0) throw Error(ErrorCode::RankDeficient, "all singular values are zero");
  return sq / total;
}

double epca_loss(const Eigen::Ref<const Eigen::MatrixXd>& Z, const Eigen::Ref<const Eigen::MatrixXd>& A,
                 const Eigen::Ref<const Eigen::MatrixXd>& V, std::size_t* clamp_count) {
  check_shapes(Z, A, V);
  return total_loss(BregmanKind::ExpSum, Z, A, V, clamp_count);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> epca_gradient(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                                                          const Eigen::Ref<const Eigen::MatrixXd>& A,
                                                          const Eigen::Ref<const Eigen::MatrixXd>& V) {
  check_shapes(Z, A, V);
  const ClampedExp ex{nullptr};
  const Eigen::MatrixXd theta = V.transpose() * A;
  Eigen::MatrixXd g(theta.rows(), theta.cols());
  for (Eigen::Index i = 0; i < theta.cols(); ++i) {
    for (Eigen::Index j = 0; j < theta.rows(); ++j) {
      g(j, i) = (theta(j, i) - Z(j, i)) * ex(theta(j, i));
    }
  }
  return {V * g, A * g.transpose()};
}

void EpcaOptions::validate() const {
  if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be positive");
  if (!(rel_tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "rel_tol must be nonnegative");
  if (!(line_search.initial_step > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "line search initial step must be positive");
  }
  if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "line search shrink must lie in (0, 1)");
  }
  if (!(line_search.sufficient_decrease > 0.0 && line_search.sufficient_decrease < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "sufficient-decrease constant must lie in (0, 1)");
  }
  if (line_search.max_backtracks < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_backtracks must be positive");
  }
}

FactorizationResult bregman_pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& Z, Eigen::Index l,
                                    const EpcaOptions& opts) {
  opts.validate();
  const Eigen::Index d = Z.rows();
  const Eigen::Index n = Z.cols();
  check_components(d, n, l);

  FactorizationResult res;
  res.method = FactorizationMethod::EPCA;
  res.divergence = opts.divergence;
  res.center = Z.rowwise().mean();
  const Eigen::MatrixXd Zc = Z.colwise() - res.center;
  const Eigen::MatrixXd ZcT = Zc.transpose();

  Eigen::MatrixXd V;
  if (opts.init == EpcaInit::FromPca) {
    V = pca_fit(Z, l).loadings;
  } else {
    if (opts.initial_loadings.rows() != l || opts.initial_loadings.cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "initial loadings must be l x d");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(opts.initial_loadings.transpose());
    V = (qr.householderQ() * Eigen::MatrixXd::Identity(d, l)).transpose();
  }
  Eigen::MatrixXd A = V * Zc;

  const BregmanKind kind = opts.divergence;
  double loss = total_loss(kind, Zc, A, V, nullptr);
  res.trace.push_back({0, loss, 0.0});

  const Eigen::Index scratch = std::max(d, n);
  Eigen::VectorXd s_theta(scratch), s_w(scratch), s_g(scratch);
  Eigen::VectorXd theta_col(d), theta_row(n);

  res.converged = false;
  Eigen::MatrixXd V_prev = V, A_prev = A;
  double alpha = 1.0;
  int iter = 0;
  for (iter = 1; iter <= opts.max_iters; ++iter) {
    double step_sum = 0.0;
    // Score block: columns of A decouple given V.
    const Eigen::MatrixXd Vt = V.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      theta_col.noalias() = Vt * A.col(i);
      step_sum += block_update(kind, V, Zc.col(i), A.col(i), theta_col, opts.line_search, s_theta, s_w, s_g).step;
    }
    // Loading block: rows of U = V^T decouple given A; orthonormality is restored below.
    Eigen::MatrixXd U = Vt;
    for (Eigen::Index j = 0; j < d; ++j) {
      Eigen::VectorXd u = U.row(j).transpose();
      theta_row.noalias() = A.transpose() * u;
      step_sum += block_update(kind, A, ZcT.col(j), u, theta_row, opts.line_search, s_theta, s_w, s_g).step;
      U.row(j) = u.transpose();
    }
    // Retraction: U = Q R, V = Q^T, A <- R A keeps Theta = U A unchanged.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(U);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(d, l);
    const Eigen::MatrixXd R = Q.transpose() * U;
    V = Q.transpose();
    A = R * A;

    double next = total_loss(kind, Zc, A, V, nullptr);
    if (opts.extrapolate && iter > 1) {
      const Eigen::MatrixXd Ue = (V + alpha * (V - V_prev)).transpose();
      Eigen::HouseholderQR<Eigen::MatrixXd> qe(Ue);
      const Eigen::MatrixXd Qe = qe.householderQ() * Eigen::MatrixXd::Identity(d, l);
      const Eigen::MatrixXd Ve = Qe.transpose();
      const Eigen::MatrixXd Ae = (Ve * Ue) * (A + alpha * (A - A_prev));
      const double f = total_loss(kind, Zc, Ae, Ve, nullptr);
      if (f < next) {
        V = Ve;
        A = Ae;
        next = f;
        alpha = std::min(alpha * 1.5, 16.0);
      } else {
        alpha = 1.0;
      }
    }
    V_prev = V;
    A_prev = A;

    res.trace.push_back({iter, next, step_sum / static_cast<double>(n + d)});
    const double prev = loss;
    loss = next;
    if (prev <= 0.0 || (prev - next) <= opts.rel_tol * prev) {
      res.converged = true;
      break;
    }
  }
  res.iterations = std::min(iter, opts.max_iters);

  sort_by_score_variance(V, A);
  fix_signs(V, A);
  res.loadings = std::move(V);
  res.scores = std::move(A);
  res.clamp_count = 0;
  total_loss(kind, Zc, res.scores, res.loadings, &res.clamp_count);
  return res;
}

FactorizationResult epca_fit(const Eigen::Ref<const Eigen::MatrixXd>& Z, Eigen::Index l, EpcaOptions opts) {
  opts.divergence = BregmanKind::ExpSum;
  return bregman_pca_fit(Z, l, opts);
}

void write_loss_trace_csv(const FactorizationResult& res, std::ostream& out) {
  const auto old_precision = out.precision(17);
  out << "iteration,loss,step_size\n";
  for (const auto& r : res.trace) out << r.iteration << ',' << r.loss << ',' << r.step_size << '\n';
  out.precision(old_precision);
}

}  // namespace coda
