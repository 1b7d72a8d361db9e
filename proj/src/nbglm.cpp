#include "coda/nbglm.hpp"

#include "coda/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace coda {
namespace {

void check_inputs(const DesignMatrix& X, const Counts& y, const Eigen::Ref<const Eigen::VectorXd>& exposure,
                  Eigen::Index q) {
  if (y.size() != X.rows() || exposure.size() != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "design, response and exposure lengths differ");
  }
  if (q != X.cols()) throw Error(ErrorCode::DimensionMismatch, "coefficient vector does not match design");
  if ((exposure.array() <= 0.0).any() || !exposure.allFinite()) {
    throw Error(ErrorCode::DomainError, "exposures must be positive");
  }
  if ((y.array() < 0).any()) throw Error(ErrorCode::DomainError, "counts must be nonnegative");
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// -log-likelihood in (log r, beta) packed into one vector.
struct Objective {
  const DesignMatrix& X;
  const Counts& y;
  const Eigen::Ref<const Eigen::VectorXd>& exposure;

  NbDerivatives eval(const Eigen::VectorXd& params, bool hessian) const {
    return nb_derivatives(params[0], params.tail(params.size() - 1), X, y, exposure, hessian);
  }
};

}  // namespace

DesignMatrix::DesignMatrix(Eigen::MatrixXd values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "design matrix is empty");
  }
  if (static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "one name per design column required");
  }
  if (!values_.allFinite()) throw Error(ErrorCode::InvalidArgument, "design matrix has non-finite entries");
  if ((values_.col(0).array() != 1.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "first design column must be the intercept");
  }
  for (Eigen::Index c = 1; c < values_.cols(); ++c) {
    if ((values_.col(c).array() == values_(0, c)).all()) {
      throw Error(ErrorCode::InvalidArgument, "column '" + names_[c] + "' is constant");
    }
    for (Eigen::Index o = 1; o < c; ++o) {
      if (values_.col(c) == values_.col(o)) {
        throw Error(ErrorCode::InvalidArgument, "columns '" + names_[o] + "' and '" + names_[c] + "' are identical");
      }
    }
  }
}

double nb_log_pmf(std::int64_t j, double r, double p) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::DomainError, "r must be positive");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::DomainError, "p must lie in (0, 1)");
  if (j < 0) return -std::numeric_limits<double>::infinity();
  const double jj = static_cast<double>(j);
  return std::lgamma(jj + r) - std::lgamma(r) - std::lgamma(jj + 1.0) + r * std::log(p) + jj * std::log1p(-p);
}

double nb_pmf(std::int64_t j, double r, double p) { return std::exp(nb_log_pmf(j, r, p)); }

MeanVariance nb_mean_var(double r, double p) {
  if (!(r > 0.0)) throw Error(ErrorCode::DomainError, "r must be positive");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::DomainError, "p must lie in (0, 1)");
  const double mean = r * (1.0 - p) / p;
  return {mean, mean / p};
}

NbDerivatives nb_derivatives(double log_r, const Eigen::Ref<const Eigen::VectorXd>& beta, const DesignMatrix& X,
                             const Counts& y, const Eigen::Ref<const Eigen::VectorXd>& exposure,
                             bool with_hessian) {
  check_inputs(X, y, exposure, beta.size());
  const Eigen::Index n = X.rows();
  const Eigen::Index q = X.cols();
  const double r = std::exp(log_r);
  const double lgr = std::lgamma(r);
  const Eigen::VectorXd eta = X.values() * beta + exposure.array().log().matrix();

  NbDerivatives out;
  out.gradient = Eigen::VectorXd::Zero(q + 1);
  Eigen::VectorXd d_eta(n), w_eta(n), w_cross(n);
  double ll = 0.0, g_rho = 0.0, h_rho = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = std::exp(eta[i]);
    const auto yi = y[i];
    const double yd = static_cast<double>(yi);
    const double rm = r + mu;

    double s1 = 0.0, s2 = 0.0;  // psi(y+r) - psi(r), psi'(y+r) - psi'(r)
    for (std::int64_t k = 0; k < yi; ++k) {
      const double inv = 1.0 / (r + static_cast<double>(k));
      s1 += inv;
      s2 -= inv * inv;
    }
    const double log_p = -std::log1p(mu / r);
    double term = std::lgamma(yd + r) - lgr - std::lgamma(yd + 1.0) + r * log_p;
    if (yi > 0) term -= yd * std::log1p(r / mu);
    ll += term;

    const double l_r = s1 + log_p + (mu - yd) / rm;
    d_eta[i] = r * (yd - mu) / rm;
    g_rho += r * l_r;
    if (with_hessian) {
      const double l_rr = s2 + 1.0 / r - 1.0 / rm - (mu - yd) / (rm * rm);
      h_rho += r * r * l_rr + r * l_r;
      w_eta[i] = -r * mu * (r + yd) / (rm * rm);
      w_cross[i] = r * mu * (yd - mu) / (rm * rm);
    }
  }
  out.loglik = ll;
  out.gradient[0] = g_rho;
  out.gradient.tail(q) = X.values().transpose() * d_eta;
  if (with_hessian) {
    out.hessian.resize(q + 1, q + 1);
    out.hessian(0, 0) = h_rho;
    const Eigen::VectorXd cross = X.values().transpose() * w_cross;
    out.hessian.block(1, 0, q, 1) = cross;
    out.hessian.block(0, 1, 1, q) = cross.transpose();
    out.hessian.block(1, 1, q, q) = X.values().transpose() * (w_eta.asDiagonal() * X.values());
  }
  return out;
}

double nb_loglik(double r, const Eigen::Ref<const Eigen::VectorXd>& beta, const DesignMatrix& X, const Counts& y,
                 const Eigen::Ref<const Eigen::VectorXd>& exposure) {
  if (!(r > 0.0)) throw Error(ErrorCode::DomainError, "r must be positive");
  check_inputs(X, y, exposure, beta.size());
  const Eigen::VectorXd mu = (X.values() * beta).array().exp() * exposure.array();
  double ll = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) ll += nb_log_pmf(y[i], r, r / (r + mu[i]));
  return ll;
}

Eigen::VectorXd NegBinFit::mean(const DesignMatrix& X, const Eigen::Ref<const Eigen::VectorXd>& exposure) const {
  if (X.cols() != beta.size() || exposure.size() != X.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "design does not match the fitted model");
  }
  return ((X.values() * beta).array().exp() * exposure.array()).matrix();
}

NegBinFit nb_fit(const DesignMatrix& X, const Counts& y, const Eigen::Ref<const Eigen::VectorXd>& exposure,
                 const NbFitOptions& opts) {
  const Eigen::Index n = X.rows();
  const Eigen::Index q = X.cols();
  check_inputs(X, y, exposure, q);
  if (n <= q) throw Error(ErrorCode::InvalidArgument, "need more observations than coefficients");
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X.values());
    if (qr.rank() < q) throw Error(ErrorCode::RankDeficient, "design matrix is not of full column rank");
  }

  // Start: intercept at the pooled log rate, dispersion by moments.
  const Eigen::VectorXd yd = y.cast<double>();
  const double ybar = yd.mean();
  if (ybar <= 0.0) throw Error(ErrorCode::DomainError, "all counts are zero");
  const double s2 = (yd.array() - ybar).square().sum() / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
  double r0 = s2 > ybar ? ybar * ybar / (s2 - ybar) : 1e3;
  r0 = std::clamp(r0, 1e-3, 1e3);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(q + 1);
  x[0] = std::log(r0);
  x[1] = std::log(yd.sum() / exposure.sum());

  const Objective obj{X, y, exposure};
  NbDerivatives cur = obj.eval(x, true);
  auto f = -cur.loglik;
  Eigen::VectorXd g = -cur.gradient;

  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(q + 1, q + 1);
  auto reset_inverse = [&](const Eigen::MatrixXd& hess) {
    Eigen::LLT<Eigen::MatrixXd> llt(-hess);
    if (llt.info() == Eigen::Success) {
      Hinv = llt.solve(Eigen::MatrixXd::Identity(q + 1, q + 1));
    } else {
      Hinv = Eigen::MatrixXd::Identity(q + 1, q + 1) / std::max(1.0, g.norm());
    }
  };
  reset_inverse(cur.hessian);

  NegBinFit fit;
  fit.names = X.names();
  int it = 0;
  bool converged = max_abs(g) < opts.gradient_tol;
  for (; it < opts.max_iters && !converged; ++it) {
    Eigen::VectorXd dir = -Hinv * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      Hinv = Eigen::MatrixXd::Identity(q + 1, q + 1) / std::max(1.0, g.norm());
      dir = -Hinv * g;
      slope = g.dot(dir);
    }

    bool accepted = false;
    Eigen::VectorXd x_new;
    NbDerivatives trial;
    const double noise = 1e-12 * std::max(1.0, std::abs(f));
    double t = 1.0;
    for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
      x_new = x + t * dir;
      trial = obj.eval(x_new, false);
      const double f_new = -trial.loglik;
      if (!(std::isfinite(f_new) && trial.gradient.allFinite())) continue;
      if (f_new <= f + 1e-4 * t * slope && f - f_new > noise) {
        accepted = true;
        break;
      }
      // Within rounding of f the score is the only usable signal.
      if (std::abs(f_new - f) <= noise && max_abs(trial.gradient) < max_abs(g)) {
        accepted = true;
        break;
      }
    }

    if (!accepted) {
      // Objective differences are below rounding: switch to Newton steps judged by the
      // score norm, which still carries information this close to the optimum.
      const NbDerivatives here = obj.eval(x, true);
      Eigen::LLT<Eigen::MatrixXd> llt(-here.hessian);
      if (llt.info() != Eigen::Success) break;
      x_new = x + llt.solve(here.gradient);
      trial = obj.eval(x_new, false);
      if (!(trial.gradient.allFinite() && max_abs(trial.gradient) < max_abs(g))) break;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd g_new = -trial.gradient;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(q + 1, q + 1);
      Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
    }
    x = x_new;
    f = -trial.loglik;
    g = g_new;
    converged = max_abs(g) < opts.gradient_tol;
  }

  const NbDerivatives final_eval = obj.eval(x, true);
  fit.r = std::exp(x[0]);
  fit.beta = x.tail(q);
  fit.loglik = final_eval.loglik;
  fit.gradient_max_norm = max_abs(final_eval.gradient);
  fit.converged = converged;
  fit.iterations = it;

  const Eigen::MatrixXd info = -final_eval.hessian;
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() == Eigen::Success) {
    Eigen::MatrixXd full = llt.solve(Eigen::MatrixXd::Identity(q + 1, q + 1));
    Eigen::MatrixXd cov = full.bottomRightCorner(q, q);
    cov = 0.5 * (cov + cov.transpose());
    if ((cov.diagonal().array() > 0.0).all() && cov.allFinite()) fit.cov = std::move(cov);
  }
  return fit;
}

double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

WaldTable wald(const NegBinFit& fit) {
  if (!fit.cov) throw Error(ErrorCode::MissingCovariance, "fit has no covariance matrix");
  WaldTable table;
  for (Eigen::Index k = 0; k < fit.beta.size(); ++k) {
    WaldRow row;
    row.name = k < static_cast<Eigen::Index>(fit.names.size()) ? fit.names[k] : "b" + std::to_string(k);
    row.estimate = fit.beta[k];
    row.std_error = std::sqrt((*fit.cov)(k, k));
    row.z = row.estimate / row.std_error;
    row.p = two_sided_normal_p(row.z);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_coefficients_csv(const WaldTable& table, std::ostream& out) {
  out << "predictor,coefficient,std_error,z_value,p_value\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::fixed << std::setprecision(4);
  for (const auto& r : table.rows) {
    const bool quote = r.name.find_first_of(",\"") != std::string::npos;
    if (quote) {
      out << '"';
      for (char c : r.name) out << (c == '"' ? "\"\"" : std::string(1, c));
      out << '"';
    } else {
      out << r.name;
    }
    out << ',' << r.estimate << ',' << r.std_error << ',' << r.z << ',' << r.p << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

Composition backtransform_ilr_coeffs(const Eigen::Ref<const Eigen::VectorXd>& beta_ilr, const ContrastMatrix& basis) {
  if (beta_ilr.size() != basis.entries().rows()) {
    throw Error(ErrorCode::DimensionMismatch, "coefficient vector does not match the contrast matrix");
  }
  return clr_inv(basis.entries().transpose() * beta_ilr, 1.0);
}

CompositionalLinearFit fit_compositional_linear(const CompositionMatrix& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                                                const ContrastMatrix& basis) {
  if (y.size() != X.n()) throw Error(ErrorCode::DimensionMismatch, "response length differs from row count");
  if (X.n() <= X.d()) throw Error(ErrorCode::InvalidArgument, "need more observations than parts");
  const Eigen::MatrixXd coords = transform_matrix(X, LogratioMethod::ILR, &basis);
  Eigen::MatrixXd design(X.n(), coords.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(coords.cols()) = coords;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) throw Error(ErrorCode::RankDeficient, "ilr design is rank deficient");
  const Eigen::VectorXd coef = qr.solve(y);
  const double sse = (y - design * coef).squaredNorm();
  const Eigen::VectorXd beta_ilr = coef.tail(coords.cols());
  return CompositionalLinearFit{coef[0], beta_ilr, backtransform_ilr_coeffs(beta_ilr, basis), sse};
}

}  // namespace coda
