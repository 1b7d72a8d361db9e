#pragma once

// Negative binomial regression with a multiplicative exposure:
//   y_i ~ NB(r, p_i),  mu_i = r (1 - p_i) / p_i = E_i exp(x_i' beta).

#include "coda/compdata.hpp"
#include "coda/logratio.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace coda {

using Counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// n x q predictors, intercept column first. No other column may be constant and no
/// two columns may be identical.
class DesignMatrix {
 public:
  DesignMatrix(Eigen::MatrixXd values, std::vector<std::string> names);

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
};

/// Probability of j failures before the r-th success, Gamma-generalized for real r.
double nb_pmf(std::int64_t j, double r, double p);
double nb_log_pmf(std::int64_t j, double r, double p);

struct MeanVariance {
  double mean;
  double variance;
};
MeanVariance nb_mean_var(double r, double p);

/// Sum_i log pmf(y_i; r, p_i) with p_i = r / (r + mu_i).
double nb_loglik(double r, const Eigen::Ref<const Eigen::VectorXd>& beta, const DesignMatrix& X,
                 const Counts& y, const Eigen::Ref<const Eigen::VectorXd>& exposure);

/// Log-likelihood with its gradient (and optionally Hessian) in the
/// unconstrained parameters (log r, beta).
struct NbDerivatives {
  double loglik = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};
NbDerivatives nb_derivatives(double log_r, const Eigen::Ref<const Eigen::VectorXd>& beta,
                             const DesignMatrix& X, const Counts& y,
                             const Eigen::Ref<const Eigen::VectorXd>& exposure, bool with_hessian);

struct NbFitOptions {
  int max_iters = 500;
  double gradient_tol = 1e-8;  ///< max |d loglik / d(log r, beta)| at convergence
};

struct NegBinFit {
  double r = 1.0;
  Eigen::VectorXd beta;
  /// Inverse observed information for beta; empty when the Hessian was singular.
  std::optional<Eigen::MatrixXd> cov;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_max_norm = 0.0;
  std::vector<std::string> names;

  /// mu_i = E_i exp(x_i' beta) for a design with the fitted column layout.
  Eigen::VectorXd mean(const DesignMatrix& X, const Eigen::Ref<const Eigen::VectorXd>& exposure) const;
};

/// Maximum likelihood over (log r, beta) by BFGS with the analytic score.
NegBinFit nb_fit(const DesignMatrix& X, const Counts& y, const Eigen::Ref<const Eigen::VectorXd>& exposure,
                 const NbFitOptions& opts = {});

struct WaldRow {
  std::string name;
  double estimate;
  double std_error;
  double z;
  double p;
};

struct WaldTable {
  std::vector<WaldRow> rows;
};

/// Two-sided standard-normal p value for a z statistic.
double two_sided_normal_p(double z);

WaldTable wald(const NegBinFit& fit);

/// "predictor,coefficient,std_error,z_value,p_value" with 4 decimal places.
void write_coefficients_csv(const WaldTable& table, std::ostream& out);

/// clr_inv(R^T beta_ilr) on the unit simplex.
Composition backtransform_ilr_coeffs(const Eigen::Ref<const Eigen::VectorXd>& beta_ilr, const ContrastMatrix& basis);

struct CompositionalLinearFit {
  double intercept;
  Eigen::VectorXd beta_ilr;
  Composition beta_comp;
  double sse;
};

/// Least squares of y on an intercept plus ilr(x_i).
CompositionalLinearFit fit_compositional_linear(const CompositionMatrix& X,
                                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                                const ContrastMatrix& basis);

}  // namespace coda
