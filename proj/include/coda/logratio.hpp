#pragma once

#include "coda/compdata.hpp"

#include <Eigen/Dense>

#include <memory>
#include <optional>

namespace coda {

enum class LogratioMethod { CLR, ALR, ILR };

/// (d-1) x d matrix with orthonormal rows spanning the clr hyperplane:
/// R R^T = I_{d-1} and R^T R = I_d - (1/d) 1 1^T.
class ContrastMatrix {
 public:
  static constexpr double kTolerance = 1e-10;

  /// Validates both orthonormality conditions; throws InvalidArgument otherwise.
  explicit ContrastMatrix(Eigen::MatrixXd entries);

  /// Normalized Helmert basis: row k is (1,...,1,-k,0,...,0)/sqrt(k(k+1)) with k ones.
  /// The first nonzero entry of every row is positive.
  static ContrastMatrix helmert(Eigen::Index d);

  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  Eigen::Index parts() const noexcept { return entries_.cols(); }

 private:
  Eigen::MatrixXd entries_;
};

/// Coordinates of a composition in logratio space, tagged with the transform used.
struct LogratioVector {
  Eigen::VectorXd coords;
  LogratioMethod method = LogratioMethod::CLR;
  Eigen::Index parts = 0;
  std::shared_ptr<const ContrastMatrix> basis;  // ILR only
};

/// log(x) - mean(log x).
LogratioVector clr(const Composition& x);
Composition clr_inv(const LogratioVector& z, double kappa = 1.0);
/// CLR inverse on raw coordinates; the maximum is subtracted before exponentiation.
Composition clr_inv(const Eigen::Ref<const Eigen::VectorXd>& z, double kappa = 1.0);

/// log(x_j / x_ref) for every j != ref, in component order. ref_index is 0-based and
/// defaults to the last part.
LogratioVector alr(const Composition& x, std::optional<Eigen::Index> ref_index = std::nullopt);

ContrastMatrix contrast_matrix(Eigen::Index d);

LogratioVector ilr(const Composition& x, std::shared_ptr<const ContrastMatrix> basis);
Composition ilr_inv(const LogratioVector& z, const ContrastMatrix& basis, double kappa = 1.0);

/// Row i of the result is the transform of row i of X. ILR requires a basis.
Eigen::MatrixXd transform_matrix(const CompositionMatrix& X, LogratioMethod method,
                                 const ContrastMatrix* basis = nullptr);

}  // namespace coda
