#pragma once

// Bregman divergences, PCA on clr coordinates and exponential-family PCA.
//
// Data matrices follow the d x n convention: each column is one observation.
// A factorization approximates the centered data Zc = Z - center 1^T by
// Theta = V^T A with V (l x d, orthonormal rows) and A (l x n).

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

namespace coda {

enum class BregmanKind {
  SquaredNorm,  ///< phi(x) = 0.5 |x|^2
  ExpSum,       ///< phi(x) = sum_j exp(x_j)
};

/// D_phi(x, y) = phi(x) - phi(y) - (x - y)^T grad phi(y).
double bregman(BregmanKind kind, const Eigen::Ref<const Eigen::VectorXd>& x,
               const Eigen::Ref<const Eigen::VectorXd>& y);

/// Exponent arguments are clamped to this range before exp().
inline constexpr double kExpClamp = 30.0;

enum class FactorizationMethod { PCA, EPCA };

struct IterationRecord {
  int iteration = 0;
  double loss = 0.0;
  double step_size = 0.0;  ///< mean accepted line-search step over all blocks
};

struct FactorizationResult {
  FactorizationMethod method = FactorizationMethod::PCA;
  BregmanKind divergence = BregmanKind::SquaredNorm;
  Eigen::MatrixXd loadings;         ///< V, l x d
  Eigen::MatrixXd scores;           ///< A, l x n
  Eigen::VectorXd center;           ///< subtracted from every column before fitting
  Eigen::VectorXd singular_values;  ///< PCA only, descending, all min(d, n) of them
  std::vector<IterationRecord> trace;
  bool converged = true;
  int iterations = 0;
  std::size_t clamp_count = 0;

  Eigen::Index components() const noexcept { return loadings.rows(); }
  /// Theta = V^T A (centered scale).
  Eigen::MatrixXd natural_parameters() const { return loadings.transpose() * scores; }
  std::vector<double> loss_trace() const;
};

/// PCA of the column-centered Z by SVD. Requires 1 <= l <= min(d-1, n).
/// Throws RankDeficient when fewer than l singular values are positive.
FactorizationResult pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& Z, Eigen::Index l);

/// sigma_k^2 / sum sigma^2 for every singular value. Throws WrongMethod on EPCA results.
Eigen::VectorXd variance_explained(const FactorizationResult& res);

/// Sum over all cells of D_exp(Z, V^T A). If clamp_count is given it is incremented
/// once per clamped exponent.
double epca_loss(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                 const Eigen::Ref<const Eigen::MatrixXd>& A,
                 const Eigen::Ref<const Eigen::MatrixXd>& V, std::size_t* clamp_count = nullptr);

/// Gradient of epca_loss with respect to A (l x n) and V (l x d).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> epca_gradient(const Eigen::Ref<const Eigen::MatrixXd>& Z,
                                                          const Eigen::Ref<const Eigen::MatrixXd>& A,
                                                          const Eigen::Ref<const Eigen::MatrixXd>& V);

struct LineSearchOptions {
  double initial_step = 1.0;
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 60;
};

enum class EpcaInit { FromPca, Given };

struct EpcaOptions {
  int max_iters = 500;
  double rel_tol = 1e-6;
  LineSearchOptions line_search;
  EpcaInit init = EpcaInit::FromPca;
  /// Starting V (l x d) when init == Given; orthonormalized before use.
  Eigen::MatrixXd initial_loadings;
  /// Divergence being minimized; ExpSum is EPCA, SquaredNorm reduces to PCA.
  BregmanKind divergence = BregmanKind::ExpSum;
  /// After each sweep, try a longer step along the change from the previous sweep;
  /// kept only when it lowers the loss.
  bool extrapolate = true;

  void validate() const;
};

/// Alternating minimization of sum D(Zc, V^T A) subject to V V^T = I.
/// Rows of the returned V are ordered by descending score variance and each row's
/// largest-magnitude entry is positive. converged == false when rel_tol was not
/// met within max_iters; the trace is returned either way.
FactorizationResult bregman_pca_fit(const Eigen::Ref<const Eigen::MatrixXd>& Z, Eigen::Index l,
                                    const EpcaOptions& opts);

/// bregman_pca_fit with the exponential divergence.
FactorizationResult epca_fit(const Eigen::Ref<const Eigen::MatrixXd>& Z, Eigen::Index l,
                             EpcaOptions opts = {});

/// Writes "iteration,loss,step_size" rows.
void write_loss_trace_csv(const FactorizationResult& res, std::ostream& out);

}  // namespace coda
