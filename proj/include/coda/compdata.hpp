#pragma once

// Simplex-valued types and the Aitchison-geometry primitives the transforms
// are built on. Everything here is immutable after construction.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace coda {

/// Relative tolerance on sum(values) == kappa when constructing compositions.
inline constexpr double kClosureTolerance = 1e-9;

/// A strictly positive d-vector (d >= 2) whose parts sum to kappa.
class Composition {
 public:
  /// Validates positivity, d >= 2 and closure; throws Error otherwise.
  explicit Composition(Eigen::VectorXd values, double kappa = 1.0);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  double kappa() const noexcept { return kappa_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index j) const { return values_[j]; }

 private:
  Eigen::VectorXd values_;
  double kappa_;
};

/// n compositions stored row-wise (n x d) sharing d and kappa.
class CompositionMatrix {
 public:
  CompositionMatrix(Eigen::MatrixXd rows, double kappa = 1.0);
  static CompositionMatrix from_rows(const std::vector<Composition>& rows);

  const Eigen::MatrixXd& rows() const noexcept { return rows_; }
  Eigen::Index n() const noexcept { return rows_.rows(); }
  Eigen::Index d() const noexcept { return rows_.cols(); }
  double kappa() const noexcept { return kappa_; }
  Composition row(Eigen::Index i) const;

 private:
  Eigen::MatrixXd rows_;
  double kappa_;
};

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Labelled contingency table of nonnegative counts.
class CountTable {
 public:
  CountTable(CountMatrix cells, std::vector<std::string> row_labels,
             std::vector<std::string> column_labels);

  const CountMatrix& cells() const noexcept { return cells_; }
  const std::vector<std::string>& row_labels() const noexcept { return row_labels_; }
  const std::vector<std::string>& column_labels() const noexcept { return column_labels_; }

 private:
  CountMatrix cells_;
  std::vector<std::string> row_labels_;
  std::vector<std::string> column_labels_;
};

/// kappa * v / sum(v). Throws ZeroComponent / AllZero.
Composition close(const Eigen::Ref<const Eigen::VectorXd>& v, double kappa = 1.0);

/// Zero entries become delta; the result is not re-closed.
/// Warns when delta is not below the smallest positive entry.
Eigen::VectorXd replace_zeros(const Eigen::Ref<const Eigen::VectorXd>& v, double delta);

double geometric_mean(const Composition& x);

/// <clr(x), clr(y)>.
double aitchison_inner(const Composition& x, const Composition& y);

Eigen::MatrixXd row_proportions(const CountTable& t);

/// One output row per group, in the order given; each group lists row labels.
using RowGrouping = std::vector<std::pair<std::string, std::vector<std::string>>>;
CountTable amalgamate(const CountTable& t, const RowGrouping& groups);

}  // namespace coda
