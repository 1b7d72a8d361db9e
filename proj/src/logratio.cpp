#include "coda/logratio.hpp"

#include "coda/error.hpp"

#include <cmath>
#include <sstream>

namespace coda {
namespace {

Eigen::VectorXd centered_log(const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd lx = x.array().log().matrix();
  lx.array() -= lx.mean();
  return lx;
}

}  // namespace

ContrastMatrix::ContrastMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  const Eigen::Index d = entries_.cols();
  if (d < 2 || entries_.rows() != d - 1) {
    throw Error(ErrorCode::InvalidArgument, "contrast matrix must be (d-1) x d with d >= 2");
  }
  const Eigen::MatrixXd gram = entries_ * entries_.transpose();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d - 1, d - 1);
  const Eigen::MatrixXd proj = entries_.transpose() * entries_;
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(d, d) - Eigen::MatrixXd::Constant(d, d, 1.0 / static_cast<double>(d));
  const double e1 = (gram - identity).cwiseAbs().maxCoeff();
  const double e2 = (proj - centering).cwiseAbs().maxCoeff();
  if (e1 > kTolerance || e2 > kTolerance) {
    std::ostringstream os;
    os << "rows are not an orthonormal basis of the clr hyperplane (|RR'-I| = " << e1
       << ", |R'R-Mc| = " << e2 << ")";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

ContrastMatrix ContrastMatrix::helmert(Eigen::Index d) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "contrast matrix needs d >= 2");
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(d - 1, d);
  for (Eigen::Index k = 1; k < d; ++k) {
    const double kk = static_cast<double>(k);
    const double scale = 1.0 / std::sqrt(kk * (kk + 1.0));
    r.row(k - 1).head(k).setConstant(scale);
    r(k - 1, k) = -kk * scale;
  }
  return ContrastMatrix(std::move(r));
}

ContrastMatrix contrast_matrix(Eigen::Index d) { return ContrastMatrix::helmert(d); }

LogratioVector clr(const Composition& x) {
  return LogratioVector{centered_log(x.values()), LogratioMethod::CLR, x.size(), nullptr};
}

Composition clr_inv(const Eigen::Ref<const Eigen::VectorXd>& z, double kappa) {
  if (z.size() < 2) throw Error(ErrorCode::DimensionMismatch, "clr vector needs at least 2 coords");
  Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp().matrix();
  e *= kappa / e.sum();
  return Composition(std::move(e), kappa);
}

Composition clr_inv(const LogratioVector& z, double kappa) {
  if (z.method != LogratioMethod::CLR) {
    throw Error(ErrorCode::WrongMethod, "clr_inv expects CLR coordinates");
  }
  return clr_inv(z.coords, kappa);
}

LogratioVector alr(const Composition& x, std::optional<Eigen::Index> ref_index) {
  const Eigen::Index d = x.size();
  const Eigen::Index ref = ref_index.value_or(d - 1);
  if (ref < 0 || ref >= d) {
    throw Error(ErrorCode::IndexOutOfRange, "reference index " + std::to_string(ref) +
                                                " outside [0, " + std::to_string(d) + ")");
  }
  Eigen::VectorXd coords(d - 1);
  const double log_ref = std::log(x[ref]);
  for (Eigen::Index j = 0, k = 0; j < d; ++j) {
    if (j == ref) continue;
    coords[k++] = std::log(x[j]) - log_ref;
  }
  return LogratioVector{std::move(coords), LogratioMethod::ALR, d, nullptr};
}

LogratioVector ilr(const Composition& x, std::shared_ptr<const ContrastMatrix> basis) {
  if (!basis) throw Error(ErrorCode::InvalidArgument, "ilr requires a contrast matrix");
  if (basis->parts() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "contrast matrix has " +
                                                  std::to_string(basis->parts()) +
                                                  " columns, composition has " +
                                                  std::to_string(x.size()) + " parts");
  }
  Eigen::VectorXd coords = basis->entries() * centered_log(x.values());
  return LogratioVector{std::move(coords), LogratioMethod::ILR, x.size(), std::move(basis)};
}

Composition ilr_inv(const LogratioVector& z, const ContrastMatrix& basis, double kappa) {
  if (z.method != LogratioMethod::ILR) {
    throw Error(ErrorCode::WrongMethod, "ilr_inv expects ILR coordinates");
  }
  if (z.coords.size() != basis.entries().rows()) {
    throw Error(ErrorCode::DimensionMismatch, "ilr coordinates do not match the contrast matrix");
  }
  return clr_inv(basis.entries().transpose() * z.coords, kappa);
}

Eigen::MatrixXd transform_matrix(const CompositionMatrix& X, LogratioMethod method,
                                 const ContrastMatrix* basis) {
  const Eigen::Index d = X.d();
  if (method == LogratioMethod::ILR) {
    if (basis == nullptr) throw Error(ErrorCode::InvalidArgument, "ILR requires a contrast matrix");
    if (basis->parts() != d) {
      throw Error(ErrorCode::DimensionMismatch, "contrast matrix does not match composition width");
    }
  } else if (basis != nullptr) {
    throw Error(ErrorCode::InvalidArgument, "a contrast matrix is only used by ILR");
  }

  Eigen::MatrixXd logs = X.rows().array().log().matrix();
  switch (method) {
    case LogratioMethod::CLR: {
      const Eigen::VectorXd means = logs.rowwise().mean();
      logs.colwise() -= means;
      return logs;
    }
    case LogratioMethod::ALR: {
      Eigen::MatrixXd out = logs.leftCols(d - 1);
      out.colwise() -= logs.col(d - 1);
      return out;
    }
    case LogratioMethod::ILR: {
      const Eigen::VectorXd means = logs.rowwise().mean();
      logs.colwise() -= means;
      return logs * basis->entries().transpose();
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown logratio method");
}

}  // namespace coda
