#include "coda/compdata.hpp"

#include "coda/error.hpp"
#include "coda/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace coda {
namespace {

void validate_parts(const Eigen::Ref<const Eigen::VectorXd>& v, double kappa) {
  if (v.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "composition needs at least 2 parts");
  }
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw Error(ErrorCode::InvalidArgument, "closure constant must be positive");
  }
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (!(v[j] > 0.0) || !std::isfinite(v[j])) {
      std::ostringstream os;
      os << "part " << j << " is " << v[j] << " (must be strictly positive)";
      throw Error(ErrorCode::ZeroComponent, os.str());
    }
  }
  const double sum = v.sum();
  if (std::abs(sum - kappa) > kClosureTolerance * kappa) {
    std::ostringstream os;
    os.precision(17);
    os << "parts sum to " << sum << ", expected " << kappa;
    throw Error(ErrorCode::ClosureViolation, os.str());
  }
}

}  // namespace

Composition::Composition(Eigen::VectorXd values, double kappa)
    : values_(std::move(values)), kappa_(kappa) {
  validate_parts(values_, kappa_);
}

CompositionMatrix::CompositionMatrix(Eigen::MatrixXd rows, double kappa)
    : rows_(std::move(rows)), kappa_(kappa) {
  if (rows_.rows() < 1) {
    throw Error(ErrorCode::InvalidArgument, "composition matrix needs at least one row");
  }
  for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
    try {
      validate_parts(rows_.row(i).transpose(), kappa_);
    } catch (const Error& e) {
      throw Error(e.code(), "row " + std::to_string(i) + ": " + e.what());
    }
  }
}

CompositionMatrix CompositionMatrix::from_rows(const std::vector<Composition>& rows) {
  if (rows.empty()) {
    throw Error(ErrorCode::InvalidArgument, "composition matrix needs at least one row");
  }
  const Eigen::Index d = rows.front().size();
  const double kappa = rows.front().kappa();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) {
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(i) + " has a different d");
    }
    if (rows[i].kappa() != kappa) {
      throw Error(ErrorCode::InvalidArgument, "row " + std::to_string(i) + " has a different kappa");
    }
    m.row(static_cast<Eigen::Index>(i)) = rows[i].values().transpose();
  }
  return CompositionMatrix(std::move(m), kappa);
}

Composition CompositionMatrix::row(Eigen::Index i) const {
  return Composition(rows_.row(i).transpose(), kappa_);
}

CountTable::CountTable(CountMatrix cells, std::vector<std::string> row_labels,
                       std::vector<std::string> column_labels)
    : cells_(std::move(cells)),
      row_labels_(std::move(row_labels)),
      column_labels_(std::move(column_labels)) {
  if (static_cast<Eigen::Index>(row_labels_.size()) != cells_.rows() ||
      static_cast<Eigen::Index>(column_labels_.size()) != cells_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "label counts do not match the cell matrix");
  }
  for (Eigen::Index i = 0; i < cells_.rows(); ++i) {
    if ((cells_.row(i).array() < 0).any()) {
      throw Error(ErrorCode::InvalidArgument, "negative count in row '" + row_labels_[i] + "'");
    }
    if (cells_.row(i).sum() == 0) {
      throw Error(ErrorCode::EmptyRow, "row '" + row_labels_[i] + "' has no positive cell");
    }
  }
}

Composition close(const Eigen::Ref<const Eigen::VectorXd>& v, double kappa) {
  if (v.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "composition needs at least 2 parts");
  }
  if ((v.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "negative part");
  }
  const double sum = v.sum();
  if (sum == 0.0) throw Error(ErrorCode::AllZero, "all parts are zero");
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v[j] == 0.0) {
      throw Error(ErrorCode::ZeroComponent,
                  "part " + std::to_string(j) + " is zero; apply replace_zeros first");
    }
  }
  Eigen::VectorXd closed = v * (kappa / sum);
  return Composition(std::move(closed), kappa);
}

Eigen::VectorXd replace_zeros(const Eigen::Ref<const Eigen::VectorXd>& v, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  Eigen::VectorXd out = v;
  double min_positive = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    if (out[j] == 0.0) {
      out[j] = delta;
    } else {
      min_positive = std::min(min_positive, out[j]);
    }
  }
  if (delta >= min_positive) {
    std::ostringstream os;
    os << "replacement value " << delta << " is not below the smallest positive part "
       << min_positive;
    log::warn(os.str());
  }
  return out;
}

double geometric_mean(const Composition& x) {
  return std::exp(x.values().array().log().mean());
}

double aitchison_inner(const Composition& x, const Composition& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch, "compositions have different lengths");
  }
  const Eigen::ArrayXd lx = x.values().array().log();
  const Eigen::ArrayXd ly = y.values().array().log();
  return ((lx - lx.mean()) * (ly - ly.mean())).sum();
}

Eigen::MatrixXd row_proportions(const CountTable& t) {
  const auto& c = t.cells();
  Eigen::MatrixXd out(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    const auto total = c.row(i).sum();
    if (total == 0) throw Error(ErrorCode::EmptyRow, "row '" + t.row_labels()[i] + "' is empty");
    out.row(i) = c.row(i).cast<double>() / static_cast<double>(total);
  }
  return out;
}

CountTable amalgamate(const CountTable& t, const RowGrouping& groups) {
  std::map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < t.row_labels().size(); ++i) {
    index.emplace(t.row_labels()[i], static_cast<Eigen::Index>(i));
  }
  std::vector<int> used(t.row_labels().size(), 0);

  CountMatrix cells = CountMatrix::Zero(static_cast<Eigen::Index>(groups.size()), t.cells().cols());
  std::vector<std::string> labels;
  labels.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    labels.push_back(groups[g].first);
    for (const auto& member : groups[g].second) {
      auto it = index.find(member);
      if (it == index.end()) throw Error(ErrorCode::UnknownLabel, "no row labelled '" + member + "'");
      if (used[static_cast<std::size_t>(it->second)]++ > 0) {
        throw Error(ErrorCode::InvalidArgument, "row '" + member + "' appears in two groups");
      }
      cells.row(static_cast<Eigen::Index>(g)) += t.cells().row(it->second);
    }
  }
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (used[i] == 0) {
      throw Error(ErrorCode::InvalidArgument, "row '" + t.row_labels()[i] + "' is not in any group");
    }
  }
  return CountTable(std::move(cells), std::move(labels), t.column_labels());
}

}  // namespace coda
