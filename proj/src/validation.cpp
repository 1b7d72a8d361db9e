#include "coda/validation.hpp"

#include "coda/error.hpp"
#include "coda/log.hpp"

#include <cmath>
#include <ostream>

namespace coda {

ObservedCounts observed_counts(const Counts& y, int m) {
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "m must be nonnegative");
  ObservedCounts out(static_cast<std::size_t>(m) + 1, 0);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] < 0) throw Error(ErrorCode::DomainError, "negative count");
    if (y[i] <= m) ++out[static_cast<std::size_t>(y[i])];
  }
  return out;
}

Eigen::VectorXd predicted_counts(double r, const Eigen::Ref<const Eigen::VectorXd>& mu, int m) {
  if (m < 0) throw Error(ErrorCode::InvalidArgument, "m must be nonnegative");
  if (!(r > 0.0)) throw Error(ErrorCode::DomainError, "r must be positive");
  // log Gamma(j + r) - log Gamma(r) - log j! depends on j only, since r is shared.
  Eigen::VectorXd log_coef(m + 1);
  const double lgr = std::lgamma(r);
  for (int j = 0; j <= m; ++j) {
    const double jj = static_cast<double>(j);
    log_coef[j] = std::lgamma(jj + r) - lgr - std::lgamma(jj + 1.0);
  }
  Eigen::VectorXd expected = Eigen::VectorXd::Zero(m + 1);
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (!(mu[i] > 0.0) || !std::isfinite(mu[i])) {
      throw Error(ErrorCode::DomainError, "fitted mean " + std::to_string(i) + " is not positive");
    }
    const double log_p = -std::log1p(mu[i] / r);   // log(r / (r + mu))
    const double log_q = -std::log1p(r / mu[i]);   // log(mu / (r + mu))
    for (int j = 0; j <= m; ++j) {
      expected[j] += std::exp(log_coef[j] + r * log_p + static_cast<double>(j) * log_q);
    }
  }
  return expected;
}

Eigen::VectorXd predicted_counts(const NegBinFit& fit, const DesignMatrix& X,
                                 const Eigen::Ref<const Eigen::VectorXd>& exposure, int m) {
  return predicted_counts(fit.r, fit.mean(X, exposure), m);
}

PearsonStatistic pearson_chisq(const ObservedCounts& observed, const Eigen::Ref<const Eigen::VectorXd>& expected) {
  if (static_cast<Eigen::Index>(observed.size()) != expected.size()) {
    throw Error(ErrorCode::DimensionMismatch, "observed and expected lengths differ");
  }
  PearsonStatistic out;
  for (std::size_t j = 0; j < observed.size(); ++j) {
    const double e = expected[static_cast<Eigen::Index>(j)];
    if (!(e >= kMinExpected)) {
      ++out.skipped;
      continue;
    }
    const double diff = static_cast<double>(observed[j]) - e;
    out.value += diff * diff / e;
  }
  if (out.skipped == observed.size()) {
    throw Error(ErrorCode::AllZeroExpected, "every expected frequency is zero");
  }
  return out;
}

std::vector<std::pair<double, double>> scatter_data(const ObservedCounts& observed,
                                                    const Eigen::Ref<const Eigen::VectorXd>& expected) {
  if (static_cast<Eigen::Index>(observed.size()) != expected.size()) {
    throw Error(ErrorCode::DimensionMismatch, "observed and expected lengths differ");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(observed.size());
  for (std::size_t j = 0; j < observed.size(); ++j) {
    out.emplace_back(std::log1p(static_cast<double>(observed[j])),
                     std::log1p(expected[static_cast<Eigen::Index>(j)]));
  }
  return out;
}

ChiSquareReport chi_square_report(const NegBinFit& fit, const DesignMatrix& X, const Counts& y,
                                  const Eigen::Ref<const Eigen::VectorXd>& exposure, int m) {
  ChiSquareReport rep;
  rep.m = m;
  rep.n = y.size();
  rep.observed = observed_counts(y, m);
  rep.expected = predicted_counts(fit, X, exposure, m);
  const PearsonStatistic stat = pearson_chisq(rep.observed, rep.expected);
  rep.statistic = stat.value;
  rep.skipped_terms = stat.skipped;
  if (stat.skipped > 0) {
    log::warn(std::to_string(stat.skipped) + " expected frequencies below " + std::to_string(kMinExpected) +
              " left out of the chi-square statistic");
  }
  rep.scatter = scatter_data(rep.observed, rep.expected);
  return rep;
}

void write_scatter_csv(const ChiSquareReport& report, std::ostream& out) {
  const auto prec = out.precision(17);
  out << "j,log1p_observed,log1p_expected\n";
  for (std::size_t j = 0; j < report.scatter.size(); ++j) {
    out << j << ',' << report.scatter[j].first << ',' << report.scatter[j].second << '\n';
  }
  out.precision(prec);
}

}  // namespace coda
