#pragma once

// Pearson chi-square goodness of fit over the distribution of counts.

#include "coda/nbglm.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

namespace coda {

inline constexpr int kDefaultMaxCount = 99;
/// Expected frequencies below this are left out of the statistic.
inline constexpr double kMinExpected = 1e-12;

using ObservedCounts = std::vector<std::int64_t>;

/// O_j = #{i : y_i = j}, j = 0..m. Counts above m are not tallied.
ObservedCounts observed_counts(const Counts& y, int m = kDefaultMaxCount);

/// E_j = sum_i pmf(j; r, r / (r + mu_i)), j = 0..m.
Eigen::VectorXd predicted_counts(double r, const Eigen::Ref<const Eigen::VectorXd>& mu, int m = kDefaultMaxCount);
Eigen::VectorXd predicted_counts(const NegBinFit& fit, const DesignMatrix& X,
                                 const Eigen::Ref<const Eigen::VectorXd>& exposure, int m = kDefaultMaxCount);

struct PearsonStatistic {
  double value = 0.0;
  std::size_t skipped = 0;  ///< terms with E_j < kMinExpected
};

/// sum_j (O_j - E_j)^2 / E_j. Throws AllZeroExpected when every term is skipped.
PearsonStatistic pearson_chisq(const ObservedCounts& observed, const Eigen::Ref<const Eigen::VectorXd>& expected);

/// (log(1 + O_j), log(1 + E_j)) for every j.
std::vector<std::pair<double, double>> scatter_data(const ObservedCounts& observed,
                                                    const Eigen::Ref<const Eigen::VectorXd>& expected);

struct ChiSquareReport {
  int m = kDefaultMaxCount;
  std::int64_t n = 0;
  ObservedCounts observed;
  Eigen::VectorXd expected;
  double statistic = 0.0;
  std::size_t skipped_terms = 0;
  std::vector<std::pair<double, double>> scatter;
};

ChiSquareReport chi_square_report(const NegBinFit& fit, const DesignMatrix& X, const Counts& y,
                                  const Eigen::Ref<const Eigen::VectorXd>& exposure, int m = kDefaultMaxCount);

/// "j,log1p_observed,log1p_expected" rows.
void write_scatter_csv(const ChiSquareReport& report, std::ostream& out);

}  // namespace coda
