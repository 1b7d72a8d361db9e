#pragma once

// Seeded generators shared by the property tests.

#include <Eigen/Dense>

#include <random>

namespace coda::testing {

inline Eigen::VectorXd random_parts(std::mt19937_64& rng, Eigen::Index d, double spread = 3.0) {
  std::normal_distribution<double> normal(0.0, spread);
  Eigen::VectorXd v(d);
  for (Eigen::Index j = 0; j < d; ++j) v[j] = std::exp(normal(rng));
  return v / v.sum();
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = normal(rng);
  return m;
}

/// Random l x d matrix with orthonormal rows.
inline Eigen::MatrixXd random_orthonormal_rows(std::mt19937_64& rng, Eigen::Index l, Eigen::Index d) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, d, l));
  return (qr.householderQ() * Eigen::MatrixXd::Identity(d, l)).transpose();
}

}  // namespace coda::testing
