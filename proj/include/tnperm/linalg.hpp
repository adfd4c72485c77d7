#pragma once

#include <vector>

#include <Eigen/Dense>

namespace tnperm {

/// Singular values in non-increasing order, length min(rows, cols).
struct SingularSpectrum {
  std::vector<double> values;

  /// k-th largest (1-based); 0 when k exceeds the spectrum length.
  double sigma(int k) const;
  double max() const { return values.empty() ? 0.0 : values.front(); }
};

SingularSpectrum singular_values(const Eigen::MatrixXd& m);

double sigma_k(const Eigen::MatrixXd& m, int k);

/// Threshold rule for counting singular values as nonzero.
struct RankTolerance {
  enum class Kind { relative_eps, absolute, noise_floor };
  Kind kind = Kind::relative_eps;
  double value = 0.0;

  /// max(rows, cols) * eps * sigma_max
  static RankTolerance standard() { return {}; }
  static RankTolerance absolute_threshold(double t) { return {Kind::absolute, t}; }
  /// Standard rule plus sigma * (sqrt(rows) + sqrt(cols)), the typical top
  /// singular value of an i.i.d. N(0, sigma^2) matrix of that shape.
  static RankTolerance noise_floor(double sigma) { return {Kind::noise_floor, sigma}; }

  double threshold(const SingularSpectrum& s, Eigen::Index rows, Eigen::Index cols) const;
};

int numerical_rank(const SingularSpectrum& s, Eigen::Index rows, Eigen::Index cols,
                   RankTolerance tol = RankTolerance::standard());
int numerical_rank(const Eigen::MatrixXd& m, RankTolerance tol = RankTolerance::standard());

}  // namespace tnperm
