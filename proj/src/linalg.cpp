#include "tnperm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>
#include <fmt/format.h>

#include "tnperm/errors.hpp"

namespace tnperm {

double SingularSpectrum::sigma(int k) const {
  if (k < 1) throw DomainError(fmt::format("singular value index k = {} must be >= 1", k));
  return static_cast<std::size_t>(k) > values.size() ? 0.0 : values[static_cast<std::size_t>(k - 1)];
}

SingularSpectrum singular_values(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw DomainError("matrix has non-finite entries");
  SingularSpectrum out;
  if (m.size() == 0) return out;
  // Two-sided Jacobi: high relative accuracy, and the probe matrices are small.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  out.values.assign(sv.data(), sv.data() + sv.size());
  std::sort(out.values.begin(), out.values.end(), std::greater<>());
  return out;
}

double sigma_k(const Eigen::MatrixXd& m, int k) {
  if (k < 1) throw DomainError(fmt::format("singular value index k = {} must be >= 1", k));
  if (k > std::min(m.rows(), m.cols())) return 0.0;
  return singular_values(m).sigma(k);
}

double RankTolerance::threshold(const SingularSpectrum& s, Eigen::Index rows, Eigen::Index cols) const {
  if (kind == Kind::absolute) return value;
  const double eps_rule = static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon() * s.max();
  if (kind == Kind::relative_eps) return eps_rule;
  return eps_rule + value * (std::sqrt(static_cast<double>(rows)) + std::sqrt(static_cast<double>(cols)));
}

int numerical_rank(const SingularSpectrum& s, Eigen::Index rows, Eigen::Index cols, RankTolerance tol) {
  const double t = tol.threshold(s, rows, cols);
  return static_cast<int>(std::count_if(s.values.begin(), s.values.end(), [t](double v) { return v > t; }));
}

int numerical_rank(const Eigen::MatrixXd& m, RankTolerance tol) {
  return numerical_rank(singular_values(m), m.rows(), m.cols(), tol);
}

}  // namespace tnperm
