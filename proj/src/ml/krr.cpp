#include <cmath>

#include <Eigen/Cholesky>

#include "qkm/error.hpp"
#include "qkm/ml.hpp"
#include "qkm/simd.hpp"

namespace qkm::ml {

KRRModel krr_fit(const Eigen::MatrixXd& K, std::span<const double> y, double ridge, double jitter) {
  const auto n = static_cast<Eigen::Index>(y.size());
  if (n == 0) throw ContractViolation("krr_fit: empty training set");
  if (K.rows() != n || K.cols() != n) throw ContractViolation("krr_fit: Gram matrix must be n x n");
  if (!(ridge > 0) || !(jitter >= 0)) throw ContractViolation("krr_fit: need ridge > 0 and jitter >= 0");

  Eigen::MatrixXd A = K;
  A.diagonal().array() += ridge + jitter;
  const Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw SolveError("krr_fit: K + (ridge + jitter) I is not positive definite at jitter " + std::to_string(jitter) +
                     "; increase the jitter");
  }
  const Eigen::Map<const Eigen::VectorXd> rhs(y.data(), n);
  Eigen::VectorXd beta = llt.solve(rhs);
  beta += llt.solve(rhs - A * beta);

  const double scale = rhs.norm() > 0 ? rhs.norm() : 1.0;
  const double residual = (A * beta - rhs).norm() / scale;
  if (!(residual <= 1e-10)) {
    throw SolveError("krr_fit: relative residual " + std::to_string(residual) + " above 1e-10; increase the jitter");
  }
  KRRModel model;
  model.coeffs.assign(beta.data(), beta.data() + n);
  model.ridge = ridge;
  model.jitter = jitter;
  model.residual = residual;
  return model;
}

KRRModel krr_fit_escalating(const Eigen::MatrixXd& K, std::span<const double> y, double ridge, double jitter,
                            double jitter_max) {
  for (double j = jitter;; j *= 10.0) {
    try {
      return krr_fit(K, y, ridge, j);
    } catch (const SolveError&) {
      if (j * 10.0 > jitter_max * (1.0 + 1e-12) || j <= 0.0) throw;
    }
  }
}

double krr_predict(const KRRModel& model, std::span<const double> k_row) {
  if (k_row.size() != model.coeffs.size()) throw ContractViolation("krr_predict: kernel row length mismatch");
  return simd::dot(model.coeffs, k_row);
}

Eigen::MatrixXd rbf_cross(const FeatureMatrix& rows, const FeatureMatrix& cols, double gamma) {
  if (!(gamma > 0)) throw ContractViolation("rbf: gamma must be positive");
  if (rows.cols() != cols.cols()) throw ContractViolation("rbf: feature dimensions differ");
  const auto dim = static_cast<std::size_t>(rows.cols());
  Eigen::MatrixXd out(rows.rows(), cols.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const std::span<const double> u(rows.row(i).data(), dim);
    for (Eigen::Index j = 0; j < cols.rows(); ++j) {
      out(i, j) = std::exp(-gamma * simd::squared_distance(u, std::span<const double>(cols.row(j).data(), dim)));
    }
  }
  return out;
}

Eigen::MatrixXd rbf_gram(const FeatureMatrix& features, double gamma) {
  Eigen::MatrixXd K = rbf_cross(features, features, gamma);
  K = (0.5 * (K + K.transpose())).eval();
  K.diagonal().setOnes();
  return K;
}

}  // namespace qkm::ml
