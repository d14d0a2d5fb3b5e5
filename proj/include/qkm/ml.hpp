#pragma once

// Regression on precomputed Gram matrices: epsilon-SVR (SMO on the dual), kernel ridge
// regression, the classical RBF baseline, seeded splits and k-fold grid search.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qkm::ml {

using Index = std::size_t;
/// One sample per row, stored row-major so each feature vector is contiguous.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// ---------------------------------------------------------------- SVR

struct SVRParams {
  double C = 1.0;
  double epsilon = 0.01;
  double tol = 1e-3;
  /// Iteration cap is max_passes * (number of samples).
  double max_passes = 1e5;
};

struct SVRModel {
  /// alpha_i - alpha_i^* per training sample.
  std::vector<double> dual_coeffs;
  double intercept = 0.0;
  std::vector<Index> support;
  double C = 0.0;
  double epsilon = 0.0;
  std::size_t iterations = 0;
  /// Maximal KKT violation at exit (< tol on success).
  double kkt_gap = 0.0;
  /// Dual objective of the eps-SVR problem at exit (the quantity being maximized).
  double dual_objective = 0.0;
};

/// Optional per-iteration record of the dual objective.
struct SVRTrace {
  std::vector<double> objective;
};

/// Throws ContractViolation on bad shapes or parameters and ConvergenceError (carrying
/// the final KKT gap) when the iteration cap is reached.
SVRModel svr_fit(const Eigen::MatrixXd& K, std::span<const double> y, const SVRParams& params,
                 SVRTrace* trace = nullptr);
/// sum_i coeff_i k_row_i + b
double svr_predict(const SVRModel& model, std::span<const double> k_row);

// ---------------------------------------------------------------- KRR

struct KRRModel {
  std::vector<double> coeffs;
  double ridge = 0.0;
  double jitter = 0.0;
  /// ||(K + (ridge + jitter) I) beta - y|| / ||y||
  double residual = 0.0;
};

inline constexpr double kDefaultJitter = 1e-8;

/// Cholesky solve of (K + (ridge + jitter) I) beta = y. Throws SolveError if the shifted
/// matrix is not positive definite or the relative residual exceeds 1e-10.
KRRModel krr_fit(const Eigen::MatrixXd& K, std::span<const double> y, double ridge, double jitter = kDefaultJitter);
/// krr_fit with jitter multiplied by 10 after each SolveError, up to jitter_max.
KRRModel krr_fit_escalating(const Eigen::MatrixXd& K, std::span<const double> y, double ridge,
                            double jitter = kDefaultJitter, double jitter_max = 10.0);
/// sum_i beta_i k_row_i (no intercept)
double krr_predict(const KRRModel& model, std::span<const double> k_row);

// ---------------------------------------------------------------- classical baseline

/// exp(-gamma ||u_i - u_j||^2)
Eigen::MatrixXd rbf_gram(const FeatureMatrix& features, double gamma);
/// Rows from `rows`, columns from `cols`.
Eigen::MatrixXd rbf_cross(const FeatureMatrix& rows, const FeatureMatrix& cols, double gamma);

// ---------------------------------------------------------------- model selection

struct Split {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Seeded shuffle; |test| = round(n * test_fraction), at least one sample on each side.
Split train_test_split(std::size_t n, double test_fraction, std::uint64_t seed);

/// Seeded partition of {0..n-1} into `folds` validation folds whose sizes differ by at most one.
std::vector<std::vector<Index>> kfold(std::size_t n, int folds, std::uint64_t seed);

/// K(rows, cols) as a dense copy.
Eigen::MatrixXd submatrix(const Eigen::MatrixXd& K, std::span<const Index> rows, std::span<const Index> cols);
std::vector<double> gather(std::span<const double> values, std::span<const Index> idx);
FeatureMatrix gather_rows(const FeatureMatrix& features, std::span<const Index> idx);

enum class ModelKind { SVR, KRR };
std::string to_string(ModelKind kind);

struct HyperParams {
  ModelKind kind = ModelKind::SVR;
  double C = 1.0;
  double epsilon = 0.01;
  double ridge = 1e-3;
  /// RBF width for feature-based models; 0 for precomputed kernels.
  double gamma = 0.0;

  bool operator==(const HyperParams&) const = default;
};
/// e.g. "C=1;epsilon=0.01" or "ridge=0.001;gamma=10"
std::string describe(const HyperParams& hp);

std::vector<HyperParams> svr_grid(std::span<const double> Cs, std::span<const double> epsilons);
std::vector<HyperParams> krr_grid(std::span<const double> ridges);
/// Cartesian product of a grid with RBF widths (gamma varies slowest).
std::vector<HyperParams> with_gammas(std::span<const HyperParams> grid, std::span<const double> gammas);

struct FitOptions {
  double svr_tol = 1e-3;
  double svr_max_passes = 1e5;
  double jitter = kDefaultJitter;
  double jitter_max = 10.0;
};

using TrainedModel = std::variant<SVRModel, KRRModel>;

/// SVR via svr_fit, KRR via krr_fit_escalating.
TrainedModel fit(const Eigen::MatrixXd& K, std::span<const double> y, const HyperParams& hp,
                 const FitOptions& options = {});
double predict(const TrainedModel& model, std::span<const double> k_row);
/// One prediction per row of K_cross (rows: evaluated points, cols: training points).
std::vector<double> predict_all(const TrainedModel& model, const Eigen::MatrixXd& K_cross);

struct GridScore {
  HyperParams params;
  double mean_mse = 0.0;
  std::vector<double> fold_mse;
};

struct CVReport {
  std::vector<GridScore> scores;
  HyperParams best;
  double best_mse = 0.0;
  int folds = 0;
  std::uint64_t seed = 0;
};

struct CVOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  FitOptions fit;
};

/// Mean validation MSE per grid point over seeded k folds of a precomputed Gram matrix;
/// the best point is the first minimum in grid order.
CVReport grid_search_cv(const Eigen::MatrixXd& K, std::span<const double> y, std::span<const HyperParams> grid,
                        const CVOptions& options);
/// Same with an RBF kernel over features; every grid point must carry gamma > 0.
CVReport grid_search_cv(const FeatureMatrix& features, std::span<const double> y,
                        std::span<const HyperParams> grid, const CVOptions& options);

// ---------------------------------------------------------------- metrics

double mse(std::span<const double> y_true, std::span<const double> y_pred);
/// 1 - SS_res / SS_tot. Throws ContractViolation when y_true has zero variance.
double r2(std::span<const double> y_true, std::span<const double> y_pred);

}  // namespace qkm::ml
