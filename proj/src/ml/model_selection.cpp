#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "qkm/csv.hpp"
#include "qkm/error.hpp"
#include "qkm/ml.hpp"
#include "qkm/rng.hpp"

namespace qkm::ml {
namespace {

std::vector<Index> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  RandomStream rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto k = static_cast<std::size_t>(rng.below(i));
    std::swap(perm[i - 1], perm[k]);
  }
  return perm;
}

struct Fold {
  std::vector<Index> train;
  std::vector<Index> valid;
};

std::vector<Fold> make_folds(std::size_t n, const CVOptions& options) {
  std::vector<Fold> folds;
  for (auto& valid : kfold(n, options.folds, options.seed)) {
    Fold f;
    std::vector<bool> in_valid(n, false);
    for (Index i : valid) in_valid[i] = true;
    for (Index i = 0; i < n; ++i) {
      if (!in_valid[i]) f.train.push_back(i);
    }
    f.valid = std::move(valid);
    folds.push_back(std::move(f));
  }
  return folds;
}

double fold_score(const Eigen::MatrixXd& K, std::span<const double> y, const Fold& fold, const HyperParams& hp,
                  const FitOptions& options) {
  const auto y_train = gather(y, fold.train);
  const auto y_valid = gather(y, fold.valid);
  const auto model = fit(submatrix(K, fold.train, fold.train), y_train, hp, options);
  const auto pred = predict_all(model, submatrix(K, fold.valid, fold.train));
  return mse(y_valid, pred);
}

CVReport run_grid(std::span<const HyperParams> grid, const CVOptions& options, std::size_t n,
                  const std::function<double(const HyperParams&, const Fold&)>& score) {
  if (grid.empty()) throw ContractViolation("grid_search_cv: empty parameter grid");
  const auto folds = make_folds(n, options);
  CVReport report;
  report.folds = options.folds;
  report.seed = options.seed;
  for (const HyperParams& hp : grid) {
    GridScore gs;
    gs.params = hp;
    for (const Fold& f : folds) gs.fold_mse.push_back(score(hp, f));
    gs.mean_mse = std::accumulate(gs.fold_mse.begin(), gs.fold_mse.end(), 0.0) / static_cast<double>(folds.size());
    report.scores.push_back(std::move(gs));
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < report.scores.size(); ++k) {
    if (report.scores[k].mean_mse < report.scores[best].mean_mse) best = k;
  }
  report.best = report.scores[best].params;
  report.best_mse = report.scores[best].mean_mse;
  return report;
}

}  // namespace

Split train_test_split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (n < 2) throw ContractViolation("train_test_split: need at least 2 samples");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ContractViolation("train_test_split: test fraction must be in (0, 1)");
  }
  auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  const auto perm = shuffled(n, derive_seed(seed, {0x73706c6974ULL}));
  Split split;
  split.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  split.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test), perm.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

std::vector<std::vector<Index>> kfold(std::size_t n, int folds, std::uint64_t seed) {
  if (folds < 2) throw ContractViolation("kfold: need at least 2 folds");
  if (static_cast<std::size_t>(folds) > n) throw ContractViolation("kfold: more folds than samples");
  const auto perm = shuffled(n, derive_seed(seed, {0x666f6c64ULL}));
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
  const auto k = static_cast<std::size_t>(folds);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t begin = f * n / k;
    const std::size_t end = (f + 1) * n / k;
    out[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(begin), perm.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(out[f].begin(), out[f].end());
  }
  return out;
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& K, std::span<const Index> rows, std::span<const Index> cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      const auto c = static_cast<Eigen::Index>(cols[j]);
      if (r >= K.rows() || c >= K.cols()) throw ContractViolation("submatrix: index out of range");
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = K(r, c);
    }
  }
  return out;
}

std::vector<double> gather(std::span<const double> values, std::span<const Index> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (Index i : idx) {
    if (i >= values.size()) throw ContractViolation("gather: index out of range");
    out.push_back(values[i]);
  }
  return out;
}

FeatureMatrix gather_rows(const FeatureMatrix& features, std::span<const Index> idx) {
  FeatureMatrix out(static_cast<Eigen::Index>(idx.size()), features.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (static_cast<Eigen::Index>(idx[i]) >= features.rows()) throw ContractViolation("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

std::string to_string(ModelKind kind) { return kind == ModelKind::SVR ? "svr" : "krr"; }

std::string describe(const HyperParams& hp) {
  std::string s = hp.kind == ModelKind::SVR
                      ? "C=" + csv::format_double(hp.C) + ";epsilon=" + csv::format_double(hp.epsilon)
                      : "ridge=" + csv::format_double(hp.ridge);
  if (hp.gamma > 0) s += ";gamma=" + csv::format_double(hp.gamma);
  return s;
}

std::vector<HyperParams> svr_grid(std::span<const double> Cs, std::span<const double> epsilons) {
  std::vector<HyperParams> grid;
  for (double c : Cs) {
    for (double e : epsilons) {
      HyperParams hp;
      hp.kind = ModelKind::SVR;
      hp.C = c;
      hp.epsilon = e;
      grid.push_back(hp);
    }
  }
  return grid;
}

std::vector<HyperParams> krr_grid(std::span<const double> ridges) {
  std::vector<HyperParams> grid;
  for (double r : ridges) {
    HyperParams hp;
    hp.kind = ModelKind::KRR;
    hp.ridge = r;
    grid.push_back(hp);
  }
  return grid;
}

std::vector<HyperParams> with_gammas(std::span<const HyperParams> grid, std::span<const double> gammas) {
  std::vector<HyperParams> out;
  for (double g : gammas) {
    for (HyperParams hp : grid) {
      hp.gamma = g;
      out.push_back(hp);
    }
  }
  return out;
}

TrainedModel fit(const Eigen::MatrixXd& K, std::span<const double> y, const HyperParams& hp,
                 const FitOptions& options) {
  if (hp.kind == ModelKind::SVR) {
    return svr_fit(K, y, SVRParams{hp.C, hp.epsilon, options.svr_tol, options.svr_max_passes});
  }
  return krr_fit_escalating(K, y, hp.ridge, options.jitter, options.jitter_max);
}

double predict(const TrainedModel& model, std::span<const double> k_row) {
  if (const auto* svr = std::get_if<SVRModel>(&model)) return svr_predict(*svr, k_row);
  return krr_predict(std::get<KRRModel>(model), k_row);
}

std::vector<double> predict_all(const TrainedModel& model, const Eigen::MatrixXd& K_cross) {
  const Eigen::MatrixXd rows = K_cross;  // column-major: copy rows out contiguously
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  std::vector<double> row(static_cast<std::size_t>(rows.cols()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) row[static_cast<std::size_t>(j)] = rows(i, j);
    out.push_back(predict(model, row));
  }
  return out;
}

CVReport grid_search_cv(const Eigen::MatrixXd& K, std::span<const double> y, std::span<const HyperParams> grid,
                        const CVOptions& options) {
  if (K.rows() != K.cols() || static_cast<std::size_t>(K.rows()) != y.size()) {
    throw ContractViolation("grid_search_cv: Gram matrix and labels disagree in size");
  }
  return run_grid(grid, options, y.size(), [&](const HyperParams& hp, const Fold& f) {
    return fold_score(K, y, f, hp, options.fit);
  });
}

CVReport grid_search_cv(const FeatureMatrix& features, std::span<const double> y, std::span<const HyperParams> grid,
                        const CVOptions& options) {
  if (static_cast<std::size_t>(features.rows()) != y.size()) {
    throw ContractViolation("grid_search_cv: features and labels disagree in size");
  }
  std::map<double, Eigen::MatrixXd> by_gamma;
  for (const HyperParams& hp : grid) {
    if (!(hp.gamma > 0)) throw ContractViolation("grid_search_cv: feature-based grid points need gamma > 0");
    if (!by_gamma.contains(hp.gamma)) by_gamma.emplace(hp.gamma, rbf_gram(features, hp.gamma));
  }
  return run_grid(grid, options, y.size(), [&](const HyperParams& hp, const Fold& f) {
    return fold_score(by_gamma.at(hp.gamma), y, f, hp, options.fit);
  });
}

}  // namespace qkm::ml
