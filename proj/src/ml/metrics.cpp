#include "qkm/error.hpp"
#include "qkm/ml.hpp"

namespace qkm::ml {
namespace {

void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || a.size() != b.size()) throw ContractViolation("metric inputs must be non-empty and equally long");
}

}  // namespace

double mse(std::span<const double> y_true, std::span<const double> y_pred) {
  check_lengths(y_true, y_pred);
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double r = y_true[i] - y_pred[i];
    s += r * r;
  }
  return s / static_cast<double>(y_true.size());
}

double r2(std::span<const double> y_true, std::span<const double> y_pred) {
  check_lengths(y_true, y_pred);
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double ss_tot = 0.0;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
  }
  if (ss_tot == 0.0) throw ContractViolation("r2 is undefined for labels with zero variance");
  return 1.0 - ss_res / ss_tot;
}

}  // namespace qkm::ml
