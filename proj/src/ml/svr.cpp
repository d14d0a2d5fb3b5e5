#include <algorithm>
#include <cmath>
#include <limits>

#include "qkm/error.hpp"
#include "qkm/ml.hpp"
#include "qkm/simd.hpp"

namespace qkm::ml {
namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Dual of eps-SVR as a 2l-variable problem in libsvm form:
//   min 1/2 a^T Q a + p^T a,  y^T a = 0,  0 <= a_t <= C
// with a = (alpha, alpha^*), y_t = +1 for t < l and -1 otherwise,
// p_t = eps - y_t (t < l), eps + y_{t-l} (t >= l), and Q_ts = y_t y_s K(t mod l, s mod l).
class SmoSolver {
 public:
  SmoSolver(const Eigen::MatrixXd& K, std::span<const double> labels, double C, double epsilon)
      : K_(K), l_(labels.size()), C_(C) {
    const std::size_t n = 2 * l_;
    a_.assign(n, 0.0);
    p_.resize(n);
    y_.resize(n);
    diag_.resize(n);
    for (std::size_t i = 0; i < l_; ++i) {
      p_[i] = epsilon - labels[i];
      p_[i + l_] = epsilon + labels[i];
      y_[i] = 1.0;
      y_[i + l_] = -1.0;
      diag_[i] = diag_[i + l_] = K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    }
    G_ = p_;
    row_i_.resize(n);
    row_j_.resize(n);
  }

  std::size_t size() const noexcept { return 2 * l_; }

  // Maximal-violation i, second-order j. Returns the KKT gap m - M.
  double select(std::size_t& out_i, std::size_t& out_j) {
    const std::size_t n = size();
    double gmax = -kInf;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y_[t] > 0) {
        if (a_[t] < C_ && -G_[t] >= gmax) {
          gmax = -G_[t];
          i = t;
        }
      } else if (a_[t] > 0 && G_[t] >= gmax) {
        gmax = G_[t];
        i = t;
      }
    }
    double gmax2 = -kInf;
    double best_obj = kInf;
    std::size_t j = n;
    if (i < n) fill_row(i, row_i_);
    for (std::size_t t = 0; t < n; ++t) {
      double grad_diff;
      if (y_[t] > 0) {
        if (!(a_[t] > 0)) continue;
        gmax2 = std::max(gmax2, G_[t]);
        grad_diff = gmax + G_[t];
      } else {
        if (!(a_[t] < C_)) continue;
        gmax2 = std::max(gmax2, -G_[t]);
        grad_diff = gmax - G_[t];
      }
      if (i < n && grad_diff > 0) {
        // y_i Q_i[t] = y_t K(i, t)
        double quad = diag_[i] + diag_[t] - 2.0 * y_[i] * row_i_[t];
        if (quad <= 0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    out_i = i;
    out_j = j;
    return gmax + gmax2;
  }

  void update(std::size_t i, std::size_t j) {
    fill_row(j, row_j_);
    const double old_ai = a_[i];
    const double old_aj = a_[j];
    const double qij = row_i_[j];
    if (y_[i] != y_[j]) {
      double quad = diag_[i] + diag_[j] + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-G_[i] - G_[j]) / quad;
      const double diff = a_[i] - a_[j];
      a_[i] += delta;
      a_[j] += delta;
      if (diff > 0) {
        if (a_[j] < 0) {
          a_[j] = 0;
          a_[i] = diff;
        }
      } else if (a_[i] < 0) {
        a_[i] = 0;
        a_[j] = -diff;
      }
      if (diff > 0) {
        if (a_[i] > C_) {
          a_[i] = C_;
          a_[j] = C_ - diff;
        }
      } else if (a_[j] > C_) {
        a_[j] = C_;
        a_[i] = C_ + diff;
      }
    } else {
      double quad = diag_[i] + diag_[j] - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (G_[i] - G_[j]) / quad;
      const double sum = a_[i] + a_[j];
      a_[i] -= delta;
      a_[j] += delta;
      if (sum > C_) {
        if (a_[i] > C_) {
          a_[i] = C_;
          a_[j] = sum - C_;
        }
        if (a_[j] > C_) {
          a_[j] = C_;
          a_[i] = sum - C_;
        }
      } else {
        if (a_[j] < 0) {
          a_[j] = 0;
          a_[i] = sum;
        }
        if (a_[i] < 0) {
          a_[i] = 0;
          a_[j] = sum;
        }
      }
    }
    simd::axpy2(a_[i] - old_ai, row_i_, a_[j] - old_aj, row_j_, G_);
  }

  double objective() const {
    double v = 0.0;
    for (std::size_t t = 0; t < size(); ++t) v += a_[t] * (G_[t] + p_[t]);
    return -0.5 * v;
  }

  // libsvm calculate_rho; the intercept is -rho.
  double rho() const {
    double ub = kInf;
    double lb = -kInf;
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < size(); ++t) {
      const double yg = y_[t] * G_[t];
      if (a_[t] >= C_) {
        if (y_[t] < 0) {
          ub = std::min(ub, yg);
        } else {
          lb = std::max(lb, yg);
        }
      } else if (a_[t] <= 0) {
        if (y_[t] > 0) {
          ub = std::min(ub, yg);
        } else {
          lb = std::max(lb, yg);
        }
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    return n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  }

  double coeff(std::size_t i) const { return a_[i] - a_[i + l_]; }

 private:
  // Q row t over all 2l variables
  void fill_row(std::size_t t, std::vector<double>& row) const {
    const auto r = static_cast<Eigen::Index>(t % l_);
    const double yt = y_[t];
    for (std::size_t s = 0; s < l_; ++s) {
      const double k = K_(r, static_cast<Eigen::Index>(s));
      row[s] = yt * k;
      row[s + l_] = -yt * k;
    }
  }

  const Eigen::MatrixXd& K_;
  std::size_t l_;
  double C_;
  std::vector<double> a_, p_, y_, diag_, G_;
  std::vector<double> row_i_, row_j_;
};

}  // namespace

SVRModel svr_fit(const Eigen::MatrixXd& K, std::span<const double> y, const SVRParams& params, SVRTrace* trace) {
  const std::size_t l = y.size();
  if (l == 0) throw ContractViolation("svr_fit: empty training set");
  if (K.rows() != K.cols() || static_cast<std::size_t>(K.rows()) != l) {
    throw ContractViolation("svr_fit: Gram matrix must be square with one row per label");
  }
  if (!(params.C > 0) || !(params.epsilon >= 0) || !(params.tol > 0) || !(params.max_passes > 0)) {
    throw ContractViolation("svr_fit: need C > 0, epsilon >= 0, tol > 0, max_passes > 0");
  }
  SmoSolver solver(K, y, params.C, params.epsilon);
  const double cap = params.max_passes * static_cast<double>(l);
  std::size_t iter = 0;
  double gap = 0.0;
  if (trace) trace->objective.push_back(solver.objective());
  while (true) {
    std::size_t i = 0;
    std::size_t j = 0;
    gap = solver.select(i, j);
    if (gap < params.tol || j >= solver.size() || i >= solver.size()) break;
    if (static_cast<double>(iter) >= cap) {
      throw ConvergenceError("svr_fit: iteration cap reached with KKT gap " + std::to_string(gap), gap);
    }
    solver.update(i, j);
    ++iter;
    if (trace) trace->objective.push_back(solver.objective());
  }

  SVRModel model;
  model.C = params.C;
  model.epsilon = params.epsilon;
  model.iterations = iter;
  model.kkt_gap = std::max(gap, 0.0);
  model.intercept = -solver.rho();
  model.dual_objective = solver.objective();
  model.dual_coeffs.resize(l);
  for (std::size_t i = 0; i < l; ++i) {
    model.dual_coeffs[i] = solver.coeff(i);
    if (model.dual_coeffs[i] != 0.0) model.support.push_back(i);
  }
  return model;
}

double svr_predict(const SVRModel& model, std::span<const double> k_row) {
  if (k_row.size() != model.dual_coeffs.size()) throw ContractViolation("svr_predict: kernel row length mismatch");
  return simd::dot(model.dual_coeffs, k_row) + model.intercept;
}

}  // namespace qkm::ml
