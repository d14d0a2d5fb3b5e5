#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "qkm/error.hpp"
#include "qkm/nonmarkov.hpp"

namespace qkm::nonmarkov {
namespace {

using Mat4 = Eigen::Matrix4cd;

Mat4 sigma_yy() {
  Mat4 y = Mat4::Zero();
  y(0, 3) = -1.0;
  y(1, 2) = 1.0;
  y(2, 1) = 1.0;
  y(3, 0) = -1.0;
  return y;
}

double concurrence_of(const Mat4& rho) {
  Eigen::SelfAdjointEigenSolver<Mat4> es(rho);
  const Eigen::Vector4d evals = es.eigenvalues();
  const double top = std::max(evals.maxCoeff(), 0.0);
  // rho = W W^dagger over the non-negligible spectrum
  Eigen::Matrix<std::complex<double>, 4, Eigen::Dynamic, 0, 4, 4> w(4, 0);
  for (int k = 0; k < 4; ++k) {
    if (evals[k] > 1e-14 * top) {
      w.conservativeResize(Eigen::NoChange, w.cols() + 1);
      w.col(w.cols() - 1) = es.eigenvectors().col(k) * std::sqrt(evals[k]);
    }
  }
  if (w.cols() == 0) return 0.0;
  const Eigen::MatrixXcd tau = w.transpose() * sigma_yy() * w;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(tau);
  std::array<double, 4> s{};
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) s[static_cast<std::size_t>(k)] = svd.singularValues()[k];
  std::sort(s.begin(), s.end(), std::greater<>());
  return std::clamp(s[0] - s[1] - s[2] - s[3], 0.0, 1.0);
}

Mat4 bell_after_channel(const channels::KrausSet& kraus) {
  // (I (x) M) |Phi+> for each Kraus operator, summed as outer products
  Mat4 rho = Mat4::Zero();
  const double r = std::numbers::sqrt2 / 2.0;
  for (const auto& m : kraus.operators) {
    Eigen::Vector4cd v;
    v << r * m(0, 0), r * m(1, 0), r * m(0, 1), r * m(1, 1);
    rho += v * v.adjoint();
  }
  return rho;
}

}  // namespace

double concurrence(const qsim::DensityMatrix& rho) {
  if (rho.n_qubits() != 2) throw ContractViolation("concurrence needs a two-qubit density matrix");
  return concurrence_of(rho.matrix());
}

void EntanglementTrajectory::validate() const {
  if (times.size() != values.size()) throw ContractViolation("trajectory times/values length mismatch");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw ContractViolation("trajectory times must strictly increase");
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw ContractViolation("concurrence outside [0, 1]");
  }
}

EntanglementTrajectory entanglement_trajectory(const channels::ChannelParams& params,
                                               std::span<const double> times) {
  if (times.empty()) throw ContractViolation("entanglement_trajectory: empty time grid");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || times[k] < 0.0 || (k > 0 && !(times[k] > times[k - 1]))) {
      throw ContractViolation("entanglement_trajectory: time grid must be non-negative and strictly increasing");
    }
  }
  const auto kind = channels::kind_of(params);
  EntanglementTrajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.values.reserve(times.size());
  for (double t : times) {
    const double d = channels::decay(channels::at_time(params, t));
    traj.values.push_back(concurrence_of(bell_after_channel(channels::kraus_set(kind, d))));
  }
  return traj;
}

double nm_degree(const EntanglementTrajectory& trajectory) {
  trajectory.validate();
  double total = 0.0;
  for (std::size_t k = 1; k < trajectory.values.size(); ++k) {
    total += std::max(0.0, trajectory.values[k] - trajectory.values[k - 1]);
  }
  return total;
}

std::vector<double> time_grid(const channels::ChannelParams& params, const TimeGrid& spec) {
  if (spec.points < 2) throw ConfigError("time grid needs at least 2 points");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) throw ConfigError("time grid horizon must be positive");
  const double unit = std::holds_alternative<channels::ADParams>(params)
                          ? 1.0 / std::get<channels::ADParams>(params).gamma0
                          : std::get<channels::PDParams>(params).tau;
  const double end = spec.horizon * unit;
  std::vector<double> grid(static_cast<std::size_t>(spec.points));
  const double step = end / (spec.points - 1);
  for (int k = 0; k < spec.points; ++k) grid[static_cast<std::size_t>(k)] = step * k;
  grid.back() = end;
  return grid;
}

double nm_label(const channels::ChannelParams& params, const TimeGrid& spec) {
  const auto grid = time_grid(params, spec);
  return nm_degree(entanglement_trajectory(params, grid));
}

}  // namespace qkm::nonmarkov
