#include <algorithm>
#include <cmath>

#include "qkm/channels.hpp"
#include "qkm/error.hpp"

namespace qkm::channels {

qsim::Circuit build_channel_circuit(ChannelKind kind, double theta) {
  if (!std::isfinite(theta)) throw ConfigError("channel angle must be finite");
  qsim::Circuit c(2);
  c.append(qsim::Gate::h(kSystemQubit));
  c.append(qsim::Gate::cry(kSystemQubit, kEnvironmentQubit, theta));
  if (kind == ChannelKind::AmplitudeDamping) c.append(qsim::Gate::cnot(kEnvironmentQubit, kSystemQubit));
  return c;
}

double KrausSet::completeness_error() const {
  Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
  for (const auto& m : operators) sum += m.adjoint() * m;
  return (sum - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff();
}

KrausSet kraus_set(ChannelKind kind, double decay_value) {
  constexpr double slack = 1e-12;
  Eigen::Matrix2cd m0 = Eigen::Matrix2cd::Zero();
  Eigen::Matrix2cd m1 = Eigen::Matrix2cd::Zero();
  if (kind == ChannelKind::AmplitudeDamping) {
    if (!(decay_value >= -slack && decay_value <= 1.0 + slack)) {
      throw ContractViolation("AD Kraus set needs p in [0, 1], got " + std::to_string(decay_value));
    }
    const double p = std::clamp(decay_value, 0.0, 1.0);
    m0(0, 0) = 1.0;
    m0(1, 1) = std::sqrt(p);
    m1(0, 1) = std::sqrt(1.0 - p);
  } else {
    if (!(decay_value >= -1.0 - slack && decay_value <= 1.0 + slack)) {
      throw ContractViolation("PD Kraus set needs Lambda in [-1, 1], got " + std::to_string(decay_value));
    }
    const double l = std::clamp(decay_value, -1.0, 1.0);
    const double a = std::sqrt((1.0 + l) / 2.0);
    const double b = std::sqrt((1.0 - l) / 2.0);
    m0(0, 0) = a;
    m0(1, 1) = a;
    m1(0, 0) = b;
    m1(1, 1) = -b;
  }
  return KrausSet{{m0, m1}};
}

qsim::DensityMatrix apply_kraus(const qsim::DensityMatrix& rho, const KrausSet& kraus, int qubit) {
  const int n = rho.n_qubits();
  if (qubit < 0 || qubit >= n) throw ContractViolation("apply_kraus: target qubit out of range");
  if (kraus.operators.empty()) throw ContractViolation("apply_kraus: empty Kraus set");
  const Eigen::Index left = Eigen::Index{1} << qubit;
  const Eigen::Index right = Eigen::Index{1} << (n - 1 - qubit);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(rho.dimension(), rho.dimension());
  for (const auto& m : kraus.operators) {
    // I_left (x) M (x) I_right, with qubit 0 the most significant factor
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(rho.dimension(), rho.dimension());
    for (Eigen::Index l = 0; l < left; ++l) {
      for (Eigen::Index r = 0; r < right; ++r) {
        for (int a = 0; a < 2; ++a) {
          for (int b = 0; b < 2; ++b) {
            full((l * 2 + a) * right + r, (l * 2 + b) * right + r) = m(a, b);
          }
        }
      }
    }
    out += full * rho.matrix() * full.adjoint();
  }
  out = (0.5 * (out + out.adjoint())).eval();
  return qsim::DensityMatrix(n, std::move(out));
}

}  // namespace qkm::channels
