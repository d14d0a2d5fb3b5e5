#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qkm/error.hpp"
#include "qkm/qsim.hpp"
#include "qkm/simd.hpp"

namespace qkm::qsim {
namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kEigenFloor = -1e-10;

using Mat2 = Eigen::Matrix2cd;

std::size_t bit_mask(int n_qubits, int qubit) {
  return std::size_t{1} << static_cast<unsigned>(n_qubits - 1 - qubit);
}

Mat2 single_qubit_matrix(GateKind kind, double angle) {
  Mat2 m;
  switch (kind) {
    case GateKind::H: {
      const double r = std::numbers::sqrt2 / 2.0;
      m << r, r, r, -r;
      break;
    }
    case GateKind::X:
      m << 0, 1, 1, 0;
      break;
    case GateKind::T:
      m << 1, 0, 0, std::polar(1.0, std::numbers::pi / 4);
      break;
    case GateKind::Tdg:
      m << 1, 0, 0, std::polar(1.0, -std::numbers::pi / 4);
      break;
    case GateKind::Ry:
    case GateKind::CRy: {
      const double c = std::cos(angle / 2);
      const double s = std::sin(angle / 2);
      m << c, -s, s, c;
      break;
    }
    case GateKind::CNOT:
      m << 0, 1, 1, 0;
      break;
    default:
      throw ContractViolation("not a single-target gate");
  }
  return m;
}

void apply_controlled_1q(Eigen::VectorXcd& amps, int n, std::size_t control_mask, int target,
                         const Mat2& m) {
  const std::size_t tmask = bit_mask(n, target);
  const auto dim = static_cast<std::size_t>(amps.size());
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & tmask) || (i & control_mask) != control_mask) continue;
    const std::size_t j = i | tmask;
    const Complex a0 = amps[static_cast<Eigen::Index>(i)];
    const Complex a1 = amps[static_cast<Eigen::Index>(j)];
    amps[static_cast<Eigen::Index>(i)] = m(0, 0) * a0 + m(0, 1) * a1;
    amps[static_cast<Eigen::Index>(j)] = m(1, 0) * a0 + m(1, 1) * a1;
  }
}

void apply_controlled_swap(Eigen::VectorXcd& amps, int n, std::size_t control_mask, int a, int b) {
  const std::size_t ma = bit_mask(n, a);
  const std::size_t mb = bit_mask(n, b);
  const auto dim = static_cast<std::size_t>(amps.size());
  for (std::size_t i = 0; i < dim; ++i) {
    // visit each pair once: the member with qubit a set and qubit b clear
    if (!(i & ma) || (i & mb) || (i & control_mask) != control_mask) continue;
    std::swap(amps[static_cast<Eigen::Index>(i)], amps[static_cast<Eigen::Index>(i ^ ma ^ mb)]);
  }
}

}  // namespace

StateVector::StateVector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw ConfigError("state width must be in [1, " + std::to_string(kMaxQubits) + "]");
  }
  amps_ = Eigen::VectorXcd::Zero(Eigen::Index{1} << n_qubits);
  amps_[0] = 1.0;
}

StateVector::StateVector(int n_qubits, Eigen::VectorXcd amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
  if (n_qubits < 1 || n_qubits > kMaxQubits || amps_.size() != (Eigen::Index{1} << n_qubits)) {
    throw ContractViolation("amplitude vector length must be 2^n_qubits");
  }
  if (std::abs(amps_.squaredNorm() - 1.0) > 1e-12) {
    throw ContractViolation("state vector is not normalised");
  }
}

double StateVector::norm() const { return amps_.norm(); }

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(dimension());
  simd::abs2(std::span<const Complex>(amps_.data(), dimension()), p);
  return p;
}

Complex StateVector::inner(const StateVector& other) const {
  if (other.n_qubits_ != n_qubits_) throw ContractViolation("inner product of states of different width");
  return amps_.dot(other.amps_);  // Eigen's dot conjugates the left operand
}

std::optional<std::string> density_matrix_violation(const Eigen::MatrixXcd& rho) {
  if (rho.rows() != rho.cols()) return "matrix is not square";
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) return "matrix is not Hermitian";
  const Complex tr = rho.trace();
  if (std::abs(tr.real() - 1.0) > kTraceTol || std::abs(tr.imag()) > kTraceTol) {
    return "trace is not 1";
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kEigenFloor) return "matrix has a negative eigenvalue";
  return std::nullopt;
}

DensityMatrix::DensityMatrix(int n_qubits, Eigen::MatrixXcd entries, Unchecked)
    : n_qubits_(n_qubits), rho_(std::move(entries)) {}

DensityMatrix::DensityMatrix(int n_qubits, Eigen::MatrixXcd entries)
    : n_qubits_(n_qubits), rho_(std::move(entries)) {
  if (n_qubits < 1 || rho_.rows() != (Eigen::Index{1} << n_qubits)) {
    throw ContractViolation("density matrix dimension must be 2^n_qubits");
  }
  if (auto why = density_matrix_violation(rho_)) throw ContractViolation("invalid density matrix: " + *why);
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  return DensityMatrix(psi.n_qubits(), psi.amplitudes() * psi.amplitudes().adjoint(), Unchecked{});
}

DensityMatrix DensityMatrix::maximally_mixed(int n_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  return DensityMatrix(n_qubits, Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

void apply_gate_inplace(StateVector& state, const Gate& gate) {
  const int n = state.n_qubits();
  if (static_cast<int>(gate.qubits.size()) != arity(gate.kind)) {
    throw ConfigError("gate " + to_string(gate) + " has the wrong number of qubit operands");
  }
  for (int q : gate.qubits) {
    if (q < 0 || q >= n) throw ConfigError("gate " + to_string(gate) + " index out of range");
  }
  if (!std::isfinite(gate.angle)) throw ConfigError("gate " + to_string(gate) + " has a non-finite angle");
  auto& amps = state.amplitudes();
  switch (gate.kind) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::T:
    case GateKind::Tdg:
    case GateKind::Ry:
      apply_controlled_1q(amps, n, 0, gate.qubits[0], single_qubit_matrix(gate.kind, gate.angle));
      break;
    case GateKind::CNOT:
    case GateKind::CRy:
      if (gate.qubits[0] == gate.qubits[1]) throw ConfigError("control equals target in " + to_string(gate));
      apply_controlled_1q(amps, n, bit_mask(n, gate.qubits[0]), gate.qubits[1],
                          single_qubit_matrix(gate.kind, gate.angle));
      break;
    case GateKind::SWAP:
      if (gate.qubits[0] == gate.qubits[1]) throw ConfigError("SWAP of a qubit with itself");
      apply_controlled_swap(amps, n, 0, gate.qubits[0], gate.qubits[1]);
      break;
    case GateKind::CSWAP:
      if (gate.qubits[0] == gate.qubits[1] || gate.qubits[0] == gate.qubits[2] ||
          gate.qubits[1] == gate.qubits[2]) {
        throw ConfigError("CSWAP operands must be distinct");
      }
      apply_controlled_swap(amps, n, bit_mask(n, gate.qubits[0]), gate.qubits[1], gate.qubits[2]);
      break;
  }
}

StateVector apply_gate(StateVector state, const Gate& gate) {
  apply_gate_inplace(state, gate);
  return state;
}

StateVector run_circuit(const Circuit& circuit) { return run_circuit(circuit, StateVector(circuit.n_qubits())); }

StateVector run_circuit(const Circuit& circuit, StateVector initial) {
  if (initial.n_qubits() != circuit.n_qubits()) throw ContractViolation("initial state width mismatch");
  for (const Gate& g : circuit.gates()) apply_gate_inplace(initial, g);
  return initial;
}

DensityMatrix reduced_density(const StateVector& state, std::span<const int> keep) {
  const int n = state.n_qubits();
  if (keep.empty()) throw ContractViolation("reduced_density: keep set is empty");
  std::vector<bool> kept(static_cast<std::size_t>(n), false);
  for (int q : keep) {
    if (q < 0 || q >= n) throw ContractViolation("reduced_density: qubit index out of range");
    if (kept[static_cast<std::size_t>(q)]) throw ContractViolation("reduced_density: repeated qubit");
    kept[static_cast<std::size_t>(q)] = true;
  }
  std::vector<int> env;
  for (int q = 0; q < n; ++q) {
    if (!kept[static_cast<std::size_t>(q)]) env.push_back(q);
  }
  const auto k = static_cast<int>(keep.size());
  const Eigen::Index dim_keep = Eigen::Index{1} << k;
  const Eigen::Index dim_env = Eigen::Index{1} << (n - k);

  // Reshape the amplitudes as psi(kept, env); rho = psi psi^dagger.
  Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(dim_keep, dim_env);
  for (std::size_t idx = 0; idx < state.dimension(); ++idx) {
    Eigen::Index a = 0;
    for (int q : keep) a = (a << 1) | static_cast<Eigen::Index>((idx & bit_mask(n, q)) != 0);
    Eigen::Index e = 0;
    for (int q : env) e = (e << 1) | static_cast<Eigen::Index>((idx & bit_mask(n, q)) != 0);
    psi(a, e) = state[idx];
  }
  Eigen::MatrixXcd rho = psi * psi.adjoint();
  // exact Hermitian symmetrisation; removes rounding asymmetry of the product
  rho = (0.5 * (rho + rho.adjoint())).eval();
  return DensityMatrix(k, std::move(rho));
}

double pauli_expectation(const DensityMatrix& rho, Pauli axis, int qubit) {
  const int n = rho.n_qubits();
  if (qubit < 0 || qubit >= n) throw ContractViolation("pauli_expectation: qubit out of range");
  const std::size_t m = bit_mask(n, qubit);
  const auto dim = static_cast<std::size_t>(rho.dimension());
  double value = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & m) continue;
    const auto r0 = static_cast<Eigen::Index>(i);
    const auto r1 = static_cast<Eigen::Index>(i | m);
    switch (axis) {
      case Pauli::Z:
        value += rho(r0, r0).real() - rho(r1, r1).real();
        break;
      case Pauli::X:
        value += 2.0 * rho(r0, r1).real();
        break;
      case Pauli::Y:
        value -= 2.0 * rho(r0, r1).imag();
        break;
    }
  }
  return std::clamp(value, -1.0, 1.0);
}

}  // namespace qkm::qsim
