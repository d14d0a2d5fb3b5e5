#pragma once

// Minimal dense statevector simulator for the small (<= 10 qubit) circuits used by the
// channel simulations and overlap estimators.
//
// Qubit ordering: qubit 0 is the LEFTMOST character of a basis label, i.e. the most
// significant bit of the basis index. For n qubits, qubit q corresponds to bit
// (n - 1 - q). So on two qubits |01> means qubit 0 in |0> and qubit 1 in |1>, index 1.
// Measurement bitstrings follow the order in which qubits are listed.

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qkm::qsim {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 10;

enum class GateKind { H, X, T, Tdg, Ry, CNOT, CRy, SWAP, CSWAP };

/// One gate with its qubit operands.
///   single-qubit gates: qubits[0] = target
///   CNOT, CRy:          qubits[0] = control, qubits[1] = target
///   SWAP:               qubits[0], qubits[1]
///   CSWAP:              qubits[0] = control, qubits[1], qubits[2] swapped
struct Gate {
  GateKind kind;
  std::vector<int> qubits;
  double angle = 0.0;

  static Gate h(int q) { return {GateKind::H, {q}}; }
  static Gate x(int q) { return {GateKind::X, {q}}; }
  static Gate t(int q) { return {GateKind::T, {q}}; }
  static Gate tdg(int q) { return {GateKind::Tdg, {q}}; }
  static Gate ry(int q, double theta) { return {GateKind::Ry, {q}, theta}; }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, {control, target}}; }
  static Gate cry(int control, int target, double theta) {
    return {GateKind::CRy, {control, target}, theta};
  }
  static Gate swap(int a, int b) { return {GateKind::SWAP, {a, b}}; }
  static Gate cswap(int control, int a, int b) { return {GateKind::CSWAP, {control, a, b}}; }

  bool operator==(const Gate&) const = default;
};

/// Number of qubit operands a gate kind takes.
int arity(GateKind kind) noexcept;
Gate inverse(const Gate& gate);
std::string to_string(const Gate& gate);

class Circuit {
 public:
  explicit Circuit(int n_qubits);

  int n_qubits() const noexcept { return n_qubits_; }
  const std::vector<Gate>& gates() const noexcept { return gates_; }
  std::size_t size() const noexcept { return gates_.size(); }

  /// Appends a gate after validating operand count, index range and distinctness.
  /// Throws ConfigError on invalid gates.
  Circuit& append(Gate gate);
  /// Appends another circuit, relabelling its qubit q as qubit_map[q].
  Circuit& append(const Circuit& other, std::span<const int> qubit_map);
  /// Reversed gate order with each gate inverted.
  Circuit inverse() const;

 private:
  int n_qubits_;
  std::vector<Gate> gates_;
};

class StateVector {
 public:
  /// |0...0> on n qubits.
  explicit StateVector(int n_qubits);
  /// Takes ownership of amplitudes; throws ContractViolation if the length is not 2^n
  /// or the state is not normalised within 1e-12.
  StateVector(int n_qubits, Eigen::VectorXcd amplitudes);

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(amps_.size()); }
  const Eigen::VectorXcd& amplitudes() const noexcept { return amps_; }
  Eigen::VectorXcd& amplitudes() noexcept { return amps_; }
  Complex operator[](std::size_t index) const { return amps_[static_cast<Eigen::Index>(index)]; }

  double norm() const;
  /// Born probabilities over the full basis.
  std::vector<double> probabilities() const;
  /// <this|other>
  Complex inner(const StateVector& other) const;

 private:
  int n_qubits_;
  Eigen::VectorXcd amps_;
};

class DensityMatrix {
 public:
  /// Validates Hermiticity and unit trace (1e-12) and eigenvalues >= -1e-10.
  DensityMatrix(int n_qubits, Eigen::MatrixXcd entries);

  static DensityMatrix from_pure(const StateVector& psi);
  static DensityMatrix maximally_mixed(int n_qubits);

  int n_qubits() const noexcept { return n_qubits_; }
  Eigen::Index dimension() const noexcept { return rho_.rows(); }
  const Eigen::MatrixXcd& matrix() const noexcept { return rho_; }
  Complex operator()(Eigen::Index r, Eigen::Index c) const { return rho_(r, c); }
  double purity() const;

 private:
  struct Unchecked {};
  DensityMatrix(int n_qubits, Eigen::MatrixXcd entries, Unchecked);

  int n_qubits_;
  Eigen::MatrixXcd rho_;
};

/// Checks the density-matrix invariants; returns a description of the first failure.
std::optional<std::string> density_matrix_violation(const Eigen::MatrixXcd& rho);

void apply_gate_inplace(StateVector& state, const Gate& gate);
StateVector apply_gate(StateVector state, const Gate& gate);
/// Runs the circuit from |0...0>.
StateVector run_circuit(const Circuit& circuit);
/// Runs the circuit from a given initial state.
StateVector run_circuit(const Circuit& circuit, StateVector initial);

/// Partial trace onto `keep` (result qubit k is keep[k]).
DensityMatrix reduced_density(const StateVector& state, std::span<const int> keep);

/// Number of measurement repetitions; nullopt means the exact (infinite-shot) limit.
struct Shots {
  std::optional<std::uint64_t> count;

  static Shots infinite() noexcept { return {}; }
  static Shots finite(std::uint64_t n) noexcept { return {n}; }
  bool is_infinite() const noexcept { return !count.has_value(); }
  bool operator==(const Shots&) const = default;
};
std::string to_string(Shots shots);
/// Parses a positive integer or "inf". Throws ConfigError.
Shots parse_shots(const std::string& text);

struct MeasurementRecord {
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::uint64_t> counts;

  std::uint64_t count(const std::string& bits) const;
  double frequency(const std::string& bits) const;
};

/// Exact outcome distribution of the listed qubits; index b has bit (k-1-i) for qubit i.
std::vector<double> marginal_probabilities(const StateVector& state, std::span<const int> qubits);

/// i.i.d. draws from the Born distribution of the listed qubits, reproducible per seed
/// (Philox4x32-10 stream keyed by seed).
MeasurementRecord sample_counts(const StateVector& state, std::span<const int> qubits,
                                std::uint64_t shots, std::uint64_t seed);

/// Bitstring for outcome index over k measured qubits.
std::string outcome_label(std::size_t outcome, std::size_t k);

enum class Pauli { X, Y, Z };
double pauli_expectation(const DensityMatrix& rho, Pauli axis, int qubit);

}  // namespace qkm::qsim
