#pragma once

// Overlap estimation between channel-prepared states and the quantum kernels built on it.
//
// Every estimator works on 2-qubit preparation circuits (system = qubit 0, environment =
// qubit 1). The angle overloads use the channel circuit for that angle; the circuit
// overloads allow arbitrary preparations, e.g. basis states for sanity checks.
//
// SwapTest, AncillaBased and BellBasis estimate Tr[rho_i rho_j] of the reduced system
// states. InversionTest estimates |<Psi_i|Psi_j>|^2 of the joint (system + environment)
// pure states, a different feature map.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "qkm/channels.hpp"
#include "qkm/qsim.hpp"

namespace qkm::kernels {

enum class OverlapMethod { SwapTest, InversionTest, AncillaBased, BellBasis, ExactOracle };

std::string to_string(OverlapMethod method);
OverlapMethod parse_method(const std::string& text);

struct KernelFnSpec {
  enum class Kind { Linear, Polynomial, Exponential };

  Kind kind = Kind::Exponential;
  double c = 0.0;
  int degree = 1;
  double sigma = 3.0;

  static KernelFnSpec linear(double c) { return {Kind::Linear, c, 1, 1.0}; }
  static KernelFnSpec polynomial(double c, int degree) { return {Kind::Polynomial, c, degree, 1.0}; }
  static KernelFnSpec exponential(double sigma) { return {Kind::Exponential, 0.0, 1, sigma}; }

  /// Throws ConfigError unless degree >= 1, sigma > 0 and all values are finite.
  void validate() const;
  bool operator==(const KernelFnSpec&) const = default;
};

std::string to_string(KernelFnSpec::Kind kind);
KernelFnSpec::Kind parse_kernel_kind(const std::string& text);
/// e.g. "exponential(sigma=3)"
std::string describe(const KernelFnSpec& fn);

/// Tr[a b] for density matrices of equal size.
double overlap_oracle(const qsim::DensityMatrix& a, const qsim::DensityMatrix& b);

// Qubit layout of the 5-qubit two-register circuits.
inline constexpr int kSystem1 = 0;
inline constexpr int kEnv1 = 1;
inline constexpr int kSystem2 = 2;
inline constexpr int kEnv2 = 3;
inline constexpr int kAncilla = 4;

/// Both preparations side by side on qubits (s1, e1, s2, e2) plus an idle ancilla.
qsim::Circuit two_register_circuit(const qsim::Circuit& prep_i, const qsim::Circuit& prep_j);

qsim::Circuit swap_test_circuit(const qsim::Circuit& prep_i, const qsim::Circuit& prep_j);
qsim::Circuit inversion_test_circuit(const qsim::Circuit& prep_i, const qsim::Circuit& prep_j);
qsim::Circuit aba_circuit(const qsim::Circuit& prep_i, const qsim::Circuit& prep_j);
qsim::Circuit bba_circuit(const qsim::Circuit& prep_i, const qsim::Circuit& prep_j);

/// 2 P(ancilla = 0) - 1
double swap_test(const qsim::Circuit& prep_i, const qsim::Circuit& prep_j, qsim::Shots shots, std::uint64_t seed);
/// P("00") after U_j then U_i^dagger
double inversion_test(const qsim::Circuit& prep_i, const qsim::Circuit& prep_j, qsim::Shots shots,
                      std::uint64_t seed);
/// 1 - 2 P(ancilla = 1), ancilla flagged by the singlet outcome of a Bell-basis rotation
double aba_overlap(const qsim::Circuit& prep_i, const qsim::Circuit& prep_j, qsim::Shots shots,
                   std::uint64_t seed);
/// 1 - 2 P(s1 s2 = "11") after the Bell-basis rotation
double bba_overlap(const qsim::Circuit& prep_i, const qsim::Circuit& prep_j, qsim::Shots shots,
                   std::uint64_t seed);

double swap_test(double theta_i, double theta_j, channels::ChannelKind kind, qsim::Shots shots, std::uint64_t seed);
double inversion_test(double theta_i, double theta_j, channels::ChannelKind kind, qsim::Shots shots,
                      std::uint64_t seed);
double aba_overlap(double theta_i, double theta_j, channels::ChannelKind kind, qsim::Shots shots, std::uint64_t seed);
double bba_overlap(double theta_i, double theta_j, channels::ChannelKind kind, qsim::Shots shots, std::uint64_t seed);

/// Dispatch on method. ExactOracle ignores shots and seed.
double estimate_overlap(OverlapMethod method, double theta_i, double theta_j, channels::ChannelKind kind,
                        qsim::Shots shots, std::uint64_t seed);

/// Reduced system state of the channel circuit at theta.
qsim::DensityMatrix reduced_system_state(channels::ChannelKind kind, double theta);

/// linear x + c, polynomial (x + c)^d, exponential exp(-sigma sqrt(1 - x)) with x clamped to [0, 1].
double kernel_value(double overlap, const KernelFnSpec& fn);

struct GramMatrix {
  Eigen::MatrixXd values;
  /// Raw overlap estimates before clamping and the kernel function.
  Eigen::MatrixXd overlaps;
  channels::ChannelKind channel = channels::ChannelKind::AmplitudeDamping;
  OverlapMethod method = OverlapMethod::ExactOracle;
  KernelFnSpec fn;
  qsim::Shots shots;
  std::uint64_t seed = 0;

  Eigen::Index size() const noexcept { return values.rows(); }
};

/// Seed of entry (i, j), i <= j. Independent of evaluation order.
std::uint64_t entry_seed(std::uint64_t seed, std::size_t i, std::size_t j) noexcept;

/// Upper triangle estimated (entry seeds from entry_seed), mirrored for exact symmetry.
/// The InversionTest diagonal is fn(1) without simulation.
GramMatrix gram_matrix(std::span<const double> thetas, channels::ChannelKind kind, OverlapMethod method,
                       const KernelFnSpec& fn, qsim::Shots shots, std::uint64_t seed);

/// Same kernel function over an existing symmetric overlap matrix.
GramMatrix apply_kernel(const GramMatrix& base, const KernelFnSpec& fn);

/// Row-major CSV with "# key=value" provenance lines; values in shortest round-trip form.
void write_gram_csv(std::ostream& os, const GramMatrix& gram);
void write_gram_csv(const std::string& path, const GramMatrix& gram);
/// Values and provenance only; `overlaps` is left empty.
GramMatrix read_gram_csv(const std::string& path);

}  // namespace qkm::kernels
