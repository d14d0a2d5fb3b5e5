#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

#include "qkm/csv.hpp"
#include "qkm/error.hpp"
#include "qkm/kernels.hpp"

namespace qkm::kernels {
namespace {

using qsim::Circuit;
using qsim::Gate;

std::string lowered(const std::string& text) {
  std::string s;
  for (char c : text) {
    if (c != '_' && c != '-' && c != ' ') s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

void require_prep(const Circuit& prep) {
  if (prep.n_qubits() != 2) throw ContractViolation("preparation circuits act on (system, environment) = 2 qubits");
}

// Probability of `outcome` on the measured qubits: exact Born value or a seeded frequency.
double outcome_probability(const qsim::StateVector& state, std::span<const int> measured, std::size_t outcome,
                           qsim::Shots shots, std::uint64_t seed) {
  if (shots.is_infinite()) return qsim::marginal_probabilities(state, measured)[outcome];
  const auto record = qsim::sample_counts(state, measured, *shots.count, seed);
  return record.frequency(qsim::outcome_label(outcome, measured.size()));
}

void append_bell_rotation(Circuit& c) {
  c.append(Gate::cnot(kSystem1, kSystem2));
  c.append(Gate::h(kSystem1));
}

}  // namespace

std::string to_string(OverlapMethod method) {
  switch (method) {
    case OverlapMethod::SwapTest:
      return "swap";
    case OverlapMethod::InversionTest:
      return "inversion";
    case OverlapMethod::AncillaBased:
      return "aba";
    case OverlapMethod::BellBasis:
      return "bba";
    case OverlapMethod::ExactOracle:
      return "exact";
  }
  return "?";
}

OverlapMethod parse_method(const std::string& text) {
  const std::string s = lowered(text);
  if (s == "swap" || s == "swaptest") return OverlapMethod::SwapTest;
  if (s == "inversion" || s == "inversiontest") return OverlapMethod::InversionTest;
  if (s == "aba" || s == "ancillabased") return OverlapMethod::AncillaBased;
  if (s == "bba" || s == "bellbasis") return OverlapMethod::BellBasis;
  if (s == "exact" || s == "exactoracle" || s == "oracle") return OverlapMethod::ExactOracle;
  throw ConfigError("unknown overlap method '" + text + "' (swap|inversion|aba|bba|exact)");
}

void KernelFnSpec::validate() const {
  if (!std::isfinite(c)) throw ConfigError("kernel offset c must be finite");
  if (degree < 1) throw ConfigError("polynomial degree must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("exponential sigma must be positive");
}

std::string to_string(KernelFnSpec::Kind kind) {
  switch (kind) {
    case KernelFnSpec::Kind::Linear:
      return "linear";
    case KernelFnSpec::Kind::Polynomial:
      return "polynomial";
    case KernelFnSpec::Kind::Exponential:
      return "exponential";
  }
  return "?";
}

KernelFnSpec::Kind parse_kernel_kind(const std::string& text) {
  const std::string s = lowered(text);
  if (s == "linear") return KernelFnSpec::Kind::Linear;
  if (s == "polynomial" || s == "poly") return KernelFnSpec::Kind::Polynomial;
  if (s == "exponential" || s == "exp") return KernelFnSpec::Kind::Exponential;
  throw ConfigError("unknown kernel function '" + text + "' (linear|polynomial|exponential)");
}

std::string describe(const KernelFnSpec& fn) {
  switch (fn.kind) {
    case KernelFnSpec::Kind::Linear:
      return "linear(c=" + csv::format_double(fn.c) + ")";
    case KernelFnSpec::Kind::Polynomial:
      return "polynomial(c=" + csv::format_double(fn.c) + ";d=" + std::to_string(fn.degree) + ")";
    case KernelFnSpec::Kind::Exponential:
      return "exponential(sigma=" + csv::format_double(fn.sigma) + ")";
  }
  return "?";
}

double overlap_oracle(const qsim::DensityMatrix& a, const qsim::DensityMatrix& b) {
  if (a.dimension() != b.dimension()) throw ContractViolation("overlap_oracle: dimension mismatch");
  // Tr[AB] = sum_ij A_ij B_ji
  return (a.matrix().cwiseProduct(b.matrix().transpose())).sum().real();
}

Circuit two_register_circuit(const Circuit& prep_i, const Circuit& prep_j) {
  require_prep(prep_i);
  require_prep(prep_j);
  Circuit c(5);
  const std::array<int, 2> first{kSystem1, kEnv1};
  const std::array<int, 2> second{kSystem2, kEnv2};
  c.append(prep_i, first);
  c.append(prep_j, second);
  return c;
}

Circuit swap_test_circuit(const Circuit& prep_i, const Circuit& prep_j) {
  Circuit c = two_register_circuit(prep_i, prep_j);
  c.append(Gate::h(kAncilla));
  c.append(Gate::cswap(kAncilla, kSystem1, kSystem2));
  c.append(Gate::h(kAncilla));
  return c;
}

Circuit inversion_test_circuit(const Circuit& prep_i, const Circuit& prep_j) {
  require_prep(prep_i);
  require_prep(prep_j);
  Circuit c(2);
  const std::array<int, 2> identity{0, 1};
  c.append(prep_j, identity);
  c.append(prep_i.inverse(), identity);
  return c;
}

Circuit aba_circuit(const Circuit& prep_i, const Circuit& prep_j) {
  Circuit c = two_register_circuit(prep_i, prep_j);
  append_bell_rotation(c);
  // relative-phase Toffoli: ancilla <- s1 AND s2 (the singlet flag)
  const int t = kAncilla;
  c.append(Gate::h(t));
  c.append(Gate::cnot(kSystem2, t));
  c.append(Gate::tdg(t));
  c.append(Gate::cnot(kSystem1, t));
  c.append(Gate::t(t));
  c.append(Gate::cnot(kSystem2, t));
  c.append(Gate::tdg(t));
  c.append(Gate::cnot(kSystem1, t));
  c.append(Gate::t(t));
  c.append(Gate::h(t));
  return c;
}

Circuit bba_circuit(const Circuit& prep_i, const Circuit& prep_j) {
  Circuit c = two_register_circuit(prep_i, prep_j);
  append_bell_rotation(c);
  return c;
}

double swap_test(const Circuit& prep_i, const Circuit& prep_j, qsim::Shots shots, std::uint64_t seed) {
  const auto state = qsim::run_circuit(swap_test_circuit(prep_i, prep_j));
  const std::array<int, 1> measured{kAncilla};
  return 2.0 * outcome_probability(state, measured, 0, shots, seed) - 1.0;
}

double inversion_test(const Circuit& prep_i, const Circuit& prep_j, qsim::Shots shots, std::uint64_t seed) {
  const auto state = qsim::run_circuit(inversion_test_circuit(prep_i, prep_j));
  const std::array<int, 2> measured{0, 1};
  return outcome_probability(state, measured, 0, shots, seed);
}

double aba_overlap(const Circuit& prep_i, const Circuit& prep_j, qsim::Shots shots, std::uint64_t seed) {
  const auto state = qsim::run_circuit(aba_circuit(prep_i, prep_j));
  const std::array<int, 1> measured{kAncilla};
  return 1.0 - 2.0 * outcome_probability(state, measured, 1, shots, seed);
}

double bba_overlap(const Circuit& prep_i, const Circuit& prep_j, qsim::Shots shots, std::uint64_t seed) {
  const auto state = qsim::run_circuit(bba_circuit(prep_i, prep_j));
  const std::array<int, 2> measured{kSystem1, kSystem2};
  return 1.0 - 2.0 * outcome_probability(state, measured, 3, shots, seed);
}

double swap_test(double theta_i, double theta_j, channels::ChannelKind kind, qsim::Shots shots, std::uint64_t seed) {
  return swap_test(channels::build_channel_circuit(kind, theta_i), channels::build_channel_circuit(kind, theta_j),
                   shots, seed);
}

double inversion_test(double theta_i, double theta_j, channels::ChannelKind kind, qsim::Shots shots,
                      std::uint64_t seed) {
  return inversion_test(channels::build_channel_circuit(kind, theta_i),
                        channels::build_channel_circuit(kind, theta_j), shots, seed);
}

double aba_overlap(double theta_i, double theta_j, channels::ChannelKind kind, qsim::Shots shots, std::uint64_t seed) {
  return aba_overlap(channels::build_channel_circuit(kind, theta_i), channels::build_channel_circuit(kind, theta_j),
                     shots, seed);
}

double bba_overlap(double theta_i, double theta_j, channels::ChannelKind kind, qsim::Shots shots, std::uint64_t seed) {
  return bba_overlap(channels::build_channel_circuit(kind, theta_i), channels::build_channel_circuit(kind, theta_j),
                     shots, seed);
}

qsim::DensityMatrix reduced_system_state(channels::ChannelKind kind, double theta) {
  const std::array<int, 1> keep{channels::kSystemQubit};
  return qsim::reduced_density(qsim::run_circuit(channels::build_channel_circuit(kind, theta)), keep);
}

double estimate_overlap(OverlapMethod method, double theta_i, double theta_j, channels::ChannelKind kind,
                        qsim::Shots shots, std::uint64_t seed) {
  switch (method) {
    case OverlapMethod::SwapTest:
      return swap_test(theta_i, theta_j, kind, shots, seed);
    case OverlapMethod::InversionTest:
      return inversion_test(theta_i, theta_j, kind, shots, seed);
    case OverlapMethod::AncillaBased:
      return aba_overlap(theta_i, theta_j, kind, shots, seed);
    case OverlapMethod::BellBasis:
      return bba_overlap(theta_i, theta_j, kind, shots, seed);
    case OverlapMethod::ExactOracle:
      return overlap_oracle(reduced_system_state(kind, theta_i), reduced_system_state(kind, theta_j));
  }
  throw ContractViolation("unknown overlap method");
}

double kernel_value(double overlap, const KernelFnSpec& fn) {
  switch (fn.kind) {
    case KernelFnSpec::Kind::Linear:
      return overlap + fn.c;
    case KernelFnSpec::Kind::Polynomial:
      return std::pow(overlap + fn.c, fn.degree);
    case KernelFnSpec::Kind::Exponential:
      return std::exp(-fn.sigma * std::sqrt(1.0 - std::clamp(overlap, 0.0, 1.0)));
  }
  throw ContractViolation("unknown kernel function");
}

}  // namespace qkm::kernels
