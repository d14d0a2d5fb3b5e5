#include <algorithm>
#include <cmath>
#include <sstream>

#include "qkm/error.hpp"
#include "qkm/qsim.hpp"

namespace qkm::qsim {

int arity(GateKind kind) noexcept {
  switch (kind) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::T:
    case GateKind::Tdg:
    case GateKind::Ry:
      return 1;
    case GateKind::CNOT:
    case GateKind::CRy:
    case GateKind::SWAP:
      return 2;
    case GateKind::CSWAP:
      return 3;
  }
  return 0;
}

Gate inverse(const Gate& gate) {
  Gate inv = gate;
  switch (gate.kind) {
    case GateKind::T:
      inv.kind = GateKind::Tdg;
      break;
    case GateKind::Tdg:
      inv.kind = GateKind::T;
      break;
    case GateKind::Ry:
    case GateKind::CRy:
      inv.angle = -gate.angle;
      break;
    default:  // H, X, CNOT, SWAP, CSWAP are involutions
      break;
  }
  return inv;
}

std::string to_string(const Gate& gate) {
  static constexpr const char* kNames[] = {"H", "X", "T", "Tdg", "Ry", "CNOT", "CRy", "SWAP", "CSWAP"};
  std::ostringstream os;
  os << kNames[static_cast<int>(gate.kind)];
  if (gate.kind == GateKind::Ry || gate.kind == GateKind::CRy) os << '(' << gate.angle << ')';
  os << '[';
  for (std::size_t i = 0; i < gate.qubits.size(); ++i) os << (i ? "," : "") << gate.qubits[i];
  os << ']';
  return os.str();
}

Circuit::Circuit(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw ConfigError("circuit width must be in [1, " + std::to_string(kMaxQubits) + "], got " +
                      std::to_string(n_qubits));
  }
}

Circuit& Circuit::append(Gate gate) {
  if (static_cast<int>(gate.qubits.size()) != arity(gate.kind)) {
    throw ConfigError("gate " + to_string(gate) + " has the wrong number of qubit operands");
  }
  for (int q : gate.qubits) {
    if (q < 0 || q >= n_qubits_) {
      throw ConfigError("gate " + to_string(gate) + " addresses qubit " + std::to_string(q) +
                        " outside a " + std::to_string(n_qubits_) + "-qubit circuit");
    }
  }
  auto sorted = gate.qubits;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("gate " + to_string(gate) + " repeats a qubit (control must differ from target)");
  }
  if (!std::isfinite(gate.angle)) throw ConfigError("gate " + to_string(gate) + " has a non-finite angle");
  gates_.push_back(std::move(gate));
  return *this;
}

Circuit& Circuit::append(const Circuit& other, std::span<const int> qubit_map) {
  if (static_cast<int>(qubit_map.size()) != other.n_qubits()) {
    throw ConfigError("qubit map size does not match the appended circuit width");
  }
  for (const Gate& g : other.gates()) {
    Gate mapped = g;
    for (int& q : mapped.qubits) q = qubit_map[static_cast<std::size_t>(q)];
    append(std::move(mapped));
  }
  return *this;
}

Circuit Circuit::inverse() const {
  Circuit inv(n_qubits_);
  for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) inv.gates_.push_back(qsim::inverse(*it));
  return inv;
}

}  // namespace qkm::qsim
