#include <algorithm>
#include <charconv>

#include "qkm/error.hpp"
#include "qkm/qsim.hpp"
#include "qkm/rng.hpp"

namespace qkm::qsim {

std::string to_string(Shots shots) { return shots.is_infinite() ? "inf" : std::to_string(*shots.count); }

Shots parse_shots(const std::string& text) {
  if (text == "inf" || text == "infinite") return Shots::infinite();
  std::uint64_t n = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc{} || ptr != text.data() + text.size() || n == 0) {
    throw ConfigError("shots must be a positive integer or 'inf', got '" + text + "'");
  }
  return Shots::finite(n);
}

std::uint64_t MeasurementRecord::count(const std::string& bits) const {
  const auto it = counts.find(bits);
  return it == counts.end() ? 0 : it->second;
}

double MeasurementRecord::frequency(const std::string& bits) const {
  return static_cast<double>(count(bits)) / static_cast<double>(shots);
}

std::string outcome_label(std::size_t outcome, std::size_t k) {
  std::string bits(k, '0');
  for (std::size_t i = 0; i < k; ++i) {
    if (outcome & (std::size_t{1} << (k - 1 - i))) bits[i] = '1';
  }
  return bits;
}

std::vector<double> marginal_probabilities(const StateVector& state, std::span<const int> qubits) {
  const int n = state.n_qubits();
  if (qubits.empty()) throw ContractViolation("no qubits to measure");
  for (int q : qubits) {
    if (q < 0 || q >= n) throw ContractViolation("measured qubit out of range");
  }
  const std::vector<double> born = state.probabilities();
  std::vector<double> marginal(std::size_t{1} << qubits.size(), 0.0);
  for (std::size_t idx = 0; idx < born.size(); ++idx) {
    std::size_t outcome = 0;
    for (int q : qubits) {
      outcome = (outcome << 1) | ((idx >> static_cast<unsigned>(n - 1 - q)) & 1u);
    }
    marginal[outcome] += born[idx];
  }
  return marginal;
}

MeasurementRecord sample_counts(const StateVector& state, std::span<const int> qubits, std::uint64_t shots,
                                std::uint64_t seed) {
  if (shots == 0) throw ContractViolation("sample_counts: shots must be >= 1");
  const std::vector<double> p = marginal_probabilities(state, qubits);

  std::vector<double> cumulative(p.size());
  double running = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) cumulative[b] = (running += p[b]);
  for (double& c : cumulative) c /= running;
  // outcomes with zero probability must never be drawn, even when u lands on a tie
  std::size_t last_nonzero = 0;
  for (std::size_t b = 0; b < p.size(); ++b) {
    if (p[b] > 0.0) last_nonzero = b;
  }

  std::vector<std::uint64_t> tally(p.size(), 0);
  RandomStream rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform();
    auto b = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                      cumulative.begin());
    ++tally[std::min(b, last_nonzero)];
  }

  MeasurementRecord record{shots, seed, {}};
  for (std::size_t b = 0; b < tally.size(); ++b) {
    if (tally[b] > 0) record.counts.emplace(outcome_label(b, qubits.size()), tally[b]);
  }
  return record;
}

}  // namespace qkm::qsim
