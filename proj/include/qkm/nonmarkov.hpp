#pragma once

// Entanglement-based degree of non-Markovianity: one half of a Bell pair passes through
// the channel, and every increase of its concurrence over time counts as memory.

#include <span>
#include <vector>

#include "qkm/channels.hpp"
#include "qkm/qsim.hpp"

namespace qkm::nonmarkov {

/// Wootters concurrence of a two-qubit state, in [0, 1].
double concurrence(const qsim::DensityMatrix& rho);

struct EntanglementTrajectory {
  std::vector<double> times;
  std::vector<double> values;

  /// Throws ContractViolation unless lengths match, times strictly increase and values lie in [0, 1].
  void validate() const;
};

/// Concurrence of (I (x) Phi_t) |Phi+><Phi+| at every time in the grid.
EntanglementTrajectory entanglement_trajectory(const channels::ChannelParams& params,
                                               std::span<const double> times);

/// Sum of the positive increments of the trajectory (>= 0).
double nm_degree(const EntanglementTrajectory& trajectory);

struct TimeGrid {
  int points = 2000;
  /// Horizon in units of 1/gamma0 (AD) or tau (PD).
  double horizon = 20.0;

  bool operator==(const TimeGrid&) const = default;
};

/// Uniform grid on [0, horizon * characteristic time], endpoints included.
std::vector<double> time_grid(const channels::ChannelParams& params, const TimeGrid& spec = {});

/// nm_degree of the trajectory on time_grid(params, spec).
double nm_label(const channels::ChannelParams& params, const TimeGrid& spec = {});

}  // namespace qkm::nonmarkov
