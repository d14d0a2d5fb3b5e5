#pragma once

// Non-Markovian amplitude-damping (AD) and phase-damping (PD) qubit channels:
// closed-form decay laws, the control angles that drive their two-qubit circuits, and
// the Kraus representation used as the exact reference.

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qkm/qsim.hpp"

namespace qkm::channels {

enum class ChannelKind { AmplitudeDamping, PhaseDamping };

std::string to_string(ChannelKind kind);
/// Accepts "AD"/"PD" (case-insensitive) and the long names. Throws ConfigError.
ChannelKind parse_channel(const std::string& text);

/// Qubit coupled resonantly to a Lorentzian bosonic bath.
/// lambda: bath spectral width, gamma0: coupling rate, t: evolution time.
struct ADParams {
  double lambda;
  double gamma0;
  double t;

  void validate() const;
};

/// Qubit dephased by random telegraph noise of amplitude alpha and switching time tau.
struct PDParams {
  double alpha;
  double tau;
  double t;

  void validate() const;
};

using ChannelParams = std::variant<ADParams, PDParams>;

ChannelKind kind_of(const ChannelParams& params) noexcept;
/// Copy of params with the time replaced.
ChannelParams at_time(const ChannelParams& params, double t);

/// Excited-state survival p(t) in [0, 1].
///   p = e^{-lambda t} [ (lambda/d) sinh(d t/2) + cosh(d t/2) ]^2,  d = sqrt(lambda^2 - 2 gamma0 lambda)
/// evaluated on the hyperbolic (lambda > 2 gamma0), degenerate (lambda = 2 gamma0) or
/// oscillatory (lambda < 2 gamma0) branch in real arithmetic.
double ad_decay(const ADParams& params);

/// Coherence factor Lambda(t) in [-1, 1].
///   Lambda = e^{-t/2tau} [ cos(mu t/2tau) + sin(mu t/2tau)/mu ],  mu = sqrt((4 alpha tau)^2 - 1)
/// with the hyperbolic branch for 4 alpha tau < 1 and the limit e^{-x}(1 + x) at 4 alpha tau = 1.
double pd_decay(const PDParams& params);

/// Decay factor of whichever channel params describe.
double decay(const ChannelParams& params);

/// theta_a = 2 arccos(sqrt(p)), p in [0, 1].
double theta_ad(double p);
/// theta_p = 2 arccos(Lambda), Lambda in [-1, 1].
double theta_pd(double lambda);
double theta_for(ChannelKind kind, double decay_value);

/// Two-qubit channel circuit, system = qubit 0, environment ancilla = qubit 1.
///   AD: H(0), CRy(theta) 0 -> 1, CNOT 1 -> 0
///   PD: H(0), CRy(theta) 0 -> 1
qsim::Circuit build_channel_circuit(ChannelKind kind, double theta);

inline constexpr int kSystemQubit = 0;
inline constexpr int kEnvironmentQubit = 1;

struct KrausSet {
  std::vector<Eigen::Matrix2cd> operators;

  /// max |sum_i M_i^dagger M_i - I|
  double completeness_error() const;
};

///   AD: M0 = |0><0| + sqrt(p)|1><1|,  M1 = sqrt(1-p)|0><1|
///   PD: M0 = sqrt((1+L)/2) I,          M1 = sqrt((1-L)/2) sigma_z
KrausSet kraus_set(ChannelKind kind, double decay_value);

/// sum_i M_i rho M_i^dagger, with the Kraus operators acting on `qubit` of rho.
qsim::DensityMatrix apply_kraus(const qsim::DensityMatrix& rho, const KrausSet& kraus, int qubit = 0);

}  // namespace qkm::channels
