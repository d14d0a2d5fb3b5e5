#pragma once

// Configuration-driven experiment pipeline: dataset generation, quantum Gram matrices,
// cross-validated training, evaluation and plot-ready CSV output.
//
// Stages communicate only through files in the output directory, so each subcommand can
// be run on its own. All numbers are written in shortest round-trip form and no stage
// writes timestamps, so identical configs give byte-identical files.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qkm/channels.hpp"
#include "qkm/kernels.hpp"
#include "qkm/ml.hpp"
#include "qkm/nonmarkov.hpp"
#include "qkm/qsim.hpp"

namespace qkm::pipeline {

enum class FeatureSource { Exact, Shot };

/// Model identifiers used in config files and output names.
enum class ModelId { QSVR, QKRR, SVRRbf, KRRRbf };
std::string to_string(ModelId id);
ModelId parse_model(const std::string& text);
ml::ModelKind model_kind(ModelId id);
bool uses_quantum_kernel(ModelId id);

struct ExperimentConfig {
  channels::ChannelKind channel = channels::ChannelKind::AmplitudeDamping;
  /// Explicit control values (lambda/gamma0 for AD, alpha*tau for PD). When empty the
  /// sweep is `samples` evenly spaced values on [sweep_min, sweep_max].
  std::vector<double> sweep_values;
  double sweep_min = 0.05;
  double sweep_max = 3.0;
  int samples = 200;
  double gamma0 = 1.0;
  double tau = 1.0;
  /// Absolute time at which the channel angle is taken.
  double snapshot_time = 1.0;
  nonmarkov::TimeGrid grid;
  kernels::OverlapMethod method = kernels::OverlapMethod::InversionTest;
  kernels::KernelFnSpec kernel = kernels::KernelFnSpec::exponential(3.0);
  qsim::Shots shots = qsim::Shots::finite(8192);
  std::uint64_t seed = 7;
  std::vector<ModelId> models{ModelId::QSVR, ModelId::QKRR, ModelId::SVRRbf, ModelId::KRRRbf};
  std::vector<double> svr_C{0.1, 0.2, 0.4, 1.0, 10.0, 100.0};
  std::vector<double> svr_epsilon{1e-3, 1e-2};
  std::vector<double> krr_ridge{1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.2};
  std::vector<double> rbf_gamma{1.0, 10.0, 100.0};
  FeatureSource classical_features = FeatureSource::Exact;
  double test_fraction = 0.2;
  int folds = 5;
  double svr_tol = 1e-3;
  double svr_max_passes = 1e5;
  double jitter = ml::kDefaultJitter;
  double jitter_max = 10.0;
  int comparison_samples = 30;
  double comparison_C = 0.5;
  double comparison_epsilon = 0.01;
  std::string out_dir = "out";

  /// Defaults for a channel (sweep range and snapshot time differ between AD and PD).
  static ExperimentConfig defaults(channels::ChannelKind kind);

  /// Throws ConfigError naming the offending key.
  void validate() const;
  /// Control values of the sweep in order.
  std::vector<double> sweep() const;
  /// Channel parameters for one control value at time t.
  channels::ChannelParams channel_params(double control, double t) const;
  ml::FitOptions fit_options() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Flat "key = value" text, '#' starts a comment, lists are comma separated.
/// Keys not given take the defaults of the file's `channel` (AD when absent).
/// Unknown or repeated keys are ConfigErrors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every key, in a fixed order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

struct Sample {
  double control = 0.0;
  double decay = 0.0;
  double theta = 0.0;
  /// <sigma_x>, <sigma_y>, <sigma_z> of the reduced system state.
  std::array<double, 3> bloch_exact{};
  std::array<double, 3> bloch_shot{};
  double label = 0.0;
};

struct Dataset {
  channels::ChannelKind channel = channels::ChannelKind::AmplitudeDamping;
  std::vector<Sample> samples;

  std::vector<double> thetas() const;
  std::vector<double> labels() const;
  ml::FeatureMatrix features(FeatureSource source) const;
};

/// Builds one sample per sweep value; Bloch features from shot sampling use seeds derived
/// from (seed, sample, axis).
Dataset generate_dataset(const ExperimentConfig& config);
/// Same protocol with a different number of evenly spaced sweep values.
Dataset generate_dataset(const ExperimentConfig& config, int samples);

/// Estimates <sigma_axis> on the system qubit of the channel circuit from `shots` draws.
double sampled_bloch(channels::ChannelKind kind, double theta, qsim::Pauli axis, std::uint64_t shots,
                     std::uint64_t seed);

void write_dataset_csv(std::ostream& os, const Dataset& dataset);
Dataset read_dataset_csv(const std::filesystem::path& path);

enum class Stage { Generate, Gram, Train, Evaluate, Sweep, Report };
std::string to_string(Stage stage);

/// Runs one stage: reads the inputs it needs from config.out_dir and writes its outputs
/// there atomically (all or nothing). Throws StageError.
void run_stage(Stage stage, const ExperimentConfig& config);
/// generate, gram, train, evaluate, sweep, report in order; on any failure nothing new is
/// left in the output directory. Throws StageError.
void run_experiment(const ExperimentConfig& config);

enum class Figure { Fig3, Fig4, Fig5, Fig6 };
std::string to_string(Figure figure);
Figure parse_figure(const std::string& text);

/// Plot-ready CSVs from earlier outputs (the Report stage emits all four). A missing input
/// is a StageError naming the stage that produces it.
void emit_plot_data(const ExperimentConfig& config, std::span<const Figure> figures);

/// Output files each stage produces.
std::vector<std::string> stage_outputs(Stage stage, const ExperimentConfig& config);

}  // namespace qkm::pipeline
