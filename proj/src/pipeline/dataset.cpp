#include <array>
#include <fstream>
#include <ostream>

#include "qkm/csv.hpp"
#include "qkm/error.hpp"
#include "qkm/pipeline.hpp"
#include "qkm/rng.hpp"

namespace qkm::pipeline {
namespace {

constexpr std::array<const char*, 11> kColumns{"index",    "control",  "decay",    "theta",    "label",   "sx_exact",
                                               "sy_exact", "sz_exact", "sx_shot",  "sy_shot",  "sz_shot"};

Dataset build(const ExperimentConfig& config, const std::vector<double>& sweep, std::uint64_t seed) {
  Dataset ds;
  ds.channel = config.channel;
  ds.samples.reserve(sweep.size());
  for (std::size_t k = 0; k < sweep.size(); ++k) {
    const double g = sweep[k];
    Sample s;
    s.control = g;
    try {
      s.decay = channels::decay(config.channel_params(g, config.snapshot_time));
      s.theta = channels::theta_for(config.channel, s.decay);
      s.label = nonmarkov::nm_label(config.channel_params(g, 0.0), config.grid);
    } catch (const std::exception& e) {
      throw ConfigError("sweep value " + csv::format_double(g) + ": " + e.what());
    }
    const auto rho = kernels::reduced_system_state(config.channel, s.theta);
    constexpr std::array<qsim::Pauli, 3> axes{qsim::Pauli::X, qsim::Pauli::Y, qsim::Pauli::Z};
    for (std::size_t a = 0; a < 3; ++a) {
      s.bloch_exact[a] = qsim::pauli_expectation(rho, axes[a], 0);
      s.bloch_shot[a] = config.shots.is_infinite()
                            ? s.bloch_exact[a]
                            : sampled_bloch(config.channel, s.theta, axes[a], *config.shots.count,
                                            derive_seed(seed, {0x626c6f6368ULL, k, a}));
    }
    ds.samples.push_back(s);
  }
  return ds;
}

}  // namespace

std::vector<double> Dataset::thetas() const {
  std::vector<double> out;
  for (const auto& s : samples) out.push_back(s.theta);
  return out;
}

std::vector<double> Dataset::labels() const {
  std::vector<double> out;
  for (const auto& s : samples) out.push_back(s.label);
  return out;
}

ml::FeatureMatrix Dataset::features(FeatureSource source) const {
  ml::FeatureMatrix f(static_cast<Eigen::Index>(samples.size()), 3);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& b = source == FeatureSource::Exact ? samples[i].bloch_exact : samples[i].bloch_shot;
    for (Eigen::Index a = 0; a < 3; ++a) f(static_cast<Eigen::Index>(i), a) = b[static_cast<std::size_t>(a)];
  }
  return f;
}

double sampled_bloch(channels::ChannelKind kind, double theta, qsim::Pauli axis, std::uint64_t shots,
                     std::uint64_t seed) {
  auto circuit = channels::build_channel_circuit(kind, theta);
  const int s = channels::kSystemQubit;
  if (axis == qsim::Pauli::X) {
    circuit.append(qsim::Gate::h(s));
  } else if (axis == qsim::Pauli::Y) {
    // S^dagger = (T^dagger)^2, then H: the Y eigenbasis onto the computational basis
    circuit.append(qsim::Gate::tdg(s));
    circuit.append(qsim::Gate::tdg(s));
    circuit.append(qsim::Gate::h(s));
  }
  const std::array<int, 1> measured{s};
  const auto record = qsim::sample_counts(qsim::run_circuit(circuit), measured, shots, seed);
  return record.frequency("0") - record.frequency("1");
}

Dataset generate_dataset(const ExperimentConfig& config) {
  config.validate();
  return build(config, config.sweep(), derive_seed(config.seed, {0x64617461ULL}));
}

Dataset generate_dataset(const ExperimentConfig& config, int samples) {
  ExperimentConfig c = config;
  c.sweep_values.clear();
  c.samples = samples;
  c.validate();
  return build(c, c.sweep(), derive_seed(config.seed, {0x64617461ULL, static_cast<std::uint64_t>(samples)}));
}

void write_dataset_csv(std::ostream& os, const Dataset& dataset) {
  csv::Table t;
  t.metadata = {{"channel", channels::to_string(dataset.channel)}};
  t.header.assign(kColumns.begin(), kColumns.end());
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& s = dataset.samples[i];
    std::vector<std::string> row{std::to_string(i), csv::format_double(s.control), csv::format_double(s.decay),
                                 csv::format_double(s.theta), csv::format_double(s.label)};
    for (double v : s.bloch_exact) row.push_back(csv::format_double(v));
    for (double v : s.bloch_shot) row.push_back(csv::format_double(v));
    t.rows.push_back(std::move(row));
  }
  csv::write_table(os, t);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const auto t = csv::read_table(path.string());
  Dataset ds;
  ds.channel = channels::parse_channel(t.meta("channel"));
  std::array<std::size_t, 11> col{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) col[c] = t.column(kColumns[c]);
  for (const auto& row : t.rows) {
    Sample s;
    s.control = csv::parse_double(row[col[1]]);
    s.decay = csv::parse_double(row[col[2]]);
    s.theta = csv::parse_double(row[col[3]]);
    s.label = csv::parse_double(row[col[4]]);
    for (std::size_t a = 0; a < 3; ++a) {
      s.bloch_exact[a] = csv::parse_double(row[col[5 + a]]);
      s.bloch_shot[a] = csv::parse_double(row[col[8 + a]]);
    }
    ds.samples.push_back(s);
  }
  return ds;
}

}  // namespace qkm::pipeline
