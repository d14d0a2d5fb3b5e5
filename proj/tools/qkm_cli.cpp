// qkm: command-line driver for the non-Markovianity regression pipeline.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qkm/error.hpp"
#include "qkm/pipeline.hpp"
#include "qkm/simd.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::string channel;
  std::optional<std::uint64_t> seed;
  std::string shots;
  std::string out;
  std::string simd;
};

qkm::pipeline::ExperimentConfig resolve(const Overrides& o) {
  using namespace qkm;
  pipeline::ExperimentConfig config;
  if (!o.config_path.empty()) {
    config = pipeline::load_config(o.config_path);
    if (!o.channel.empty() && channels::parse_channel(o.channel) != config.channel) {
      throw ConfigError("--channel disagrees with the channel in " + o.config_path);
    }
  } else if (!o.channel.empty()) {
    config = pipeline::ExperimentConfig::defaults(channels::parse_channel(o.channel));
  }
  if (o.seed) config.seed = *o.seed;
  if (!o.shots.empty()) config.shots = qsim::parse_shots(o.shots);
  if (!o.out.empty()) config.out_dir = o.out;
  if (!o.simd.empty()) {
    const auto isa = simd::parse_isa(o.simd);
    if (!isa) throw ConfigError("unknown --simd value '" + o.simd + "' (scalar|avx2|neon)");
    simd::force_isa(*isa);
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace qkm;
  CLI::App app{"Quantum-kernel regression of non-Markovianity for damping channels"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config_path, "Experiment config file (key = value)")->check(CLI::ExistingFile);
  app.add_option("--channel", o.channel, "AD or PD defaults when no config file is given");
  app.add_option("--seed", o.seed, "Master seed");
  app.add_option("--shots", o.shots, "Measurement shots per estimate, or 'inf' for exact probabilities");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--simd", o.simd, "Force a kernel ISA: scalar, avx2 or neon");

  struct Command {
    const char* name;
    const char* help;
    std::optional<pipeline::Stage> stage;
  };
  const std::vector<Command> commands{
      {"generate", "Sample the sweep and label it (dataset.csv)", pipeline::Stage::Generate},
      {"gram", "Estimate the quantum Gram matrix (gram.csv, overlaps.csv)", pipeline::Stage::Gram},
      {"train", "Split, grid-search and fit every configured model", pipeline::Stage::Train},
      {"evaluate", "Predict and score (predictions.csv, summary.txt)", pipeline::Stage::Evaluate},
      {"sweep", "Kernel-circuit and kernel-function comparisons", pipeline::Stage::Sweep},
      {"report", "Plot-ready CSVs fig3..fig6", pipeline::Stage::Report},
      {"run", "All stages in order", std::nullopt},
      {"show-config", "Print the resolved configuration", std::nullopt},
  };
  std::vector<std::string> figures;
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    if (std::string(c.name) == "report") {
      sub->add_option("--figure", figures, "Subset of fig3, fig4, fig5, fig6 (default: all)");
    }
    subs.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const auto config = resolve(o);
    for (std::size_t k = 0; k < commands.size(); ++k) {
      if (!subs[k]->parsed()) continue;
      const std::string name = commands[k].name;
      if (name == "show-config") {
        std::cout << pipeline::serialize_config(config);
      } else if (name == "run") {
        pipeline::run_experiment(config);
        std::cout << "wrote outputs to " << config.out_dir << '\n';
      } else if (name == "report" && !figures.empty()) {
        std::vector<pipeline::Figure> which;
        for (const auto& f : figures) which.push_back(pipeline::parse_figure(f));
        pipeline::emit_plot_data(config, which);
      } else {
        pipeline::run_stage(*commands[k].stage, config);
      }
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: [config] " << e.what() << '\n';
    return 2;
  }
  return 0;
}
