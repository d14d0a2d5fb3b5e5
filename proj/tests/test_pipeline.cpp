#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "qkm/csv.hpp"
#include "qkm/error.hpp"
#include "qkm/pipeline.hpp"

using namespace qkm;
using namespace qkm::pipeline;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("qkm_test_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

ExperimentConfig small_config(channels::ChannelKind kind, const fs::path& out) {
  auto c = ExperimentConfig::defaults(kind);
  c.samples = 24;
  c.shots = qsim::Shots::finite(512);
  c.grid = {400, 20};
  c.folds = 3;
  c.svr_C = {1.0, 10.0};
  c.svr_epsilon = {1e-2};
  c.krr_ridge = {1e-3, 0.1};
  c.rbf_gamma = {10.0};
  c.comparison_samples = 12;
  c.out_dir = out.string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::map<std::string, std::string> directory_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

}  // namespace

TEST_CASE("config round-trip") {
  for (auto kind : {channels::ChannelKind::AmplitudeDamping, channels::ChannelKind::PhaseDamping}) {
    auto c = ExperimentConfig::defaults(kind);
    CHECK(parse_config(serialize_config(c)) == c);
    c.sweep_values = {0.5, 1.5, 4};
    c.shots = qsim::Shots::infinite();
    c.method = kernels::OverlapMethod::BellBasis;
    c.kernel = kernels::KernelFnSpec::polynomial(0.1, 3);
    c.models = {ModelId::QKRR};
    c.classical_features = FeatureSource::Shot;
    c.seed = 123456789012345ULL;
    c.jitter = 1.0 / 3.0;
    CHECK(parse_config(serialize_config(c)) == c);
  }
}

TEST_CASE("config parsing") {
  const auto c = parse_config("# comment\nchannel = PD\nsamples = 10  # trailing\nsvr_C = 1, 2\n");
  CHECK(c.channel == channels::ChannelKind::PhaseDamping);
  CHECK(c.samples == 10);
  CHECK(c.svr_C == std::vector<double>{1.0, 2.0});
  CHECK(c.snapshot_time == ExperimentConfig::defaults(channels::ChannelKind::PhaseDamping).snapshot_time);
  CHECK_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("samples = 1\nsamples = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("samples = ten\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("test_fraction = 1.5\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("snapshot_time = 0\n").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("sweep_values = 1, -2\n").validate(), ConfigError);
  try {
    parse_config("unknown_key = 3\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("unknown_key") != std::string::npos);
  }
}

TEST_CASE("single-value sweeps give the expected labels") {
  auto c = ExperimentConfig::defaults(channels::ChannelKind::AmplitudeDamping);
  c.shots = qsim::Shots::finite(256);
  c.sweep_values = {4.0};
  const auto markov = generate_dataset(c);
  REQUIRE(markov.samples.size() == 1);
  CHECK(markov.samples[0].label <= 1e-6);
  c.sweep_values = {1.0};
  CHECK(generate_dataset(c).samples[0].label > 0.0);
}

TEST_CASE("dataset invariants and the x-z plane of AD") {
  auto c = ExperimentConfig::defaults(channels::ChannelKind::AmplitudeDamping);
  c.samples = 30;
  c.grid = {400, 20};
  c.shots = qsim::Shots::finite(1024);
  const auto ds = generate_dataset(c);
  for (const auto& s : ds.samples) {
    CHECK(s.label >= 0.0);
    CHECK(s.theta >= 0.0);
    CHECK(s.theta <= 2 * std::acos(-1.0));
    CHECK(std::abs(s.bloch_exact[1]) < 1e-12);
    for (int a = 0; a < 3; ++a) {
      CHECK(std::abs(s.bloch_exact[static_cast<std::size_t>(a)]) <= 1.0);
      CHECK(std::abs(s.bloch_shot[static_cast<std::size_t>(a)]) <= 1.0);
      CHECK(std::abs(s.bloch_shot[static_cast<std::size_t>(a)] - s.bloch_exact[static_cast<std::size_t>(a)]) <=
            5 / std::sqrt(1024.0));
    }
  }
  std::ostringstream a, b;
  write_dataset_csv(a, ds);
  write_dataset_csv(b, generate_dataset(c));
  CHECK(a.str() == b.str());

  auto bad = c;
  bad.sweep_values = {2.0, 0.0};
  CHECK_THROWS_AS(generate_dataset(bad), ConfigError);
}

TEST_CASE("full run: outputs, consistency, figures and determinism") {
  TempDir first("run1"), second("run2");
  const auto c1 = small_config(channels::ChannelKind::PhaseDamping, first.path);
  auto c2 = c1;
  c2.out_dir = second.path.string();
  run_experiment(c1);
  run_experiment(c2);

  const auto files1 = directory_contents(first.path);
  const auto files2 = directory_contents(second.path);
  CHECK(files1.size() == files2.size());
  for (const auto& [name, body] : files1) {
    CAPTURE(name);
    REQUIRE(files2.count(name) == 1);
    CHECK(body == files2.at(name));
  }
  for (Stage s : {Stage::Generate, Stage::Gram, Stage::Train, Stage::Evaluate, Stage::Sweep, Stage::Report}) {
    for (const auto& name : stage_outputs(s, c1)) CHECK(files1.count(name) == 1);
  }
  CHECK_FALSE(fs::exists(first.path / ".staging"));

  // predictions recomputed from the stored models
  const auto gram = kernels::read_gram_csv((first.path / "gram.csv").string());
  const auto ds = read_dataset_csv(first.path / "dataset.csv");
  const auto pred = csv::read_table((first.path / "predictions.csv").string());
  for (ModelId id : c1.models) {
    CAPTURE(to_string(id));
    const auto model = csv::read_table((first.path / ("model_" + to_string(id) + ".csv")).string());
    const double b = csv::parse_double(model.meta("intercept"));
    std::vector<std::size_t> train;
    std::vector<double> coeffs;
    for (const auto& r : model.rows) {
      train.push_back(std::stoull(r[model.column("train_index")]));
      coeffs.push_back(csv::parse_double(r[model.column("coeff")]));
    }
    Eigen::MatrixXd rows;
    if (uses_quantum_kernel(id)) {
      rows = ml::submatrix(gram.values, std::vector<ml::Index>(
                                            [&] {
                                              std::vector<ml::Index> all(ds.samples.size());
                                              for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
                                              return all;
                                            }()),
                           train);
    } else {
      const auto f = ds.features(c1.classical_features);
      rows = ml::rbf_cross(f, ml::gather_rows(f, train), csv::parse_double(model.meta("gamma")));
    }
    std::size_t checked = 0;
    for (const auto& r : pred.rows) {
      if (r[pred.column("model")] != to_string(id)) continue;
      const auto i = static_cast<Eigen::Index>(std::stoull(r[pred.column("index")]));
      double f = b;
      for (std::size_t k = 0; k < train.size(); ++k) f += coeffs[k] * rows(i, static_cast<Eigen::Index>(k));
      CHECK(std::abs(f - csv::parse_double(r[pred.column("prediction")])) <= 1e-12);
      ++checked;
    }
    CHECK(checked == ds.samples.size());
  }

  const auto fig3 = csv::read_table((first.path / "fig3.csv").string());
  CHECK(fig3.header ==
        std::vector<std::string>{"theta", "sx_exact", "sy_exact", "sz_exact", "sx_shot", "sy_shot", "sz_shot"});
  CHECK(fig3.rows.size() == ds.samples.size());
  const auto fig4 = csv::read_table((first.path / "fig4.csv").string());
  CHECK(fig4.rows.size() == static_cast<std::size_t>(c1.comparison_samples) * 4);
  const auto fig5 = csv::read_table((first.path / "fig5.csv").string());
  CHECK(fig5.rows.size() == ds.samples.size() * c1.models.size());
  const auto fig6 = csv::read_table((first.path / "fig6.csv").string());
  CHECK(fig6.header == std::vector<std::string>{"function", "theta", "nm_true", "nm_pred"});
}

TEST_CASE("stages run one by one match the full run") {
  TempDir staged("staged"), whole("whole");
  auto c = small_config(channels::ChannelKind::AmplitudeDamping, staged.path);
  c.models = {ModelId::QSVR, ModelId::SVRRbf};
  for (Stage s : {Stage::Generate, Stage::Gram, Stage::Train, Stage::Evaluate, Stage::Sweep, Stage::Report}) {
    run_stage(s, c);
  }
  auto w = c;
  w.out_dir = whole.path.string();
  run_experiment(w);
  const auto a = directory_contents(staged.path);
  const auto b = directory_contents(whole.path);
  CHECK(a.size() == b.size());
  for (const auto& [name, body] : a) {
    CAPTURE(name);
    CHECK(body == b.at(name));
  }
}

TEST_CASE("missing inputs name the producing stage and leave nothing behind") {
  TempDir dir("missing");
  const auto c = small_config(channels::ChannelKind::AmplitudeDamping, dir.path);
  try {
    run_stage(Stage::Train, c);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "train");
    const std::string what = e.what();
    CHECK(what.find("dataset.csv") != std::string::npos);
    CHECK(what.find("generate") != std::string::npos);
  }
  CHECK((!fs::exists(dir.path) || fs::is_empty(dir.path)));

  const std::array<Figure, 1> fig{Figure::Fig4};
  try {
    emit_plot_data(c, fig);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(std::string(e.what()).find("sweep") != std::string::npos);
  }
}

TEST_CASE("a failing run leaves no partial outputs") {
  TempDir dir("failing");
  auto c = small_config(channels::ChannelKind::AmplitudeDamping, dir.path);
  // the train stage fails: more folds than training samples
  c.folds = 100;
  c.samples = 10;
  fs::create_directories(dir.path);
  std::ofstream(dir.path / "keep.txt") << "existing\n";
  CHECK_THROWS_AS(run_experiment(c), StageError);
  const auto left = directory_contents(dir.path);
  CHECK(left.size() == 1);
  CHECK(left.count("keep.txt") == 1);
}

TEST_CASE("bad sweep values are reported as configuration errors") {
  TempDir dir("badsweep");
  auto c = small_config(channels::ChannelKind::PhaseDamping, dir.path);
  c.sweep_values = {0.5, -1.0};
  try {
    run_experiment(c);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(std::string(e.what()).find("sweep_values") != std::string::npos);
  }
}

TEST_CASE("model and figure names") {
  for (auto id : {ModelId::QSVR, ModelId::QKRR, ModelId::SVRRbf, ModelId::KRRRbf}) CHECK(parse_model(to_string(id)) == id);
  CHECK_THROWS_AS(parse_model("lasso"), ConfigError);
  CHECK(parse_figure("fig5") == Figure::Fig5);
  CHECK_THROWS_AS(parse_figure("fig7"), ConfigError);
}
