#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "qkm/csv.hpp"
#include "qkm/error.hpp"
#include "qkm/pipeline.hpp"
#include "qkm/rng.hpp"

namespace qkm::pipeline {
namespace fs = std::filesystem;
namespace {

constexpr std::uint64_t kTagGram = 0x6772616dULL;
constexpr std::uint64_t kTagSplit = 0x73706c6974ULL;
constexpr std::uint64_t kTagCv = 0x6376ULL;
constexpr std::uint64_t kTagCompare = 0x636d70ULL;

const std::array<kernels::OverlapMethod, 4> kCircuits{kernels::OverlapMethod::SwapTest,
                                                      kernels::OverlapMethod::InversionTest,
                                                      kernels::OverlapMethod::AncillaBased,
                                                      kernels::OverlapMethod::BellBasis};

// Kernel functions of the function comparison.
std::vector<kernels::KernelFnSpec> comparison_functions() {
  return {kernels::KernelFnSpec::linear(0.0), kernels::KernelFnSpec::polynomial(0.1, 3),
          kernels::KernelFnSpec::exponential(3.0)};
}

// Outputs are written into a private directory and moved into place only on success.
class Workspace {
 public:
  explicit Workspace(fs::path out_dir) : out_(std::move(out_dir)), staging_(out_ / ".staging") {
    fs::create_directories(out_);
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(staging_, ec);
  }

  std::ofstream create(const std::string& name) {
    if (std::find(written_.begin(), written_.end(), name) == written_.end()) written_.push_back(name);
    std::ofstream os(staging_ / name);
    if (!os) throw ConfigError("cannot write " + (staging_ / name).string());
    return os;
  }

  fs::path locate(const std::string& name, Stage producer) const {
    if (fs::exists(staging_ / name)) return staging_ / name;
    if (fs::exists(out_ / name)) return out_ / name;
    throw ConfigError("missing input " + name + "; run the '" + to_string(producer) + "' stage first");
  }

  void commit() {
    for (const auto& name : written_) fs::rename(staging_ / name, out_ / name);
    written_.clear();
  }

 private:
  fs::path out_;
  fs::path staging_;
  std::vector<std::string> written_;
};

std::string fmt(double v) { return csv::format_double(v); }

void write(Workspace& ws, const std::string& name, const csv::Table& table) {
  auto os = ws.create(name);
  csv::write_table(os, table);
  if (!os) throw ConfigError("write failed: " + name);
}

std::string model_file(ModelId id) { return "model_" + to_string(id) + ".csv"; }

std::vector<ml::HyperParams> grid_for(ModelId id, const ExperimentConfig& c) {
  auto base = model_kind(id) == ml::ModelKind::SVR ? ml::svr_grid(c.svr_C, c.svr_epsilon) : ml::krr_grid(c.krr_ridge);
  if (uses_quantum_kernel(id)) return base;
  return ml::with_gammas(base, c.rbf_gamma);
}

ml::CVOptions cv_options(const ExperimentConfig& c) {
  ml::CVOptions o;
  o.folds = c.folds;
  o.seed = derive_seed(c.seed, {kTagCv});
  o.fit = c.fit_options();
  return o;
}

struct SplitSets {
  std::vector<ml::Index> train;
  std::vector<ml::Index> test;
};

SplitSets read_split(const fs::path& path) {
  const auto t = csv::read_table(path.string());
  SplitSets s;
  const auto ci = t.column("index");
  const auto cs = t.column("set");
  for (const auto& row : t.rows) {
    const auto idx = static_cast<ml::Index>(std::stoull(row[ci]));
    (row[cs] == "train" ? s.train : s.test).push_back(idx);
  }
  return s;
}

struct StoredModel {
  ModelId id;
  ml::HyperParams params;
  std::vector<ml::Index> train;
  ml::TrainedModel model;
};

csv::Table model_table(ModelId id, const ml::HyperParams& hp, std::span<const ml::Index> train,
                       const ml::TrainedModel& model) {
  csv::Table t;
  t.metadata = {{"model", to_string(id)},       {"kind", ml::to_string(hp.kind)}, {"C", fmt(hp.C)},
                {"epsilon", fmt(hp.epsilon)},   {"ridge", fmt(hp.ridge)},         {"gamma", fmt(hp.gamma)}};
  const std::vector<double>* coeffs = nullptr;
  if (const auto* svr = std::get_if<ml::SVRModel>(&model)) {
    t.metadata.emplace_back("intercept", fmt(svr->intercept));
    t.metadata.emplace_back("support_vectors", std::to_string(svr->support.size()));
    t.metadata.emplace_back("iterations", std::to_string(svr->iterations));
    t.metadata.emplace_back("kkt_gap", fmt(svr->kkt_gap));
    coeffs = &svr->dual_coeffs;
  } else {
    const auto& krr = std::get<ml::KRRModel>(model);
    t.metadata.emplace_back("intercept", fmt(0.0));
    t.metadata.emplace_back("jitter", fmt(krr.jitter));
    t.metadata.emplace_back("residual", fmt(krr.residual));
    coeffs = &krr.coeffs;
  }
  t.header = {"train_index", "coeff"};
  for (std::size_t k = 0; k < train.size(); ++k) t.rows.push_back({std::to_string(train[k]), fmt((*coeffs)[k])});
  return t;
}

StoredModel read_model(const fs::path& path) {
  const auto t = csv::read_table(path.string());
  StoredModel m;
  m.id = parse_model(t.meta("model"));
  m.params.kind = model_kind(m.id);
  m.params.C = csv::parse_double(t.meta("C"));
  m.params.epsilon = csv::parse_double(t.meta("epsilon"));
  m.params.ridge = csv::parse_double(t.meta("ridge"));
  m.params.gamma = csv::parse_double(t.meta("gamma"));
  std::vector<double> coeffs;
  for (const auto& row : t.rows) {
    m.train.push_back(static_cast<ml::Index>(std::stoull(row[t.column("train_index")])));
    coeffs.push_back(csv::parse_double(row[t.column("coeff")]));
  }
  if (m.params.kind == ml::ModelKind::SVR) {
    ml::SVRModel svr;
    svr.dual_coeffs = std::move(coeffs);
    svr.intercept = csv::parse_double(t.meta("intercept"));
    svr.C = m.params.C;
    svr.epsilon = m.params.epsilon;
    for (std::size_t k = 0; k < svr.dual_coeffs.size(); ++k) {
      if (svr.dual_coeffs[k] != 0.0) svr.support.push_back(k);
    }
    m.model = std::move(svr);
  } else {
    ml::KRRModel krr;
    krr.coeffs = std::move(coeffs);
    krr.ridge = m.params.ridge;
    krr.jitter = csv::parse_double(t.meta("jitter"));
    m.model = std::move(krr);
  }
  return m;
}

// Kernel rows of every sample against the model's training points.
Eigen::MatrixXd kernel_rows(const StoredModel& m, const Dataset& ds, const Workspace& ws,
                            const ExperimentConfig& c) {
  std::vector<ml::Index> all(ds.samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (uses_quantum_kernel(m.id)) {
    const auto gram = kernels::read_gram_csv(ws.locate("gram.csv", Stage::Gram).string());
    if (gram.size() != static_cast<Eigen::Index>(ds.samples.size())) {
      throw ConfigError("gram.csv does not match dataset.csv in size");
    }
    return ml::submatrix(gram.values, all, m.train);
  }
  const auto features = ds.features(c.classical_features);
  return ml::rbf_cross(features, ml::gather_rows(features, m.train), m.params.gamma);
}

// ---------------------------------------------------------------- stages

void stage_generate(const ExperimentConfig& c, Workspace& ws) {
  const Dataset ds = generate_dataset(c);
  auto os = ws.create("dataset.csv");
  write_dataset_csv(os, ds);
  auto portable = c;
  portable.out_dir = ExperimentConfig{}.out_dir;
  auto cfg = ws.create("config.cfg");
  cfg << serialize_config(portable);
}

void stage_gram(const ExperimentConfig& c, Workspace& ws) {
  const Dataset ds = read_dataset_csv(ws.locate("dataset.csv", Stage::Generate));
  const auto thetas = ds.thetas();
  const auto gram =
      kernels::gram_matrix(thetas, ds.channel, c.method, c.kernel, c.shots, derive_seed(c.seed, {kTagGram}));
  {
    auto os = ws.create("gram.csv");
    kernels::write_gram_csv(os, gram);
  }
  kernels::GramMatrix raw = gram;
  raw.fn = kernels::KernelFnSpec::linear(0.0);
  raw.values = gram.overlaps;
  auto os = ws.create("overlaps.csv");
  kernels::write_gram_csv(os, raw);
}

void stage_train(const ExperimentConfig& c, Workspace& ws) {
  const Dataset ds = read_dataset_csv(ws.locate("dataset.csv", Stage::Generate));
  const auto y = ds.labels();
  const auto split = ml::train_test_split(ds.samples.size(), c.test_fraction, derive_seed(c.seed, {kTagSplit}));
  csv::Table split_table;
  split_table.header = {"index", "set"};
  {
    std::vector<std::string> sets(ds.samples.size(), "train");
    for (auto i : split.test) sets[i] = "test";
    for (std::size_t i = 0; i < sets.size(); ++i) split_table.rows.push_back({std::to_string(i), sets[i]});
  }
  write(ws, "split.csv", split_table);

  const auto y_train = ml::gather(y, split.train);
  std::optional<Eigen::MatrixXd> quantum_train;
  const auto features = ml::gather_rows(ds.features(c.classical_features), split.train);

  csv::Table cv;
  cv.metadata = {{"folds", std::to_string(c.folds)}, {"seed", std::to_string(cv_options(c).seed)}};
  cv.header = {"model", "params", "mean_mse"};
  for (int f = 0; f < c.folds; ++f) cv.header.push_back("fold" + std::to_string(f + 1) + "_mse");
  cv.header.push_back("best");

  for (ModelId id : c.models) {
    const auto grid = grid_for(id, c);
    ml::CVReport report;
    ml::TrainedModel model;
    if (uses_quantum_kernel(id)) {
      if (!quantum_train) {
        const auto gram = kernels::read_gram_csv(ws.locate("gram.csv", Stage::Gram).string());
        if (gram.size() != static_cast<Eigen::Index>(ds.samples.size())) {
          throw ConfigError("gram.csv does not match dataset.csv in size");
        }
        quantum_train = ml::submatrix(gram.values, split.train, split.train);
      }
      report = ml::grid_search_cv(*quantum_train, y_train, grid, cv_options(c));
      model = ml::fit(*quantum_train, y_train, report.best, c.fit_options());
    } else {
      report = ml::grid_search_cv(features, y_train, grid, cv_options(c));
      model = ml::fit(ml::rbf_gram(features, report.best.gamma), y_train, report.best, c.fit_options());
    }
    for (const auto& s : report.scores) {
      std::vector<std::string> row{to_string(id), ml::describe(s.params), fmt(s.mean_mse)};
      for (double m : s.fold_mse) row.push_back(fmt(m));
      row.push_back(s.params == report.best ? "1" : "0");
      cv.rows.push_back(std::move(row));
    }
    write(ws, model_file(id), model_table(id, report.best, split.train, model));
  }
  write(ws, "cv_report.csv", cv);
}

void stage_evaluate(const ExperimentConfig& c, Workspace& ws) {
  const Dataset ds = read_dataset_csv(ws.locate("dataset.csv", Stage::Generate));
  const auto split = read_split(ws.locate("split.csv", Stage::Train));
  const auto cv = csv::read_table(ws.locate("cv_report.csv", Stage::Train).string());
  const auto y = ds.labels();

  csv::Table pred;
  pred.header = {"model", "index", "set", "theta", "label", "prediction"};
  std::ostringstream summary;
  summary << "channel: " << channels::to_string(c.channel) << '\n'
          << "samples: " << ds.samples.size() << " (train " << split.train.size() << ", test " << split.test.size()
          << ")\n"
          << "overlap method: " << kernels::to_string(c.method) << '\n'
          << "kernel function: " << kernels::describe(c.kernel) << '\n'
          << "shots: " << qsim::to_string(c.shots) << '\n'
          << "seed: " << c.seed << "\n\n";

  for (ModelId id : c.models) {
    const StoredModel m = read_model(ws.locate(model_file(id), Stage::Train));
    const Eigen::MatrixXd rows = kernel_rows(m, ds, ws, c);
    const auto predictions = ml::predict_all(m.model, rows);
    std::vector<bool> is_test(ds.samples.size(), false);
    for (auto i : split.test) is_test[i] = true;
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      pred.rows.push_back({to_string(id), std::to_string(i), is_test[i] ? "test" : "train", fmt(ds.samples[i].theta),
                           fmt(y[i]), fmt(predictions[i])});
    }
    const auto y_train = ml::gather(y, split.train);
    const auto y_test = ml::gather(y, split.test);
    const auto p_train = ml::gather(predictions, split.train);
    const auto p_test = ml::gather(predictions, split.test);
    std::string cv_mse = "n/a";
    for (const auto& row : cv.rows) {
      if (row[cv.column("model")] == to_string(id) && row[cv.column("best")] == "1") cv_mse = row[cv.column("mean_mse")];
    }
    summary << "model: " << to_string(id) << '\n'
            << "  best params: " << ml::describe(m.params) << '\n'
            << "  cv mse: " << cv_mse << '\n'
            << "  train mse: " << fmt(ml::mse(y_train, p_train)) << '\n'
            << "  test mse: " << fmt(ml::mse(y_test, p_test)) << '\n';
    try {
      summary << "  test r2: " << fmt(ml::r2(y_test, p_test)) << '\n';
    } catch (const ContractViolation&) {
      summary << "  test r2: undefined\n";
    }
    if (const auto* krr = std::get_if<ml::KRRModel>(&m.model)) summary << "  jitter: " << fmt(krr->jitter) << '\n';
    summary << '\n';
  }
  write(ws, "predictions.csv", pred);
  auto os = ws.create("summary.txt");
  os << summary.str();
}

void stage_sweep(const ExperimentConfig& c, Workspace& ws) {
  // kernel circuits: fixed hyperparameters, training-set predictions
  const Dataset small = generate_dataset(c, c.comparison_samples);
  const auto thetas = small.thetas();
  const auto y = small.labels();
  csv::Table circuits;
  circuits.header = {"method", "index", "theta", "label", "prediction"};
  for (std::size_t m = 0; m < kCircuits.size(); ++m) {
    const auto gram = kernels::gram_matrix(thetas, small.channel, kCircuits[m], c.kernel, c.shots,
                                           derive_seed(c.seed, {kTagCompare, m}));
    const auto model = ml::svr_fit(gram.values, y, {c.comparison_C, c.comparison_epsilon, c.svr_tol, c.svr_max_passes});
    const auto pred = ml::predict_all(model, gram.values);
    circuits.metadata.emplace_back("train_mse_" + kernels::to_string(kCircuits[m]), fmt(ml::mse(y, pred)));
    for (std::size_t i = 0; i < y.size(); ++i) {
      circuits.rows.push_back({kernels::to_string(kCircuits[m]), std::to_string(i), fmt(thetas[i]), fmt(y[i]),
                               fmt(pred[i])});
    }
  }
  write(ws, "sweep_circuits.csv", circuits);

  // kernel functions over the main dataset's overlaps, QSVR grid search on the train split
  const Dataset ds = read_dataset_csv(ws.locate("dataset.csv", Stage::Generate));
  const auto overlaps = kernels::read_gram_csv(ws.locate("overlaps.csv", Stage::Gram).string());
  const auto split = read_split(ws.locate("split.csv", Stage::Train));
  const auto labels = ds.labels();
  const auto y_train = ml::gather(labels, split.train);
  const auto y_test = ml::gather(labels, split.test);
  std::vector<ml::Index> all(ds.samples.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<bool> is_test(ds.samples.size(), false);
  for (auto i : split.test) is_test[i] = true;

  csv::Table functions;
  functions.header = {"function", "index", "set", "theta", "label", "prediction"};
  kernels::GramMatrix base = overlaps;
  base.overlaps = overlaps.values;
  for (const auto& fn : comparison_functions()) {
    const auto gram = kernels::apply_kernel(base, fn);
    const Eigen::MatrixXd k_train = ml::submatrix(gram.values, split.train, split.train);
    const auto grid = grid_for(ModelId::QSVR, c);
    const auto report = ml::grid_search_cv(k_train, y_train, grid, cv_options(c));
    const auto model = ml::fit(k_train, y_train, report.best, c.fit_options());
    const auto pred = ml::predict_all(model, ml::submatrix(gram.values, all, split.train));
    const std::string name = kernels::to_string(fn.kind);
    functions.metadata.emplace_back("cv_mse_" + name, fmt(report.best_mse));
    functions.metadata.emplace_back("test_mse_" + name, fmt(ml::mse(y_test, ml::gather(pred, split.test))));
    functions.metadata.emplace_back("best_" + name, ml::describe(report.best));
    for (std::size_t i = 0; i < pred.size(); ++i) {
      functions.rows.push_back({kernels::describe(fn), std::to_string(i), is_test[i] ? "test" : "train",
                                fmt(ds.samples[i].theta), fmt(labels[i]), fmt(pred[i])});
    }
  }
  write(ws, "sweep_functions.csv", functions);
}

csv::Table figure_table(Figure figure, const Workspace& ws) {
  csv::Table out;
  switch (figure) {
    case Figure::Fig3: {
      const Dataset ds = read_dataset_csv(ws.locate("dataset.csv", Stage::Generate));
      out.header = {"theta", "sx_exact", "sy_exact", "sz_exact", "sx_shot", "sy_shot", "sz_shot"};
      for (const auto& s : ds.samples) {
        out.rows.push_back({fmt(s.theta), fmt(s.bloch_exact[0]), fmt(s.bloch_exact[1]), fmt(s.bloch_exact[2]),
                            fmt(s.bloch_shot[0]), fmt(s.bloch_shot[1]), fmt(s.bloch_shot[2])});
      }
      break;
    }
    case Figure::Fig4: {
      const auto t = csv::read_table(ws.locate("sweep_circuits.csv", Stage::Sweep).string());
      out.header = {"method", "theta", "nm_true", "nm_pred"};
      for (const auto& r : t.rows) {
        out.rows.push_back({r[t.column("method")], r[t.column("theta")], r[t.column("label")], r[t.column("prediction")]});
      }
      break;
    }
    case Figure::Fig5: {
      const auto t = csv::read_table(ws.locate("predictions.csv", Stage::Evaluate).string());
      out.header = {"model", "set", "nm_true", "nm_pred"};
      for (const auto& r : t.rows) {
        out.rows.push_back({r[t.column("model")], r[t.column("set")], r[t.column("label")], r[t.column("prediction")]});
      }
      break;
    }
    case Figure::Fig6: {
      const auto t = csv::read_table(ws.locate("sweep_functions.csv", Stage::Sweep).string());
      out.header = {"function", "theta", "nm_true", "nm_pred"};
      for (const auto& r : t.rows) {
        out.rows.push_back(
            {r[t.column("function")], r[t.column("theta")], r[t.column("label")], r[t.column("prediction")]});
      }
      break;
    }
  }
  return out;
}

void stage_report(std::span<const Figure> figures, Workspace& ws) {
  for (Figure f : figures) write(ws, to_string(f) + ".csv", figure_table(f, ws));
}

const std::array<Figure, 4> kAllFigures{Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6};

void dispatch(Stage stage, const ExperimentConfig& c, Workspace& ws) {
  try {
    switch (stage) {
      case Stage::Generate:
        stage_generate(c, ws);
        break;
      case Stage::Gram:
        stage_gram(c, ws);
        break;
      case Stage::Train:
        stage_train(c, ws);
        break;
      case Stage::Evaluate:
        stage_evaluate(c, ws);
        break;
      case Stage::Sweep:
        stage_sweep(c, ws);
        break;
      case Stage::Report:
        stage_report(kAllFigures, ws);
        break;
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(to_string(stage), e.what());
  }
}

}  // namespace

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::Generate:
      return "generate";
    case Stage::Gram:
      return "gram";
    case Stage::Train:
      return "train";
    case Stage::Evaluate:
      return "evaluate";
    case Stage::Sweep:
      return "sweep";
    case Stage::Report:
      return "report";
  }
  return "?";
}

std::string to_string(Figure figure) {
  switch (figure) {
    case Figure::Fig3:
      return "fig3";
    case Figure::Fig4:
      return "fig4";
    case Figure::Fig5:
      return "fig5";
    case Figure::Fig6:
      return "fig6";
  }
  return "?";
}

Figure parse_figure(const std::string& text) {
  for (Figure f : kAllFigures) {
    if (to_string(f) == text) return f;
  }
  throw ConfigError("unknown figure '" + text + "' (fig3|fig4|fig5|fig6)");
}

std::vector<std::string> stage_outputs(Stage stage, const ExperimentConfig& config) {
  switch (stage) {
    case Stage::Generate:
      return {"dataset.csv", "config.cfg"};
    case Stage::Gram:
      return {"gram.csv", "overlaps.csv"};
    case Stage::Train: {
      std::vector<std::string> out{"split.csv"};
      for (ModelId id : config.models) out.push_back(model_file(id));
      out.push_back("cv_report.csv");
      return out;
    }
    case Stage::Evaluate:
      return {"predictions.csv", "summary.txt"};
    case Stage::Sweep:
      return {"sweep_circuits.csv", "sweep_functions.csv"};
    case Stage::Report:
      return {"fig3.csv", "fig4.csv", "fig5.csv", "fig6.csv"};
  }
  return {};
}

void run_stage(Stage stage, const ExperimentConfig& config) {
  try {
    config.validate();
  } catch (const std::exception& e) {
    throw StageError(to_string(stage), e.what());
  }
  Workspace ws(config.out_dir);
  dispatch(stage, config, ws);
  ws.commit();
}

void emit_plot_data(const ExperimentConfig& config, std::span<const Figure> figures) {
  Workspace ws(config.out_dir);
  try {
    stage_report(figures, ws);
  } catch (const std::exception& e) {
    throw StageError(to_string(Stage::Report), e.what());
  }
  ws.commit();
}

void run_experiment(const ExperimentConfig& config) {
  try {
    config.validate();
  } catch (const std::exception& e) {
    throw StageError("config", e.what());
  }
  Workspace ws(config.out_dir);
  for (Stage s : {Stage::Generate, Stage::Gram, Stage::Train, Stage::Evaluate, Stage::Sweep, Stage::Report}) {
    dispatch(s, config, ws);
  }
  ws.commit();
}

}  // namespace qkm::pipeline
