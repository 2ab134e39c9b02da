#include "gssl/cli.hpp"

#include "gssl/checkpoint.hpp"
#include "gssl/dataset_io.hpp"
#include "gssl/error.hpp"
#include "gssl/inference.hpp"
#include "gssl/metrics.hpp"
#include "gssl/run_config.hpp"
#include "gssl/standardizer.hpp"
#include "gssl/synthetic.hpp"
#include "gssl/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace gssl {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

constexpr const char* kCheckpointFile = "checkpoint.gssl";
constexpr const char* kManifestFile = "manifest.txt";
constexpr const char* kMetricsFile = "metrics.json";
constexpr const char* kPseudolabelFile = "pseudolabels.csv";
constexpr const char* kPredictionFile = "predictions.csv";
constexpr const char* kLogFile = "train.log";

// Seed stream for test-time wiring, shared by `train --test` and `infer`.
constexpr std::uint64_t kInferenceStream = 7;
constexpr std::uint64_t kPseudoMadStream = 8;

/// Thrown for bad flag combinations; mapped to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const MetricsReport& m, const json& loss_trace, const json& config_echo) {
  json j;
  j["accuracy_overall"] = nullable(m.accuracy_overall);
  j["accuracy_unweighted"] = nullable(m.accuracy_unweighted);
  j["map"] = m.average_precision ? json(m.average_precision->mean) : json(nullptr);
  j["per_class_ap"] = m.average_precision ? json(m.average_precision->per_class) : json(nullptr);
  j["mad_per_layer"] = m.mad_per_layer.empty() ? json(nullptr) : json(m.mad_per_layer);
  j["silhouette"] = nullable(m.silhouette);
  j["loss_trace"] = loss_trace;
  j["config_echo"] = config_echo;
  return j;
}

void write_predictions(std::ostream& out, const std::vector<Prediction>& preds, std::size_t classes) {
  out << "id,class";
  for (std::size_t c = 0; c < classes; ++c) out << ",p" << c;
  out << '\n';
  for (const auto& p : preds) {
    out << p.id << ',' << p.cls;
    for (const double v : p.probabilities) out << ',' << format_double(v);
    out << '\n';
  }
}

struct PredictionTable {
  std::vector<std::string> ids;
  std::vector<int> classes;
  Matrix probabilities;
};

PredictionTable read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,class", 0) != 0)
    throw Error(ErrorKind::MalformedHeader, "expected 'id,class,p0,...'");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',') + 1);
  const std::size_t classes = columns - 2;
  PredictionTable t;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != columns) throw Error(ErrorKind::RaggedRow, "wrong field count", line_no);
    t.ids.push_back(fields[0]);
    try {
      t.classes.push_back(std::stoi(fields[1]));
      for (std::size_t c = 0; c < classes; ++c) values.push_back(std::stod(fields[2 + c]));
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::MalformedValue, "unparsable prediction field", line_no);
    }
  }
  t.probabilities = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(t.ids.size()),
                                             static_cast<Eigen::Index>(classes));
  return t;
}

void write_pseudolabels(std::ostream& out, const FeatureDataset& ds, const PseudolabelStore& store) {
  out << "id,class,confidence\n";
  for (std::size_t i = 0; i < store.by_index.size(); ++i) {
    if (!store.by_index[i]) continue;
    out << ds.ids[i] << ',' << store.by_index[i]->cls << ',' << format_double(store.by_index[i]->confidence) << '\n';
  }
}

PseudolabelStore read_pseudolabels(const fs::path& path, const FeatureDataset& ds) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.size(); ++i) index[ds.ids[i]] = i;
  PseudolabelStore store;
  store.by_index.resize(ds.size());
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, cls, conf;
    if (!std::getline(ss, id, ',') || !std::getline(ss, cls, ',') || !std::getline(ss, conf))
      throw Error(ErrorKind::RaggedRow, "expected id,class,confidence", line_no);
    const auto it = index.find(id);
    if (it == index.end()) throw Error(ErrorKind::MissingPseudolabels, "unknown id '" + id + "'", line_no);
    try {
      store.by_index[it->second] = Pseudolabel{std::stoi(cls), std::stod(conf)};
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::MalformedValue, "unparsable pseudolabel", line_no);
    }
  }
  return store;
}

std::vector<int> required_labels(const FeatureDataset& ds, const std::string& what) {
  std::vector<int> out;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!ds.labels[i]) throw Error(ErrorKind::NoLabeledNodes, what + " sample '" + ds.ids[i] + "' has no label", i);
    out.push_back(*ds.labels[i]);
  }
  return out;
}

/// Training data, scaling, distances and subgraph settings of one run.
struct LoadedRun {
  RunConfig cfg;
  FeatureDataset data;
  std::optional<Standardizer> scaling;
  DistanceMatrix distances;
  SubgraphConfig subgraph;

  FeatureDataset load_aligned(const std::string& path) const {
    auto ds = parse_feature_file(path, data.class_names);
    if (ds.dim() != data.dim()) throw Error(ErrorKind::ShapeMismatch, "'" + path + "' has a different feature width");
    if (scaling) ds.features = scaling->apply(ds.features);
    return ds;
  }
};

LoadedRun load_training_data(const RunConfig& cfg, const std::optional<Standardizer>& fixed_scaling) {
  LoadedRun run;
  run.cfg = cfg;
  run.data = parse_feature_file(cfg.data);
  if (fixed_scaling) {
    run.scaling = fixed_scaling;
  } else if (cfg.standardize) {
    run.scaling = Standardizer::fit(run.data.features);
  }
  if (run.scaling) run.data.features = run.scaling->apply(run.data.features);
  run.distances = compute_distances(run.data.features, cfg.metric);
  run.subgraph = resolve_subgraph(cfg, run.data.class_count);
  return run;
}

struct TrainedRun {
  LoadedRun run;
  Checkpoint checkpoint;
  PseudolabelStore pseudo;
};

TrainedRun load_trained_run(const fs::path& dir) {
  TrainedRun t;
  const auto cfg = load_run_config(dir / kManifestFile);
  t.checkpoint = load_checkpoint(dir / kCheckpointFile);
  t.run = load_training_data(cfg, t.checkpoint.scaling);
  t.pseudo = read_pseudolabels(dir / kPseudolabelFile, t.run.data);
  return t;
}

json loss_trace_json(const TrainReport& report) {
  json trace = json::array();
  for (const auto& e : report.epochs) {
    trace.push_back({{"epoch", e.epoch},
                     {"steps", e.steps},
                     {"ce", e.mean.ce},
                     {"entropy", e.mean.entropy},
                     {"denoise", e.mean.ssl[0]},
                     {"completion", e.mean.ssl[1]},
                     {"shuffle", e.mean.ssl[2]},
                     {"total", e.mean.total},
                     {"validation_accuracy", nullable(e.validation_accuracy)}});
  }
  return trace;
}

json config_echo_json(const RunConfig& cfg) {
  json echo = json::object();
  for (const auto& [key, value] : describe(cfg, false)) echo[key] = value;
  echo["code_version"] = code_version();
  return echo;
}

void fill_classification_metrics(MetricsReport& m, const std::vector<int>& truths, const std::vector<int>& predicted,
                                 const Matrix& scores) {
  m.accuracy_overall = accuracy(predicted, truths, AccuracyMode::Overall);
  m.accuracy_unweighted = accuracy(predicted, truths, AccuracyMode::Unweighted);
  try {
    m.average_precision = mean_average_precision(scores, truths);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ClassWithoutPositives) throw;
  }
}

Matrix probability_matrix(const std::vector<Prediction>& preds, std::size_t classes) {
  Matrix m(static_cast<Eigen::Index>(preds.size()), static_cast<Eigen::Index>(classes));
  for (std::size_t i = 0; i < preds.size(); ++i)
    for (std::size_t c = 0; c < classes; ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = preds[i].probabilities[c];
  return m;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  SyntheticSpec spec;
  std::string out;
  std::size_t holdout_per_class = 0;
  std::string holdout_out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  if (a.holdout_per_class > 0 && a.holdout_out.empty())
    throw UsageError("--holdout-per-class needs --holdout-out");
  const auto split = generate_synthetic_split(a.spec, a.holdout_per_class);
  write_feature_file(a.out, split.train);
  if (a.holdout_per_class > 0) write_feature_file(a.holdout_out, split.holdout);
  out << "wrote " << split.train.size() << " samples (" << split.train.labeled_count() << " labeled) to " << a.out
      << '\n';
  return 0;
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  if (cfg.data.empty()) throw UsageError("train needs --data");
  if (cfg.out.empty()) throw UsageError("train needs --out");
  const fs::path dir(cfg.out);
  fs::create_directories(dir);

  const auto run = load_training_data(cfg, std::nullopt);
  std::optional<ValidationSet> validation;
  if (!cfg.validation.empty()) {
    const auto vds = run.load_aligned(cfg.validation);
    validation = ValidationSet{vds.features, required_labels(vds, "validation"), cfg.ensemble};
  }

  const auto result = train(run.data, run.distances, cfg.train, run.subgraph, validation ? &*validation : nullptr);
  const Checkpoint ckpt{result.model, result.adam, run.scaling};
  {
    auto f = open_out(dir / kCheckpointFile);
    write_checkpoint(f, ckpt);
  }
  {
    auto f = open_out(dir / kPseudolabelFile);
    write_pseudolabels(f, run.data, result.report.pseudolabels);
  }
  {
    auto f = open_out(dir / kManifestFile);
    write_manifest(f, cfg);
  }
  {
    auto f = open_out(dir / kLogFile);
    for (const auto& e : result.report.epochs) {
      f << "epoch " << e.epoch << " steps=" << e.steps << " ce=" << e.mean.ce << " entropy=" << e.mean.entropy
        << " denoise=" << e.mean.ssl[0] << " completion=" << e.mean.ssl[1] << " shuffle=" << e.mean.ssl[2]
        << " total=" << e.mean.total;
      if (e.validation_accuracy) f << " val_acc=" << *e.validation_accuracy;
      f << '\n';
    }
    f << "best_epoch=" << result.report.best_epoch << " test_edges=" << run.subgraph.test_edge_count
      << " wall_seconds=" << result.report.wall_seconds << '\n';
  }

  MetricsReport metrics;
  metrics.mad_per_layer =
      mad_per_layer(result.model, run.data, run.distances, run.subgraph, derive_rng(cfg.train.seed, kPseudoMadStream)());
  if (!cfg.test.empty()) {
    const auto test = run.load_aligned(cfg.test);
    Rng rng = derive_rng(cfg.train.seed, kInferenceStream);
    const auto inference = run_inference(result.model, run.data, result.report.pseudolabels, run.distances,
                                         run.subgraph, test.features, rng, test.ids, {cfg.inference_batch});
    std::vector<Prediction> preds = inference.predictions;
    if (cfg.ensemble > 1) {
      Rng ens_rng = derive_rng(cfg.train.seed, kInferenceStream);
      preds = predict_ensemble(result.model, run.data, result.report.pseudolabels, run.distances, run.subgraph,
                               test.features, cfg.ensemble, ens_rng, test.ids, {cfg.inference_batch});
    }
    auto f = open_out(dir / kPredictionFile);
    write_predictions(f, preds, static_cast<std::size_t>(run.data.class_count));
    if (test.labeled_count() == test.size()) {
      const auto truths = required_labels(test, "test");
      std::vector<int> predicted;
      for (const auto& p : preds) predicted.push_back(p.cls);
      fill_classification_metrics(metrics, truths, predicted,
                                  probability_matrix(preds, static_cast<std::size_t>(run.data.class_count)));
      metrics.silhouette = silhouette(inference.embeddings, truths);
    }
  }
  {
    auto f = open_out(dir / kMetricsFile);
    f << metrics_json(metrics, loss_trace_json(result.report), config_echo_json(cfg)).dump(2) << '\n';
  }
  out << "trained " << result.report.epochs.size() << " epochs; outputs in " << dir.string() << '\n';
  return 0;
}

int cmd_infer(const fs::path& run_dir, const std::string& test_path, const std::string& out_path,
              std::optional<std::uint64_t> seed, std::ostream& out) {
  const auto t = load_trained_run(run_dir);
  const auto test = t.run.load_aligned(test_path);
  const std::uint64_t s = seed.value_or(t.run.cfg.train.seed);
  Rng rng = derive_rng(s, kInferenceStream);
  const auto preds = predict_ensemble(t.checkpoint.model, t.run.data, t.pseudo, t.run.distances, t.run.subgraph,
                                      test.features, t.run.cfg.ensemble, rng, test.ids,
                                      {t.run.cfg.inference_batch});
  const fs::path target = out_path.empty() ? run_dir / kPredictionFile : fs::path(out_path);
  auto f = open_out(target);
  write_predictions(f, preds, static_cast<std::size_t>(t.run.data.class_count));
  out << "wrote " << preds.size() << " predictions to " << target.string() << '\n';
  return 0;
}

int cmd_eval(const std::string& predictions, const std::string& truth, const std::string& data,
             const std::string& out_path, std::ostream& out) {
  std::optional<std::vector<std::string>> classes;
  if (!data.empty()) classes = parse_feature_file(data).class_names;
  const auto truth_ds = parse_feature_file(truth, classes);
  const auto table = read_predictions(predictions);
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < table.ids.size(); ++i) row_of[table.ids[i]] = i;

  std::vector<int> truths, predicted;
  Matrix scores(static_cast<Eigen::Index>(truth_ds.size()), table.probabilities.cols());
  for (std::size_t i = 0; i < truth_ds.size(); ++i) {
    const auto it = row_of.find(truth_ds.ids[i]);
    if (it == row_of.end()) throw Error(ErrorKind::EmptyInput, "no prediction for '" + truth_ds.ids[i] + "'", i);
    if (!truth_ds.labels[i]) throw Error(ErrorKind::NoLabeledNodes, "truth sample has no label", i);
    truths.push_back(*truth_ds.labels[i]);
    predicted.push_back(table.classes[it->second]);
    scores.row(static_cast<Eigen::Index>(i)) = table.probabilities.row(static_cast<Eigen::Index>(it->second));
  }
  MetricsReport metrics;
  fill_classification_metrics(metrics, truths, predicted, scores);
  const auto text = metrics_json(metrics, json(nullptr), json(nullptr)).dump(2);
  if (out_path.empty()) {
    out << text << '\n';
  } else {
    auto f = open_out(out_path);
    f << text << '\n';
  }
  return 0;
}

int cmd_mad(const fs::path& run_dir, const std::string& out_path, std::ostream& out) {
  const auto t = load_trained_run(run_dir);
  const auto values = mad_per_layer(t.checkpoint.model, t.run.data, t.run.distances, t.run.subgraph,
                                    derive_rng(t.run.cfg.train.seed, kPseudoMadStream)());
  const auto text = json{{"mad_per_layer", values}}.dump(2);
  if (out_path.empty()) {
    out << text << '\n';
  } else {
    auto f = open_out(out_path);
    f << text << '\n';
  }
  return 0;
}

int cmd_robust(const fs::path& run_dir, const std::string& test_path, const std::vector<double>& sigmas,
               const std::string& out_path, std::ostream& out) {
  const auto t = load_trained_run(run_dir);
  const auto test = t.run.load_aligned(test_path);
  const auto truths = required_labels(test, "test");
  const auto table = noise_robustness(t.checkpoint.model, t.run.data, t.pseudo, t.run.distances, t.run.subgraph,
                                      test.features, truths, sigmas, t.run.cfg.train.seed,
                                      t.run.cfg.ensemble);
  json rows = json::array();
  for (const auto& r : table)
    rows.push_back({{"sigma", r.sigma},
                    {"clean_accuracy", r.clean_accuracy},
                    {"noisy_accuracy", r.noisy_accuracy},
                    {"drop", r.drop}});
  const auto text = json{{"noise_robustness", rows}}.dump(2);
  if (out_path.empty()) {
    out << text << '\n';
  } else {
    auto f = open_out(out_path);
    f << text << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semi-supervised signed-subgraph GCN with self-supervised auxiliary tasks"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic Gaussian-mixture dataset");
  synth_cmd->add_option("--classes", synth.spec.classes)->capture_default_str();
  synth_cmd->add_option("--per-class", synth.spec.per_class)->capture_default_str();
  synth_cmd->add_option("--dim", synth.spec.dim)->capture_default_str();
  synth_cmd->add_option("--std", synth.spec.cluster_std, "cluster standard deviation")->capture_default_str();
  synth_cmd->add_option("--separation", synth.spec.separation, "distance of class means from the origin")
      ->capture_default_str();
  synth_cmd->add_option("--label-fraction", synth.spec.label_fraction)->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "output file (.bin for binary, else CSV)")->required();
  synth_cmd->add_option("--holdout-per-class", synth.holdout_per_class, "fully labeled held-out draws per class");
  synth_cmd->add_option("--holdout-out", synth.holdout_out);

  // train flags map one-to-one onto config keys (dashes become underscores)
  const std::vector<std::string> train_keys = {
      "data", "out", "seed", "ssl", "epochs", "patience", "lambda1", "lambda2", "mask-fraction",
      "noise-variance", "hidden", "learning-rate", "use-bias", "graph-mode", "labeled-per-class",
      "unlabeled-count", "test-edges", "edge-probability", "metric", "standardize", "ensemble",
      "inference-batch", "validation", "test"};
  std::map<std::string, std::string> train_flags;
  std::string config_path;
  auto* train_cmd = app.add_subcommand("train", "train on a dataset; writes checkpoint, metrics, pseudolabels");
  train_cmd->add_option("--config", config_path, "key=value config file (flags override it)");
  for (const auto& key : train_keys) train_cmd->add_option("--" + key, train_flags[key]);

  std::string run_dir, test_path, out_path, data_path, predictions_path, sigmas_text = "0,0.5,1";
  std::optional<std::uint64_t> infer_seed;
  auto* infer_cmd = app.add_subcommand("infer", "predict held-out samples with a trained run");
  infer_cmd->add_option("--run", run_dir, "training output directory")->required();
  infer_cmd->add_option("--test", test_path)->required();
  infer_cmd->add_option("--out", out_path, "prediction CSV (default <run>/predictions.csv)");
  infer_cmd->add_option("--seed", infer_seed, "wiring seed (default: the run's seed)");

  auto* eval_cmd = app.add_subcommand("eval", "score predictions against labeled truths");
  eval_cmd->add_option("--predictions", predictions_path)->required();
  eval_cmd->add_option("--truth", test_path)->required();
  eval_cmd->add_option("--data", data_path, "training dataset fixing the class-name order");
  eval_cmd->add_option("--out", out_path, "metrics JSON (default stdout)");

  auto* mad_cmd = app.add_subcommand("mad", "per-layer mean average distance of a trained run");
  mad_cmd->add_option("--run", run_dir)->required();
  mad_cmd->add_option("--out", out_path);

  auto* robust_cmd = app.add_subcommand("robust", "accuracy drop under Gaussian test-feature noise");
  robust_cmd->add_option("--run", run_dir)->required();
  robust_cmd->add_option("--test", test_path)->required();
  robust_cmd->add_option("--sigmas", sigmas_text, "comma-separated noise std levels (model input units)")
      ->capture_default_str();
  robust_cmd->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kUsageError;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*train_cmd) {
      RunConfig cfg;
      if (!config_path.empty()) cfg = load_run_config(config_path);
      for (const auto& key : train_keys) {
        if (train_cmd->count("--" + key) == 0) continue;
        std::string underscored = key;
        std::replace(underscored.begin(), underscored.end(), '-', '_');
        apply_setting(cfg, underscored, train_flags[key]);
      }
      if (!cfg.data.empty()) cfg.data = fs::absolute(cfg.data).lexically_normal().string();
      for (auto* p : {&cfg.validation, &cfg.test})
        if (!p->empty()) *p = fs::absolute(*p).lexically_normal().string();
      return cmd_train(cfg, out);
    }
    if (*infer_cmd) return cmd_infer(run_dir, test_path, out_path, infer_seed, out);
    if (*eval_cmd) return cmd_eval(predictions_path, test_path, data_path, out_path, out);
    if (*mad_cmd) return cmd_mad(run_dir, out_path, out);
    if (*robust_cmd) {
      std::vector<double> sigmas;
      std::stringstream ss(sigmas_text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          sigmas.push_back(std::stod(item));
        } catch (const std::logic_error&) {
          throw UsageError("bad sigma '" + item + "'");
        }
      }
      return cmd_robust(run_dir, test_path, sigmas, out_path, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::InvalidArgument ? kUsageError : kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace gssl
