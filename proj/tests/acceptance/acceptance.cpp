// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "gssl/checkpoint.hpp"
#include "gssl/cli.hpp"
#include "gssl/dataset_io.hpp"
#include "gssl/error.hpp"
#include "gssl/graph_builder.hpp"
#include "gssl/inference.hpp"
#include "gssl/metrics.hpp"
#include "gssl/standardizer.hpp"
#include "gssl/synthetic.hpp"
#include "gssl/trainer.hpp"
#include "gradient_check.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace gssl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

// ---- 1: analytic vs finite-difference gradients

Outcome gradients() {
  Outcome o;
  double worst = 0.0;
  for (const bool bias : {false, true}) {
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto f = testing::make_gradient_fixture(seed, bias);
      for (const std::string term : {"ce", "entropy", "denoise", "completion", "shuffle", "total"}) {
        const auto check = testing::finite_difference_check(
            f.model, [&](const GcnModel& m) { return testing::term_value(f, m, term); }, testing::term_gradient(f, term));
        worst = std::max(worst, check.max_rel_error);
        o.require(check.max_rel_error < 1e-4, term + " seed " + std::to_string(seed) + " rel " + fmt(check.max_rel_error, 8));
      }
    }
  }
  std::ostringstream s;
  s << "max relative error " << std::scientific << std::setprecision(2) << worst;
  o.note(s.str());
  return o;
}

// ---- 2: hypergeometric test-edge count

double monte_carlo_hit(std::size_t n_true, std::size_t m_pseudo, std::size_t edges, std::size_t trials, Rng& rng) {
  // one of the n + m nodes is excluded (it is the fixed endpoint), mirroring C(m-1,T)/C(n+m-1,T)
  std::vector<std::size_t> pool(n_true + m_pseudo - 1);
  std::iota(pool.begin(), pool.end(), 0);
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto picks = sample_without_replacement(pool, std::min(edges, pool.size()), rng);
    for (const auto p : picks)
      if (p < n_true) {
        ++hits;
        break;
      }
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

Outcome hypergeometric() {
  Outcome o;
  Rng rng(2024);
  std::uniform_int_distribution<std::size_t> n_dist(1, 60), m_dist(2, 120);
  std::uniform_real_distribution<double> p_dist(0.5, 0.99);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto n = n_dist(rng), m = m_dist(rng);
    const double p = p_dist(rng);
    const auto t = min_test_edges(n, m, p);
    const double exact = 1.0 - all_pseudo_probability(n, m, t);
    const double mc = monte_carlo_hit(n, m, t, 200000, rng);
    worst = std::max(worst, std::abs(mc - exact));
    o.require(std::abs(mc - exact) <= 0.005, "triple (" + std::to_string(n) + "," + std::to_string(m) + ")");
    o.require(exact >= p, "T misses target");
    if (t > 1) o.require(1.0 - all_pseudo_probability(n, m, t - 1) < p, "T not minimal");
  }
  const auto t_ref = min_test_edges(66, 5, 0.99);
  o.require(t_ref <= 4 && 1.0 - all_pseudo_probability(66, 5, t_ref) > 0.99, "(66,5) composition");
  o.note("max |MC - exact| " + fmt(worst) + ", T(66,5,0.99) = " + std::to_string(t_ref));
  return o;
}

// ---- 3: subgraph sizes, balance, epoch coverage

FeatureDataset many_classes(int classes, std::size_t labeled_per_class, std::size_t unlabeled, std::uint64_t seed) {
  FeatureDataset ds;
  const auto n = classes * labeled_per_class + unlabeled;
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  ds.features.resize(static_cast<Eigen::Index>(n), 4);
  for (Eigen::Index r = 0; r < ds.features.rows(); ++r)
    for (Eigen::Index c = 0; c < 4; ++c) ds.features(r, c) = g(rng);
  for (int c = 0; c < classes; ++c)
    for (std::size_t k = 0; k < labeled_per_class; ++k) ds.labels.emplace_back(c);
  ds.labels.resize(n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) ds.ids.push_back("r" + std::to_string(i));
  ds.class_count = classes;
  return validate_dataset(std::move(ds));
}

Outcome subgraph_sizes() {
  Outcome o;
  struct Setting {
    const char* name;
    int classes;
    std::size_t per_class;
    std::size_t expected;
  };
  for (const Setting s : {Setting{"33-class", 33, 2, 71}, Setting{"4-class", 4, 12, 53}}) {
    const auto ds = many_classes(s.classes, s.per_class + 3, 23, 5);
    const auto dm = compute_distances(ds.features);
    SubgraphConfig cfg;
    cfg.labeled_per_class = s.per_class;
    cfg.unlabeled_count = 5;
    Rng rng(11);
    EpochPool pool(ds.unlabeled_indices(), rng);
    std::multiset<std::size_t> seen;
    std::size_t graphs = 0;
    while (!pool.exhausted()) {
      const auto chunk = pool.next(cfg.unlabeled_count);
      const auto batch = build_training_subgraph(ds, dm, cfg, chunk, rng);
      ++graphs;
      if (chunk.size() == cfg.unlabeled_count)
        o.require(batch.node_count() == s.expected, std::string(s.name) + " size " + std::to_string(batch.node_count()));
      o.require(is_class_balanced(batch, s.classes), std::string(s.name) + " balance");
      for (const auto node : batch.nodes_with(Provenance::Unlabeled)) seen.insert(*batch.global_index[node]);
    }
    const auto pool_indices = ds.unlabeled_indices();
    bool once = seen.size() == pool_indices.size();
    for (const auto i : pool_indices) once = once && seen.count(i) == 1;
    o.require(once, std::string(s.name) + " epoch coverage");
    o.note(std::string(s.name) + " " + std::to_string(s.expected) + " nodes over " + std::to_string(graphs) + " graphs");
  }
  return o;
}

// ---- 4: loss identities

Outcome loss_identities() {
  Outcome o;
  SubgraphBatch b;
  Rng rng(3);
  Matrix x(8, 3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index r = 0; r < 8; ++r)
    for (Eigen::Index c = 0; c < 3; ++c) x(r, c) = g(rng);
  b.graph = SignedGraph(x);
  for (int i = 0; i < 8; ++i) {
    const bool labeled = i < 4;
    b.global_index.emplace_back(i);
    b.labels.push_back(labeled ? std::optional<int>(i) : std::nullopt);
    b.labeled_mask.push_back(labeled);
    b.provenance.push_back(labeled ? Provenance::TrueLabel : Provenance::Unlabeled);
  }
  const Matrix uniform = Matrix::Zero(8, 4);
  const double ce = ce_loss(uniform, b), en = entropy_loss(uniform, b);
  o.require(std::abs(ce - std::log(4.0)) < 1e-9, "CE at uniform = " + fmt(ce, 12));
  o.require(std::abs(en - std::log(4.0)) < 1e-9, "entropy at uniform = " + fmt(en, 12));

  const auto dn = make_denoise(b, 0.1, rng);
  const auto cp = make_completion(b, 0.25, rng);
  const auto sh = make_shuffle(b, 0.5, rng);
  o.require(ssl_loss(SslTask::Denoise, dn.original, dn) == 0.0, "denoise perfect");
  o.require(ssl_loss(SslTask::Completion, cp.original, cp) == 0.0, "completion perfect");
  const double bce = ssl_loss(SslTask::Shuffle, Matrix::Zero(8, 1), sh);
  o.require(std::abs(bce - std::log(2.0)) < 1e-9, "shuffle BCE at zero = " + fmt(bce, 12));
  o.note("CE " + fmt(ce, 6) + ", entropy " + fmt(en, 6) + ", BCE " + fmt(bce, 6));
  return o;
}

// ---- 5: metric oracles

Outcome metric_oracles() {
  Outcome o;
  Matrix s(3, 2);
  s << 0.9, 0.1, 0.8, 0.2, 0.7, 0.3;
  const std::vector<int> t = {0, 1, 0};
  const double ap = mean_average_precision(s, t).per_class[0];
  o.require(std::abs(ap - 0.8333333333333333) < 1e-9, "AP = " + fmt(ap, 10));
  const double m = mad(Matrix::Identity(5, 5));
  o.require(m == 1.0, "MAD orthogonal = " + fmt(m, 10));
  const std::vector<int> truth = {0, 0, 0, 1}, pred = {0, 0, 0, 0};
  const double ua = accuracy(pred, truth, AccuracyMode::Unweighted);
  o.require(ua == 0.5, "unweighted accuracy = " + fmt(ua, 10));
  o.note("AP " + fmt(ap, 4) + ", MAD " + fmt(m, 1) + ", UA " + fmt(ua, 1));
  return o;
}

// ---- 6: synthetic semi-supervised reproduction

constexpr std::size_t kSeeds = 5;
constexpr std::size_t kValidationPerClass = 25;
constexpr std::size_t kTestPerClass = 100;
constexpr std::size_t kEnsemble = 20;
constexpr std::size_t kValidationRepeats = 3;

struct RunScore {
  double clean = 0.0;
  double noisy = 0.0;
};

struct Experiment {
  FeatureDataset train;
  Standardizer scaling;
  DistanceMatrix dm;
  ValidationSet validation;
  Matrix test_raw;
  std::vector<int> test_labels;
  double cluster_std = 1.0;
};

Experiment make_experiment(double label_fraction, std::uint64_t seed) {
  SyntheticSpec spec;  // 4 classes, 100 per class, D = 16
  spec.label_fraction = label_fraction;
  spec.seed = 1000 + seed;
  auto split = generate_synthetic_split(spec, kValidationPerClass + kTestPerClass);
  Experiment e;
  e.cluster_std = spec.cluster_std;
  e.scaling = Standardizer::fit(split.train.features);
  e.train = split.train;
  e.train.features = e.scaling.apply(split.train.features);
  e.dm = compute_distances(e.train.features);
  const auto n_val = static_cast<Eigen::Index>(kValidationPerClass * 4);
  e.validation.features = e.scaling.apply(split.holdout.features.topRows(n_val));
  e.validation.repeats = kValidationRepeats;
  e.test_raw = split.holdout.features.bottomRows(split.holdout.features.rows() - n_val);
  for (std::size_t i = 0; i < split.holdout.size(); ++i)
    (static_cast<Eigen::Index>(i) < n_val ? e.validation.labels : e.test_labels).push_back(*split.holdout.labels[i]);
  return e;
}

double score(const TrainResult& r, const Experiment& e, const SubgraphConfig& sub, const Matrix& test_raw,
             std::uint64_t seed) {
  Rng wiring = derive_rng(seed, 7);  // the same wiring for the clean and noisy passes
  const auto preds = predict_ensemble(r.model, e.train, r.report.pseudolabels, e.dm, sub, e.scaling.apply(test_raw),
                                      kEnsemble, wiring);
  std::vector<int> cls;
  for (const auto& p : preds) cls.push_back(p.cls);
  return accuracy(cls, e.test_labels, AccuracyMode::Overall);
}

RunScore run_variant(const Experiment& e, const std::string& variant, std::uint64_t seed, bool with_noise) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.tasks = TaskSet::parse(variant == "full-graph" ? "none" : variant);
  if (variant == "full-graph") cfg.graph_mode = GraphMode::FullGraph;
  SubgraphConfig sub;
  sub.test_edge_count = default_test_edges(sub, e.train.class_count);
  const auto r = train(e.train, e.dm, cfg, sub, &e.validation);
  RunScore s;
  s.clean = score(r, e, sub, e.test_raw, seed);
  if (with_noise) {
    Rng noise = derive_rng(seed, 50);
    std::normal_distribution<double> g(0.0, 0.5 * e.cluster_std);
    Matrix noisy = e.test_raw;
    for (Eigen::Index i = 0; i < noisy.rows(); ++i)
      for (Eigen::Index k = 0; k < noisy.cols(); ++k) noisy(i, k) += g(noise);
    s.noisy = score(r, e, sub, noisy, seed);
  }
  return s;
}

Outcome semi_supervised() {
  Outcome o;
  const std::vector<std::string> ssl = {"denoise", "completion", "shuffle"};
  std::map<std::string, std::vector<RunScore>> main_runs, low_runs;
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const auto e = make_experiment(0.10, seed);
    for (const std::string v : {"none", "denoise", "completion", "shuffle"})
      main_runs[v].push_back(run_variant(e, v, seed, true));
    main_runs["full-graph"].push_back(run_variant(e, "full-graph", seed, false));
    const auto low = make_experiment(0.02, seed);
    for (const std::string v : {"none", "denoise", "completion", "shuffle"}) low_runs[v].push_back(run_variant(low, v, seed, false));
    std::cerr << "  seed " << seed << " done\n";
  }
  auto mean = [](const std::vector<RunScore>& runs, bool drop) {
    double s = 0.0;
    for (const auto& r : runs) s += drop ? r.clean - r.noisy : r.clean;
    return s / static_cast<double>(runs.size());
  };

  std::ostringstream table;
  for (const auto& [name, runs] : main_runs) {
    table << "    10% " << std::left << std::setw(11) << name << " acc " << fmt(mean(runs, false), 3);
    if (name != "full-graph") table << "  noise drop " << fmt(mean(runs, true), 3);
    table << '\n';
  }
  for (const auto& [name, runs] : low_runs) table << "     2% " << std::left << std::setw(11) << name << " acc " << fmt(mean(runs, false), 3) << '\n';
  std::cout << table.str();

  const double none = mean(main_runs["none"], false);
  bool any_better = false;
  bool none_worse = true;
  std::string best_ssl;
  double best_acc = -1.0;
  for (const auto& v : ssl) {
    const double a = mean(main_runs[v], false);
    none_worse = none_worse && a >= none - 0.005;
    any_better = any_better || a > none;
    if (a > best_acc) best_acc = a, best_ssl = v;
  }
  o.require(none_worse && any_better, "(a) SSL variants vs no-SSL");
  const double full = mean(main_runs["full-graph"], false);
  // subgraph training compared like for like: the no-SSL run against the full-graph run
  o.require(none >= full + 0.02, "(b) subgraph " + fmt(none, 3) + " vs full graph " + fmt(full, 3));
  bool low_better = false;
  for (const auto& v : ssl) low_better = low_better || mean(low_runs[v], false) > mean(low_runs["none"], false);
  o.require(low_better, "(c) 2% labels");
  o.require(mean(main_runs[best_ssl], true) <= mean(main_runs["none"], true),
            "(d) noise drop of " + best_ssl + " " + fmt(mean(main_runs[best_ssl], true), 3) + " vs none " +
                fmt(mean(main_runs["none"], true), 3));
  o.note(std::to_string(kSeeds) + " seeds in " +
         fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 0) + "s");
  return o;
}

// ---- 7: determinism through the CLI

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gssl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome determinism(const fs::path& scratch) {
  Outcome o;
  const auto d = (scratch / "d.csv").string(), t = (scratch / "t.csv").string();
  o.require(cli({"synth", "--per-class", "40", "--seed", "3", "--holdout-per-class", "10", "--out", d, "--holdout-out", t}) == 0,
            "synth");
  o.require(cli({"train", "--data", d, "--test", t, "--ssl", "all", "--epochs", "5", "--hidden", "32", "--seed", "8",
                 "--ensemble", "3", "--out", (scratch / "a").string()}) == 0,
            "first run");
  o.require(cli({"train", "--config", (scratch / "a" / "manifest.txt").string(), "--out", (scratch / "b").string()}) == 0,
            "second run from manifest");
  for (const auto* f : {"checkpoint.gssl", "metrics.json", "predictions.csv", "pseudolabels.csv"}) {
    const auto a = slurp(scratch / "a" / f), b = slurp(scratch / "b" / f);
    o.require(!a.empty() && a == b, std::string(f) + " differs");
  }
  o.note("checkpoint, metrics, predictions and pseudolabels identical");
  return o;
}

// ---- 8: byte-identical rewrites

Outcome round_trips(const fs::path& scratch) {
  Outcome o;
  SyntheticSpec spec;
  spec.seed = 99;
  const auto ds = generate_synthetic(spec);
  write_feature_file(scratch / "a.bin", ds);
  write_feature_file(scratch / "b.bin", parse_feature_file(scratch / "a.bin"));
  o.require(slurp(scratch / "a.bin") == slurp(scratch / "b.bin"), "dataset binary");

  const auto dm = compute_distances(ds.features);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.hidden = 16;
  cfg.tasks = TaskSet::all();
  cfg.use_bias = true;
  const auto r = train(ds, dm, cfg, SubgraphConfig{});
  save_checkpoint(scratch / "a.gssl", {r.model, r.adam, Standardizer::fit(ds.features)});
  save_checkpoint(scratch / "b.gssl", load_checkpoint(scratch / "a.gssl"));
  o.require(slurp(scratch / "a.gssl") == slurp(scratch / "b.gssl"), "checkpoint");
  o.note("dataset " + std::to_string(fs::file_size(scratch / "a.bin")) + " bytes, checkpoint " +
         std::to_string(fs::file_size(scratch / "a.gssl")) + " bytes");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  // optional: a list of criterion numbers to run
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));
  const auto scratch = fs::temp_directory_path() / ("gssl_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(scratch);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient correctness", gradients},
      {"hypergeometric test edges", hypergeometric},
      {"subgraph sizes", subgraph_sizes},
      {"loss identities", loss_identities},
      {"metric oracles", metric_oracles},
      {"synthetic semi-supervised reproduction", semi_supervised},
      {"determinism", [&] { return determinism(scratch / "det"); }},
      {"format round trips", [&] { return round_trips(scratch); }},
  };
  fs::create_directories(scratch / "det");

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(number)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::cout << "criterion " << number << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  fs::remove_all(scratch);
  return failures == 0 ? 0 : 1;
}
