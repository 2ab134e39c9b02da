#include "gssl/trainer.hpp"

#include "gssl/error.hpp"
#include "gssl/inference.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

namespace gssl {

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double shift = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - shift).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

namespace {

// log softmax of one row, max-shifted
Eigen::RowVectorXd log_softmax_row(const Matrix& logits, Eigen::Index r) {
  const double shift = logits.row(r).maxCoeff();
  const Eigen::RowVectorXd shifted = logits.row(r).array() - shift;
  return shifted.array() - std::log(shifted.array().exp().sum());
}

void check_logits(const Matrix& logits, const SubgraphBatch& batch) {
  if (static_cast<std::size_t>(logits.rows()) != batch.node_count())
    throw Error(ErrorKind::ShapeMismatch, "one logit row per node required");
}

}  // namespace

LossAndGrad ce_loss_and_grad(const Matrix& logits, const SubgraphBatch& batch) {
  check_logits(logits, batch);
  const auto nodes = batch.nodes_with(Provenance::TrueLabel);
  if (nodes.empty()) throw Error(ErrorKind::NoLabeledNodes, "cross-entropy needs a true-labeled node");
  const double n = static_cast<double>(nodes.size());
  LossAndGrad out;
  out.grad = Matrix::Zero(logits.rows(), logits.cols());
  for (const auto node : nodes) {
    const auto r = static_cast<Eigen::Index>(node);
    const int cls = batch.labels[node].value();
    if (cls < 0 || cls >= logits.cols()) throw Error(ErrorKind::LabelOutOfRange, "label exceeds logit width", node);
    const auto logp = log_softmax_row(logits, r);
    out.value -= logp[cls];
    out.grad.row(r) = logp.array().exp() / n;
    out.grad(r, cls) -= 1.0 / n;
  }
  out.value /= n;
  return out;
}

double ce_loss(const Matrix& logits, const SubgraphBatch& batch) {
  return ce_loss_and_grad(logits, batch).value;
}

LossAndGrad entropy_loss_and_grad(const Matrix& logits, const SubgraphBatch& batch) {
  check_logits(logits, batch);
  LossAndGrad out;
  out.grad = Matrix::Zero(logits.rows(), logits.cols());
  const auto nodes = batch.nodes_with(Provenance::Unlabeled);
  if (nodes.empty()) return out;
  const double n = static_cast<double>(nodes.size());
  for (const auto node : nodes) {
    const auto r = static_cast<Eigen::Index>(node);
    const auto logp = log_softmax_row(logits, r);
    const Eigen::RowVectorXd p = logp.array().exp();
    const double h = -(p.array() * logp.array()).sum();
    out.value += h;
    // dH/dz_k = -p_k (log p_k + H)
    out.grad.row(r) = -(p.array() * (logp.array() + h)) / n;
  }
  out.value /= n;
  return out;
}

double entropy_loss(const Matrix& logits, const SubgraphBatch& batch) {
  return entropy_loss_and_grad(logits, batch).value;
}

void validate_train_config(const TrainConfig& cfg) {
  if (!(cfg.entropy_weight >= 0.0) || !(cfg.ssl_weight >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "loss weights must be nonnegative");
  if (cfg.epochs < 1) throw Error(ErrorKind::InvalidArgument, "epochs must be at least 1");
  if (!(cfg.mask_fraction > 0.0 && cfg.mask_fraction <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "mask_fraction must lie in (0, 1]");
  if (!(cfg.noise_variance > 0.0)) throw Error(ErrorKind::InvalidArgument, "noise_variance must be positive");
  if (cfg.hidden < 1) throw Error(ErrorKind::InvalidArgument, "hidden width must be positive");
}

double compose_total(const LossTerms& terms, double entropy_weight, double ssl_weight) {
  return terms.ce + entropy_weight * terms.entropy +
         ssl_weight * (terms.ssl[0] + terms.ssl[1] + terms.ssl[2]);
}

Objective evaluate_objective(const GcnModel& model, const SubgraphBatch& batch,
                             std::span<const SslInstance> instances, double entropy_weight,
                             double ssl_weight) {
  Objective obj;
  obj.grads = model.params.zeros_like();
  const auto adj = normalize_adjacency(batch.graph);
  const auto& x = batch.graph.node_features();

  const auto cls_pass = forward_pass(model, adj, x, Head::Classify);
  auto ce = ce_loss_and_grad(cls_pass.output, batch);
  auto en = entropy_loss_and_grad(cls_pass.output, batch);
  obj.terms.ce = ce.value;
  obj.terms.entropy = en.value;
  Matrix d_logits = std::move(ce.grad);
  if (entropy_weight != 0.0) d_logits += entropy_weight * en.grad;
  backward_pass(model, adj, cls_pass, d_logits, obj.grads);

  for (const auto& inst : instances) {
    const auto pass = forward_pass(model, adj, inst.transformed, head_for(inst.task));
    auto loss = ssl_loss_and_grad(inst.task, pass.output, inst);
    obj.terms.ssl[static_cast<std::size_t>(inst.task)] += loss.value;
    if (ssl_weight != 0.0) backward_pass(model, adj, pass, ssl_weight * loss.grad, obj.grads);
  }
  obj.terms.total = compose_total(obj.terms, entropy_weight, ssl_weight);
  return obj;
}

Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finaliser over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return Rng(z ^ (z >> 31));
}

namespace {

enum Stream : std::uint64_t { kInit = 1, kGraph = 2, kSsl = 3, kPseudo = 4, kValidation = 5 };

std::vector<SslInstance> make_instances(const SubgraphBatch& batch, const TrainConfig& cfg, Rng& rng) {
  std::vector<SslInstance> out;
  for (const auto task : cfg.tasks.tasks()) {
    switch (task) {
      case SslTask::Denoise: out.push_back(make_denoise(batch, cfg.noise_variance, rng)); break;
      case SslTask::Completion: out.push_back(make_completion(batch, cfg.mask_fraction, rng)); break;
      case SslTask::Shuffle: out.push_back(make_shuffle(batch, cfg.mask_fraction, rng)); break;
    }
  }
  return out;
}

void accumulate(LossTerms& sum, const LossTerms& t) {
  sum.ce += t.ce;
  sum.entropy += t.entropy;
  for (std::size_t i = 0; i < sum.ssl.size(); ++i) sum.ssl[i] += t.ssl[i];
  sum.total += t.total;
}

LossTerms scaled(LossTerms t, double f) {
  t.ce *= f;
  t.entropy *= f;
  for (auto& s : t.ssl) s *= f;
  t.total *= f;
  return t;
}

std::string describe(const LossTerms& t) {
  std::ostringstream os;
  os << "ce=" << t.ce << " entropy=" << t.entropy << " denoise=" << t.ssl[0] << " completion=" << t.ssl[1]
     << " shuffle=" << t.ssl[2];
  return os.str();
}

double validation_accuracy(const GcnModel& model, const FeatureDataset& ds, const PairwiseDistances& dm,
                           const SubgraphConfig& sub_cfg, const ValidationSet& val, std::uint64_t seed) {
  const auto pseudo = assign_pseudolabels(model, ds, dm, sub_cfg, seed);
  Rng rng = derive_rng(seed, kValidation);
  const auto preds = predict_ensemble(model, ds, pseudo, dm, sub_cfg, val.features, val.repeats, rng);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) correct += preds[i].cls == val.labels[i];
  return static_cast<double>(correct) / static_cast<double>(preds.size());
}

}  // namespace

std::size_t steps_per_epoch(const FeatureDataset& ds, const SubgraphConfig& sub_cfg) {
  const std::size_t pool = ds.unlabeled_count();
  if (pool == 0 || sub_cfg.unlabeled_count == 0) return 1;
  return (pool + sub_cfg.unlabeled_count - 1) / sub_cfg.unlabeled_count;
}

TrainResult train(const FeatureDataset& ds, const PairwiseDistances& dm, const TrainConfig& cfg,
                  const SubgraphConfig& sub_cfg, const ValidationSet* validation) {
  validate_train_config(cfg);
  validate_subgraph_config(sub_cfg);
  if (ds.class_count < 2) throw Error(ErrorKind::InvalidClassCount, "training needs at least two classes");
  if (dm.size() != ds.size()) throw Error(ErrorKind::ShapeMismatch, "distance matrix does not cover the dataset");
  if (validation && (validation->features.rows() == 0 ||
                     static_cast<std::size_t>(validation->features.rows()) != validation->labels.size()))
    throw Error(ErrorKind::ShapeMismatch, "validation set needs one label per row");
  const auto start = std::chrono::steady_clock::now();

  Rng init_rng = derive_rng(cfg.seed, kInit);
  Rng graph_rng = derive_rng(cfg.seed, kGraph);
  Rng ssl_rng = derive_rng(cfg.seed, kSsl);

  ModelConfig mcfg;
  mcfg.input_dim = ds.dim();
  mcfg.class_count = static_cast<std::size_t>(ds.class_count);
  mcfg.hidden = cfg.hidden;
  mcfg.tasks = cfg.tasks;
  mcfg.use_bias = cfg.use_bias;

  TrainResult result{make_model(mcfg, init_rng), {}, {}};
  result.adam = make_adam(result.model.params, cfg.adam);

  std::optional<SubgraphBatch> full_graph;
  if (cfg.graph_mode == GraphMode::FullGraph) full_graph = build_full_training_graph(ds, dm);

  const auto unlabeled = ds.unlabeled_indices();
  const bool early_stop = validation != nullptr && cfg.patience > 0;
  double best_accuracy = -1.0;
  GcnModel best_model = result.model;
  AdamState best_adam = result.adam;

  auto step = [&](const SubgraphBatch& batch) {
    const auto instances = make_instances(batch, cfg, ssl_rng);
    auto obj = evaluate_objective(result.model, batch, instances, cfg.entropy_weight, cfg.ssl_weight);
    if (!std::isfinite(obj.terms.total))
      throw Error(ErrorKind::NonFiniteLoss, describe(obj.terms), result.report.steps.size());
    adam_step(result.adam, result.model.params, obj.grads);
    result.report.steps.push_back(obj.terms);
    return obj.terms;
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord record;
    record.epoch = epoch;
    if (full_graph) {
      accumulate(record.mean, step(*full_graph));
      record.steps = 1;
    } else {
      const std::size_t steps = steps_per_epoch(ds, sub_cfg);
      EpochPool pool(unlabeled, graph_rng);
      for (std::size_t s = 0; s < steps; ++s) {
        const auto chunk = pool.next(sub_cfg.unlabeled_count);
        accumulate(record.mean, step(build_training_subgraph(ds, dm, sub_cfg, chunk, graph_rng)));
      }
      record.steps = steps;
    }
    record.mean = scaled(record.mean, 1.0 / static_cast<double>(record.steps));

    if (validation) {
      record.validation_accuracy =
          validation_accuracy(result.model, ds, dm, sub_cfg, *validation, cfg.seed + epoch);
      if (*record.validation_accuracy > best_accuracy) {
        best_accuracy = *record.validation_accuracy;
        result.report.best_epoch = epoch;
        if (early_stop) {
          best_model = result.model;
          best_adam = result.adam;
        }
      }
    } else {
      result.report.best_epoch = epoch;
    }
    result.report.epochs.push_back(record);
    if (early_stop && epoch - result.report.best_epoch >= cfg.patience) break;
  }

  if (early_stop) {
    result.model = std::move(best_model);
    result.adam = std::move(best_adam);
  }
  result.report.pseudolabels = assign_pseudolabels(result.model, ds, dm, sub_cfg, derive_rng(cfg.seed, kPseudo)());
  result.report.pseudolabels.epoch_of_record = static_cast<int>(result.report.best_epoch);
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

PseudolabelStore assign_pseudolabels(const GcnModel& model, const FeatureDataset& ds,
                                     const PairwiseDistances& dm, const SubgraphConfig& sub_cfg,
                                     std::uint64_t seed) {
  PseudolabelStore store;
  store.by_index.resize(ds.size());
  Rng rng(seed);
  const std::size_t chunk_size = std::max<std::size_t>(1, sub_cfg.unlabeled_count);
  EpochPool pool(ds.unlabeled_indices(), rng);
  while (!pool.exhausted()) {
    const auto chunk = pool.next(chunk_size);
    SubgraphConfig cfg = sub_cfg;
    cfg.unlabeled_count = chunk.size();
    const auto batch = build_training_subgraph(ds, dm, cfg, chunk, rng);
    const auto adj = normalize_adjacency(batch.graph);
    const Matrix probs = softmax_rows(forward(model, adj, batch.graph.node_features(), Head::Classify));
    for (const auto node : batch.nodes_with(Provenance::Unlabeled)) {
      Eigen::Index best = 0;
      const double confidence = probs.row(static_cast<Eigen::Index>(node)).maxCoeff(&best);
      store.by_index[*batch.global_index[node]] = Pseudolabel{static_cast<int>(best), confidence};
    }
  }
  return store;
}

}  // namespace gssl
