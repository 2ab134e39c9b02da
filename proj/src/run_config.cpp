#include "gssl/run_config.hpp"

#include "gssl/dataset_io.hpp"
#include "gssl/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#ifndef GSSL_VERSION
#define GSSL_VERSION "dev"
#endif

namespace gssl {

std::string code_version() { return GSSL_VERSION; }

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorKind::InvalidArgument, "bad value '" + value + "' for " + key);
}

std::size_t to_size(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v);
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v);
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto& t = cfg.train;
  auto& s = cfg.subgraph;
  if (key == "seed") {
    t.seed = to_u64(key, value);
    s.rng_seed = t.seed;
  } else if (key == "epochs") t.epochs = to_size(key, value);
  else if (key == "patience") t.patience = to_size(key, value);
  else if (key == "lambda1") t.entropy_weight = to_double(key, value);
  else if (key == "lambda2") t.ssl_weight = to_double(key, value);
  else if (key == "ssl") t.tasks = TaskSet::parse(value);
  else if (key == "mask_fraction") t.mask_fraction = to_double(key, value);
  else if (key == "noise_variance") t.noise_variance = to_double(key, value);
  else if (key == "hidden") t.hidden = to_size(key, value);
  else if (key == "learning_rate") t.adam.learning_rate = to_double(key, value);
  else if (key == "use_bias") t.use_bias = to_bool(key, value);
  else if (key == "graph_mode") {
    if (value == "subgraph") t.graph_mode = GraphMode::Subgraph;
    else if (value == "full") t.graph_mode = GraphMode::FullGraph;
    else bad_value(key, value);
  } else if (key == "labeled_per_class") s.labeled_per_class = to_size(key, value);
  else if (key == "unlabeled_count") s.unlabeled_count = to_size(key, value);
  else if (key == "test_edges") s.test_edge_count = to_size(key, value);
  else if (key == "edge_probability") cfg.edge_probability = to_double(key, value);
  else if (key == "metric") cfg.metric = parse_metric(value);
  else if (key == "standardize") cfg.standardize = to_bool(key, value);
  else if (key == "ensemble") cfg.ensemble = to_size(key, value);
  else if (key == "inference_batch") cfg.inference_batch = to_size(key, value);
  else if (key == "data") cfg.data = value;
  else if (key == "validation") cfg.validation = value;
  else if (key == "test") cfg.test = value;
  else if (key == "out") cfg.out = value;
  else if (key == "code_version") {
    // recorded in manifests; informational only
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown config key '" + key + "'");
  }
}

RunConfig read_run_config(std::istream& in, RunConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::InvalidArgument, "expected key=value", line_no);
    apply_setting(base, trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return read_run_config(in, std::move(base));
}

std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg, bool include_output) {
  const auto& t = cfg.train;
  const auto& s = cfg.subgraph;
  std::vector<std::pair<std::string, std::string>> out = {
      {"seed", std::to_string(t.seed)},
      {"epochs", std::to_string(t.epochs)},
      {"patience", std::to_string(t.patience)},
      {"lambda1", format_double(t.entropy_weight)},
      {"lambda2", format_double(t.ssl_weight)},
      {"ssl", t.tasks.to_string()},
      {"mask_fraction", format_double(t.mask_fraction)},
      {"noise_variance", format_double(t.noise_variance)},
      {"hidden", std::to_string(t.hidden)},
      {"learning_rate", format_double(t.adam.learning_rate)},
      {"use_bias", t.use_bias ? "true" : "false"},
      {"graph_mode", t.graph_mode == GraphMode::FullGraph ? "full" : "subgraph"},
      {"labeled_per_class", std::to_string(s.labeled_per_class)},
      {"unlabeled_count", std::to_string(s.unlabeled_count)},
      {"test_edges", std::to_string(s.test_edge_count)},
      {"edge_probability", format_double(cfg.edge_probability)},
      {"metric", std::string(to_string(cfg.metric))},
      {"standardize", cfg.standardize ? "true" : "false"},
      {"ensemble", std::to_string(cfg.ensemble)},
      {"inference_batch", std::to_string(cfg.inference_batch)},
      {"data", cfg.data},
      {"validation", cfg.validation},
      {"test", cfg.test},
  };
  if (include_output) out.emplace_back("out", cfg.out);
  return out;
}

void write_manifest(std::ostream& out, const RunConfig& cfg) {
  for (const auto& [key, value] : describe(cfg)) out << key << '=' << value << '\n';
  out << "code_version=" << code_version() << '\n';
}

SubgraphConfig resolve_subgraph(const RunConfig& cfg, int class_count) {
  SubgraphConfig s = cfg.subgraph;
  s.rng_seed = cfg.train.seed;
  if (s.test_edge_count == 0) s.test_edge_count = default_test_edges(s, class_count, cfg.edge_probability);
  return s;
}

}  // namespace gssl
