#pragma once

#include "gssl/distance.hpp"
#include "gssl/graph_builder.hpp"
#include "gssl/trainer.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gssl {

/// Everything one CLI run depends on. Serialised as flat `key=value` lines;
/// the same text is both the config-file format and the run manifest.
struct RunConfig {
  TrainConfig train;
  SubgraphConfig subgraph{2, 5, 0, 0};  // test_edge_count 0 = derive from edge_probability
  double edge_probability = 0.99;
  Metric metric = Metric::Euclidean;
  bool standardize = true;
  std::size_t ensemble = 1;
  std::size_t inference_batch = 1;
  std::string data;
  std::string validation;
  std::string test;
  std::string out;
};

/// Applies one `key=value` setting; unknown keys and bad values throw
/// InvalidArgument.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

/// Reads `key=value` lines ('#' comments and blank lines allowed) on top of `base`.
RunConfig read_run_config(std::istream& in, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Resolved settings in a fixed key order. `include_output` = false drops the
/// output directory (used for the config echo in metrics).
std::vector<std::pair<std::string, std::string>> describe(const RunConfig& cfg, bool include_output = true);

/// Manifest text: every resolved setting plus the code version.
void write_manifest(std::ostream& out, const RunConfig& cfg);

/// The effective subgraph settings for a dataset with `class_count` classes
/// (fills in T when left at 0).
SubgraphConfig resolve_subgraph(const RunConfig& cfg, int class_count);

std::string code_version();

}  // namespace gssl
