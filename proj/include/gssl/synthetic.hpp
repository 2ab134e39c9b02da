#pragma once

#include "gssl/dataset.hpp"

#include <cstddef>
#include <cstdint>

namespace gssl {

struct SyntheticSpec {
  int classes = 4;
  std::size_t per_class = 100;
  std::size_t dim = 16;
  double cluster_std = 1.0;
  double separation = 4.0;
  double label_fraction = 0.1;
  std::uint64_t seed = 0;
};

void validate_synthetic_spec(const SyntheticSpec& spec);

/// Isotropic Gaussian clusters whose means sit at `separation` times a random
/// unit direction per class. Exactly ceil(label_fraction * per_class) samples
/// of each class keep their label. Rows are shuffled.
FeatureDataset generate_synthetic(const SyntheticSpec& spec);

struct SyntheticSplit {
  FeatureDataset train;    // identical to generate_synthetic(spec)
  FeatureDataset holdout;  // fully labeled draws from the same clusters
};

SyntheticSplit generate_synthetic_split(const SyntheticSpec& spec, std::size_t holdout_per_class);

}  // namespace gssl
