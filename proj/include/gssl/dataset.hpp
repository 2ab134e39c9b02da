#pragma once

#include "gssl/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gssl {

/// N samples of D features with optional dense class labels in [0, class_count).
/// An absent label marks an unlabeled sample.
struct FeatureDataset {
  Matrix features;
  std::vector<std::optional<int>> labels;
  int class_count = 0;
  std::vector<std::string> ids;
  /// Display names per class index; empty means "use the index".
  std::vector<std::string> class_names;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  std::vector<std::size_t> labeled_indices() const;
  std::vector<std::size_t> unlabeled_indices() const;
  std::size_t labeled_count() const;
  std::size_t unlabeled_count() const { return size() - labeled_count(); }

  /// Labeled indices grouped by class, each group ascending.
  std::vector<std::vector<std::size_t>> indices_by_class() const;

  std::string class_name(int cls) const;
};

/// Returns `raw` unchanged iff every dataset invariant holds; otherwise throws
/// an Error naming the offending row.
FeatureDataset validate_dataset(FeatureDataset raw);

/// Row subset with labels/ids carried along; class metadata is kept.
FeatureDataset select_rows(const FeatureDataset& ds, const std::vector<std::size_t>& rows);

}  // namespace gssl
