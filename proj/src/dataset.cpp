#include "gssl/dataset.hpp"

#include "gssl/error.hpp"

#include <cmath>
#include <unordered_set>

namespace gssl {

std::vector<std::size_t> FeatureDataset::labeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> FeatureDataset::unlabeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!labels[i]) out.push_back(i);
  return out;
}

std::size_t FeatureDataset::labeled_count() const {
  std::size_t n = 0;
  for (const auto& l : labels) n += l.has_value();
  return n;
}

std::vector<std::vector<std::size_t>> FeatureDataset::indices_by_class() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(std::max(class_count, 0)));
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i]) out[static_cast<std::size_t>(*labels[i])].push_back(i);
  return out;
}

std::string FeatureDataset::class_name(int cls) const {
  const auto idx = static_cast<std::size_t>(cls);
  if (cls >= 0 && idx < class_names.size()) return class_names[idx];
  return std::to_string(cls);
}

FeatureDataset validate_dataset(FeatureDataset raw) {
  const std::size_t n = raw.size();
  if (n == 0 || raw.dim() == 0)
    throw Error(ErrorKind::EmptyDataset, "dataset needs at least one sample and one feature");
  if (raw.labels.size() != n)
    throw Error(ErrorKind::ShapeMismatch, "label count does not match row count");
  if (raw.ids.size() != n)
    throw Error(ErrorKind::ShapeMismatch, "id count does not match row count");

  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen.insert(raw.ids[i]).second)
      throw Error(ErrorKind::DuplicateId, "id '" + raw.ids[i] + "' repeats", i);
  }

  bool any_label = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& label = raw.labels[i];
    if (!label) continue;
    any_label = true;
    if (*label < 0 || *label >= raw.class_count)
      throw Error(ErrorKind::LabelOutOfRange,
                  "label " + std::to_string(*label) + " with " + std::to_string(raw.class_count) +
                      " classes",
                  i);
  }
  if (any_label && raw.class_count < 2)
    throw Error(ErrorKind::InvalidClassCount, "labeled data needs at least two classes");

  for (std::size_t i = 0; i < n; ++i) {
    if (!raw.features.row(static_cast<Eigen::Index>(i)).allFinite())
      throw Error(ErrorKind::NonFiniteFeature, "row contains NaN or infinity", i);
  }
  return raw;
}

FeatureDataset select_rows(const FeatureDataset& ds, const std::vector<std::size_t>& rows) {
  FeatureDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.features.cols());
  out.class_count = ds.class_count;
  out.class_names = ds.class_names;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(static_cast<Eigen::Index>(rows[r]));
    out.labels.push_back(ds.labels[rows[r]]);
    out.ids.push_back(ds.ids[rows[r]]);
  }
  return out;
}

}  // namespace gssl
