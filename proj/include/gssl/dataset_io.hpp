#pragma once

#include "gssl/dataset.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gssl {

/// CSV: header `id,label,f0,...,f{D-1}`, one sample per line, empty label =
/// unlabeled. Label strings map to class indices in sorted order (numeric
/// order when every label is an integer). Passing `known_classes` fixes the
/// mapping instead; labels outside it are rejected.
FeatureDataset read_csv_dataset(std::istream& in,
                                const std::optional<std::vector<std::string>>& known_classes = std::nullopt);
void write_csv_dataset(std::ostream& out, const FeatureDataset& ds);

/// Binary: "ASSL", version u32, N u32, D u32, C u32, N*D f64 row-major, then N
/// i32 labels (-1 = unlabeled); little-endian. Ids are not stored and read
/// back as row numbers; class names read back as "0".."C-1".
FeatureDataset read_binary_dataset(std::istream& in);
void write_binary_dataset(std::ostream& out, const FeatureDataset& ds);

inline constexpr std::uint32_t kDatasetVersion = 1;

/// Sniffs the "ASSL" magic; anything else is parsed as CSV unless the path
/// ends in ".bin", which must carry the magic.
FeatureDataset parse_feature_file(const std::filesystem::path& path,
                                  const std::optional<std::vector<std::string>>& known_classes = std::nullopt);

/// Binary for ".bin" paths, CSV otherwise.
void write_feature_file(const std::filesystem::path& path, const FeatureDataset& ds);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace gssl
