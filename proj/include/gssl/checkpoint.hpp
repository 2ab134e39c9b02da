#pragma once

#include "gssl/adam.hpp"
#include "gssl/gcn_model.hpp"
#include "gssl/standardizer.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace gssl {

/// Model checkpoint layout (all integers u32 / floats f64, little-endian):
///   "GSSL" | version | D | C | hidden | task mask | flags (bit0 bias, bit1 scaling)
///   parameters of each present layer in LayerId order, weight then bias, row-major
///   Adam: lr, beta1, beta2, eps, step (u64), first moments, second moments
///   optional scaling: D means, D scales
struct Checkpoint {
  GcnModel model;
  AdamState adam;
  std::optional<Standardizer> scaling;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gssl
