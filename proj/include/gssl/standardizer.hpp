#pragma once

#include "gssl/types.hpp"

namespace gssl {

/// Per-feature z-score transform. Constant features keep scale 1.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& features);
  Matrix apply(const Matrix& features) const;
};

}  // namespace gssl
