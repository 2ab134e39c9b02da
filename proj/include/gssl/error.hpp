#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gssl {

enum class ErrorKind {
  EmptyDataset,
  DuplicateId,
  LabelOutOfRange,
  NonFiniteFeature,
  InvalidClassCount,
  NoCandidates,
  InsufficientClassSamples,
  EmptySubgraph,
  MissingPseudolabels,
  ClassUnderflow,
  InvalidArgument,
  ShapeMismatch,
  NonFiniteGradient,
  NonFiniteLoss,
  NoLabeledNodes,
  EmptyInput,
  ClassWithoutPositives,
  DegenerateEmbeddings,
  SingleClass,
  MalformedHeader,
  RaggedRow,
  MalformedValue,
  UnknownMagic,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `where` carries the offending row,
/// class, or line number when the error has one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, std::optional<std::size_t> where = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> where() const noexcept { return where_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> where_;
};

}  // namespace gssl
