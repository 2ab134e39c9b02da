#include "gssl/error.hpp"

namespace gssl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorKind::InvalidClassCount: return "InvalidClassCount";
    case ErrorKind::NoCandidates: return "NoCandidates";
    case ErrorKind::InsufficientClassSamples: return "InsufficientClassSamples";
    case ErrorKind::EmptySubgraph: return "EmptySubgraph";
    case ErrorKind::MissingPseudolabels: return "MissingPseudolabels";
    case ErrorKind::ClassUnderflow: return "ClassUnderflow";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::NoLabeledNodes: return "NoLabeledNodes";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::ClassWithoutPositives: return "ClassWithoutPositives";
    case ErrorKind::DegenerateEmbeddings: return "DegenerateEmbeddings";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::RaggedRow: return "RaggedRow";
    case ErrorKind::MalformedValue: return "MalformedValue";
    case ErrorKind::UnknownMagic: return "UnknownMagic";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message, std::optional<std::size_t> where) {
  std::string out(to_string(kind));
  if (where) out += "(" + std::to_string(*where) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, std::string message, std::optional<std::size_t> where)
    : std::runtime_error(decorate(kind, message, where)), kind_(kind), where_(where) {}

}  // namespace gssl
