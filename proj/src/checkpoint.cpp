#include "gssl/checkpoint.hpp"

#include "binary_io.hpp"
#include "gssl/error.hpp"

#include <array>
#include <fstream>

namespace gssl {

namespace {

constexpr std::array<char, 4> kMagic = {'G', 'S', 'S', 'L'};

void write_params(std::ostream& out, const ParameterSet& p) {
  for (const auto& layer : p.layers) {
    detail::write_matrix(out, layer.weight);
    detail::write_matrix(out, layer.bias);
  }
}

// Fills `shape`'s tensors (already sized) from the stream.
void read_params(std::istream& in, ParameterSet& shape) {
  for (auto& layer : shape.layers) {
    layer.weight = detail::read_matrix(in, layer.weight.rows(), layer.weight.cols());
    layer.bias = detail::read_matrix(in, layer.bias.rows(), layer.bias.cols());
  }
}

ParameterSet shaped(const ModelConfig& cfg) {
  ParameterSet p;
  auto set = [&](LayerId id, std::size_t in, std::size_t out) {
    p[id].weight = Matrix::Zero(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
    if (cfg.use_bias) p[id].bias = Matrix::Zero(1, static_cast<Eigen::Index>(out));
  };
  set(LayerId::Shared1, cfg.input_dim, cfg.hidden);
  set(LayerId::Shared2, cfg.hidden, cfg.hidden);
  set(LayerId::Classify, cfg.hidden, cfg.class_count);
  if (cfg.tasks.contains(SslTask::Denoise)) set(LayerId::Denoise, cfg.hidden, cfg.input_dim);
  if (cfg.tasks.contains(SslTask::Completion)) set(LayerId::Completion, cfg.hidden, cfg.input_dim);
  if (cfg.tasks.contains(SslTask::Shuffle)) set(LayerId::Shuffle, cfg.hidden, 1);
  return p;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const auto& cfg = ckpt.model.config;
  out.write(kMagic.data(), kMagic.size());
  detail::write_u32(out, kCheckpointVersion);
  detail::write_u32(out, static_cast<std::uint32_t>(cfg.input_dim));
  detail::write_u32(out, static_cast<std::uint32_t>(cfg.class_count));
  detail::write_u32(out, static_cast<std::uint32_t>(cfg.hidden));
  detail::write_u32(out, cfg.tasks.mask());
  const std::uint32_t flags = (cfg.use_bias ? 1U : 0U) | (ckpt.scaling ? 2U : 0U);
  detail::write_u32(out, flags);

  write_params(out, ckpt.model.params);

  const auto& adam = ckpt.adam;
  detail::write_f64(out, adam.config.learning_rate);
  detail::write_f64(out, adam.config.beta1);
  detail::write_f64(out, adam.config.beta2);
  detail::write_f64(out, adam.config.eps);
  detail::write_u64(out, adam.step);
  write_params(out, adam.first_moment);
  write_params(out, adam.second_moment);

  if (ckpt.scaling) {
    if (static_cast<std::size_t>(ckpt.scaling->mean.size()) != cfg.input_dim)
      throw Error(ErrorKind::ShapeMismatch, "scaling width differs from model input_dim");
    for (const double v : ckpt.scaling->mean) detail::write_f64(out, v);
    for (const double v : ckpt.scaling->scale) detail::write_f64(out, v);
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw Error(ErrorKind::UnknownMagic, "not a checkpoint file");
  const auto version = detail::read_u32(in);
  if (version != kCheckpointVersion)
    throw Error(ErrorKind::UnknownMagic, "unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  auto& cfg = ckpt.model.config;
  cfg.input_dim = detail::read_u32(in);
  cfg.class_count = detail::read_u32(in);
  cfg.hidden = detail::read_u32(in);
  cfg.tasks = TaskSet::from_mask(detail::read_u32(in));
  const auto flags = detail::read_u32(in);
  if (flags > 3U) throw Error(ErrorKind::UnknownMagic, "unknown checkpoint flags");
  cfg.use_bias = (flags & 1U) != 0;

  ckpt.model.params = shaped(cfg);
  read_params(in, ckpt.model.params);

  auto& adam = ckpt.adam;
  adam.config.learning_rate = detail::read_f64(in);
  adam.config.beta1 = detail::read_f64(in);
  adam.config.beta2 = detail::read_f64(in);
  adam.config.eps = detail::read_f64(in);
  adam.step = detail::read_u64(in);
  adam.first_moment = shaped(cfg);
  adam.second_moment = shaped(cfg);
  read_params(in, adam.first_moment);
  read_params(in, adam.second_moment);

  if (flags & 2U) {
    Standardizer s;
    s.mean.resize(static_cast<Eigen::Index>(cfg.input_dim));
    s.scale.resize(static_cast<Eigen::Index>(cfg.input_dim));
    for (auto& v : s.mean) v = detail::read_f64(in);
    for (auto& v : s.scale) v = detail::read_f64(in);
    ckpt.scaling = std::move(s);
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return read_checkpoint(in);
}

}  // namespace gssl
