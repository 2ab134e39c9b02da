#include "gssl/dataset_io.hpp"

#include "binary_io.hpp"
#include "gssl/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>

namespace gssl {

namespace {

constexpr std::array<char, 4> kMagic = {'A', 'S', 'S', 'L'};

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? line.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::optional<long long> as_integer(std::string_view s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string> sorted_class_names(const std::vector<std::string>& raw) {
  std::vector<std::string> names = raw;
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  const bool numeric = std::all_of(names.begin(), names.end(), [](const std::string& n) { return as_integer(n); });
  if (numeric)
    std::sort(names.begin(), names.end(),
              [](const std::string& a, const std::string& b) { return *as_integer(a) < *as_integer(b); });
  return names;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error(ErrorKind::MalformedValue, "cannot format number");
  return std::string(buf.data(), ptr);
}

FeatureDataset read_csv_dataset(std::istream& in, const std::optional<std::vector<std::string>>& known_classes) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::MalformedHeader, "empty file");
  const auto header = split(trim_cr(line), ',');
  if (header.size() < 3 || header[0] != "id" || header[1] != "label")
    throw Error(ErrorKind::MalformedHeader, "expected 'id,label,f0,...'");
  const std::size_t dim = header.size() - 2;
  for (std::size_t k = 0; k < dim; ++k)
    if (header[k + 2] != "f" + std::to_string(k))
      throw Error(ErrorKind::MalformedHeader, "feature column " + std::to_string(k) + " must be named f" +
                                                  std::to_string(k));

  std::vector<std::string> ids;
  std::vector<std::string> raw_labels;
  std::vector<bool> has_label;
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row_text = trim_cr(line);
    if (row_text.empty()) continue;
    const auto fields = split(row_text, ',');
    if (fields.size() != header.size())
      throw Error(ErrorKind::RaggedRow,
                  "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()),
                  line_no);
    ids.emplace_back(fields[0]);
    has_label.push_back(!fields[1].empty());
    raw_labels.emplace_back(fields[1]);
    for (std::size_t k = 0; k < dim; ++k) {
      const auto f = fields[k + 2];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw Error(ErrorKind::MalformedValue, "cannot parse '" + std::string(f) + "'", line_no);
      values.push_back(v);
    }
  }

  FeatureDataset ds;
  const auto n = static_cast<Eigen::Index>(ids.size());
  ds.features = Eigen::Map<const Matrix>(values.data(), n, static_cast<Eigen::Index>(dim));
  ds.ids = std::move(ids);

  std::vector<std::string> present;
  for (std::size_t i = 0; i < raw_labels.size(); ++i)
    if (has_label[i]) present.push_back(raw_labels[i]);
  ds.class_names = known_classes ? *known_classes : sorted_class_names(present);
  ds.class_count = static_cast<int>(ds.class_names.size());
  std::map<std::string, int, std::less<>> index;
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) index[ds.class_names[c]] = static_cast<int>(c);
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    if (!has_label[i]) {
      ds.labels.emplace_back(std::nullopt);
      continue;
    }
    const auto it = index.find(raw_labels[i]);
    if (it == index.end())
      throw Error(ErrorKind::LabelOutOfRange, "unknown class '" + raw_labels[i] + "'", i);
    ds.labels.emplace_back(it->second);
  }
  return validate_dataset(std::move(ds));
}

void write_csv_dataset(std::ostream& out, const FeatureDataset& ds) {
  out << "id,label";
  for (std::size_t k = 0; k < ds.dim(); ++k) out << ",f" << k;
  out << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << ds.ids[i] << ',';
    if (ds.labels[i]) out << ds.class_name(*ds.labels[i]);
    for (Eigen::Index k = 0; k < ds.features.cols(); ++k)
      out << ',' << format_double(ds.features(static_cast<Eigen::Index>(i), k));
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing CSV");
}

FeatureDataset read_binary_dataset(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw Error(ErrorKind::UnknownMagic, "dataset file lacks the ASSL magic");
  const auto version = detail::read_u32(in);
  if (version != kDatasetVersion)
    throw Error(ErrorKind::UnknownMagic, "unsupported dataset version " + std::to_string(version));
  const auto n = detail::read_u32(in);
  const auto d = detail::read_u32(in);
  const auto c = detail::read_u32(in);

  FeatureDataset ds;
  ds.features = detail::read_matrix(in, n, d);
  ds.class_count = static_cast<int>(c);
  for (std::uint32_t k = 0; k < c; ++k) ds.class_names.push_back(std::to_string(k));
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto label = detail::read_i32(in);
    if (label < -1) throw Error(ErrorKind::LabelOutOfRange, "negative label other than -1", i);
    ds.labels.push_back(label == -1 ? std::nullopt : std::optional<int>(label));
    ds.ids.push_back(std::to_string(i));
  }
  return validate_dataset(std::move(ds));
}

void write_binary_dataset(std::ostream& out, const FeatureDataset& ds) {
  out.write(kMagic.data(), kMagic.size());
  detail::write_u32(out, kDatasetVersion);
  detail::write_u32(out, static_cast<std::uint32_t>(ds.size()));
  detail::write_u32(out, static_cast<std::uint32_t>(ds.dim()));
  detail::write_u32(out, static_cast<std::uint32_t>(ds.class_count));
  detail::write_matrix(out, ds.features);
  for (const auto& label : ds.labels) detail::write_i32(out, label ? *label : -1);
  if (!out) throw Error(ErrorKind::Io, "failed writing binary dataset");
}

FeatureDataset parse_feature_file(const std::filesystem::path& path,
                                  const std::optional<std::vector<std::string>>& known_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::array<char, 4> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == 4 && head == kMagic;
  in.clear();
  in.seekg(0);
  if (binary || path.extension() == ".bin") return read_binary_dataset(in);
  return read_csv_dataset(in, known_classes);
}

void write_feature_file(const std::filesystem::path& path, const FeatureDataset& ds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  if (path.extension() == ".bin")
    write_binary_dataset(out, ds);
  else
    write_csv_dataset(out, ds);
}

}  // namespace gssl
