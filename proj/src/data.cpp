#include "greenfed/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "greenfed/rng.hpp"

namespace greenfed::data {

void Dataset::validate() const {
  if (n_samples < 0 || n_features <= 0 || n_classes < 2)
    throw std::invalid_argument("Dataset: bad shape");
  if (features.size() != static_cast<size_t>(n_samples) * static_cast<size_t>(n_features))
    throw std::invalid_argument("Dataset: features size mismatch");
  if (labels.size() != static_cast<size_t>(n_samples))
    throw std::invalid_argument("Dataset: labels size mismatch");
  for (const auto y : labels)
    if (y < 0 || y >= n_classes) throw std::invalid_argument("Dataset: label out of range");
  for (const auto v : features)
    if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite feature");
}

std::size_t IdxTensor::element_size() const {
  switch (element_type) {
    case 0x08:  // unsigned byte
    case 0x09:  // signed byte
      return 1;
    case 0x0B:  // short
      return 2;
    case 0x0C:  // int
    case 0x0D:  // float
      return 4;
    case 0x0E:  // double
      return 8;
    default:
      throw IdxError(IdxError::Kind::UnknownMagic, "idx: unknown element type");
  }
}

std::size_t IdxTensor::element_count() const {
  std::size_t count = 1;
  for (const auto d : dims) count *= d;
  return count;
}

namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

bool known_element_type(std::uint8_t t) {
  return t == 0x08 || t == 0x09 || t == 0x0B || t == 0x0C || t == 0x0D || t == 0x0E;
}

}  // namespace

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw IdxError(IdxError::Kind::Truncated, "idx: truncated magic");
  if (bytes[0] != 0 || bytes[1] != 0)
    throw IdxError(IdxError::Kind::UnknownMagic, "idx: bad magic prefix");
  IdxTensor t;
  t.element_type = bytes[2];
  const unsigned rank = bytes[3];
  if (!known_element_type(t.element_type))
    throw IdxError(IdxError::Kind::UnknownMagic, "idx: unknown element type code");
  if (rank == 0) throw IdxError(IdxError::Kind::UnknownMagic, "idx: zero rank");

  const std::size_t header = 4 + 4 * static_cast<std::size_t>(rank);
  if (bytes.size() < header) throw IdxError(IdxError::Kind::Truncated, "idx: truncated dims");
  t.dims.resize(rank);
  for (unsigned i = 0; i < rank; ++i) t.dims[i] = read_be32(bytes.data() + 4 + 4 * i);

  const std::size_t expected = t.element_count() * t.element_size();
  const std::size_t actual = bytes.size() - header;
  if (actual != expected)
    throw IdxError(IdxError::Kind::SizeMismatch,
                   "idx: payload has " + std::to_string(actual) + " bytes, header declares " +
                       std::to_string(expected));
  t.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return t;
}

std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor) {
  if (!known_element_type(tensor.element_type))
    throw IdxError(IdxError::Kind::UnknownMagic, "idx: unknown element type code");
  if (tensor.dims.empty()) throw IdxError(IdxError::Kind::UnknownMagic, "idx: zero rank");
  if (tensor.payload.size() != tensor.element_count() * tensor.element_size())
    throw IdxError(IdxError::Kind::SizeMismatch, "idx: payload/dims mismatch");
  std::vector<std::uint8_t> out;
  out.reserve(4 + 4 * tensor.dims.size() + tensor.payload.size());
  out.push_back(0);
  out.push_back(0);
  out.push_back(tensor.element_type);
  out.push_back(static_cast<std::uint8_t>(tensor.dims.size()));
  for (const auto d : tensor.dims) write_be32(out, d);
  out.insert(out.end(), tensor.payload.begin(), tensor.payload.end());
  return out;
}

std::vector<std::uint8_t> read_file_maybe_gzip(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (raw.size() >= 2 && raw[0] == 0x1F && raw[1] == 0x8B) {
    // gzip stream; inflate with zlib.
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
      throw std::runtime_error("zlib: inflateInit failed");
    std::vector<std::uint8_t> out;
    out.reserve(raw.size() * 4);
    std::uint8_t buffer[1 << 15];
    zs.next_in = raw.data();
    zs.avail_in = static_cast<uInt>(raw.size());
    int rc = Z_OK;
    do {
      zs.next_out = buffer;
      zs.avail_out = sizeof(buffer);
      rc = inflate(&zs, Z_NO_FLUSH);
      if (rc != Z_OK && rc != Z_STREAM_END) {
        inflateEnd(&zs);
        throw std::runtime_error("zlib: corrupt gzip stream in " + path);
      }
      out.insert(out.end(), buffer, buffer + (sizeof(buffer) - zs.avail_out));
    } while (rc != Z_STREAM_END);
    inflateEnd(&zs);
    return out;
  }
  return raw;
}

MnistPaths MnistPaths::in_directory(const std::string& dir) {
  auto pick = [&dir](const char* stem) {
    const std::string plain = dir + "/" + stem;
    const std::string gz = plain + ".gz";
    return std::filesystem::exists(gz) ? gz : plain;
  };
  MnistPaths p;
  p.train_images = pick("train-images-idx3-ubyte");
  p.train_labels = pick("train-labels-idx1-ubyte");
  p.test_images = pick("t10k-images-idx3-ubyte");
  p.test_labels = pick("t10k-labels-idx1-ubyte");
  return p;
}

namespace {

Dataset mnist_split(const std::string& images_path, const std::string& labels_path) {
  const auto images_bytes = read_file_maybe_gzip(images_path);
  const auto labels_bytes = read_file_maybe_gzip(labels_path);
  const IdxTensor images = parse_idx(images_bytes);
  const IdxTensor labels = parse_idx(labels_bytes);
  if (images.element_type != 0x08 || images.dims.size() != 3)
    throw std::runtime_error("mnist: expected rank-3 ubyte image tensor in " + images_path);
  if (labels.element_type != 0x08 || labels.dims.size() != 1)
    throw std::runtime_error("mnist: expected rank-1 ubyte label tensor in " + labels_path);
  if (images.dims[0] != labels.dims[0])
    throw std::runtime_error("mnist: image/label count mismatch");

  Dataset d;
  d.n_samples = static_cast<int>(images.dims[0]);
  d.n_features = static_cast<int>(images.dims[1] * images.dims[2]);
  d.n_classes = 10;
  d.features.resize(images.payload.size());
  for (size_t i = 0; i < images.payload.size(); ++i)
    d.features[i] = static_cast<float>(images.payload[i]) / 255.0f;
  d.labels.resize(labels.payload.size());
  for (size_t i = 0; i < labels.payload.size(); ++i)
    d.labels[i] = static_cast<std::int32_t>(labels.payload[i]);
  d.validate();
  return d;
}

}  // namespace

MnistData load_mnist(const MnistPaths& paths) {
  MnistData out;
  out.train = mnist_split(paths.train_images, paths.train_labels);
  out.test = mnist_split(paths.test_images, paths.test_labels);
  return out;
}

std::string Partition::to_json() const {
  nlohmann::json obj = nlohmann::json::object();
  for (size_t c = 0; c < assignments.size(); ++c) obj[std::to_string(c)] = assignments[c];
  return obj.dump();
}

namespace {

// One full per-class Dirichlet split attempt.
std::vector<std::vector<std::int32_t>> partition_attempt(
    const std::vector<std::vector<std::int32_t>>& by_class, int n_clients, double alpha,
    rng::Xoshiro256& gen) {
  std::vector<std::vector<std::int32_t>> clients(static_cast<size_t>(n_clients));
  std::vector<double> weights(static_cast<size_t>(n_clients));
  for (const auto& indices : by_class) {
    const auto m = indices.size();
    if (m == 0) continue;

    double total = 0.0;
    do {
      total = 0.0;
      for (auto& w : weights) {
        w = gen.gamma(alpha);
        total += w;
      }
    } while (!(total > 0.0));

    // Largest-remainder apportionment of m samples to the proportions.
    std::vector<std::int64_t> counts(weights.size());
    std::vector<std::pair<double, int>> remainders(weights.size());
    std::int64_t assigned = 0;
    for (size_t j = 0; j < weights.size(); ++j) {
      const double target = static_cast<double>(m) * weights[j] / total;
      counts[j] = static_cast<std::int64_t>(std::floor(target));
      assigned += counts[j];
      remainders[j] = {target - std::floor(target), static_cast<int>(j)};
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    // leftover < n_clients since every fractional part is < 1.
    const std::int64_t leftover = static_cast<std::int64_t>(m) - assigned;
    for (std::int64_t j = 0; j < leftover; ++j)
      counts[static_cast<size_t>(remainders[static_cast<size_t>(j)].second)]++;

    // Fisher-Yates shuffle of the class's indices, then contiguous chunks.
    std::vector<std::int32_t> shuffled = indices;
    for (size_t j = shuffled.size(); j > 1; --j) {
      const auto k = static_cast<size_t>(gen.below(j));
      std::swap(shuffled[j - 1], shuffled[k]);
    }
    size_t cursor = 0;
    for (size_t j = 0; j < counts.size(); ++j) {
      clients[j].insert(clients[j].end(), shuffled.begin() + static_cast<std::ptrdiff_t>(cursor),
                        shuffled.begin() + static_cast<std::ptrdiff_t>(cursor) +
                            static_cast<std::ptrdiff_t>(counts[j]));
      cursor += static_cast<size_t>(counts[j]);
    }
  }
  return clients;
}

}  // namespace

Partition dirichlet_partition(std::span<const std::int32_t> labels, int n_clients, double alpha,
                              std::uint64_t seed) {
  if (n_clients < 1) throw std::invalid_argument("dirichlet_partition: n_clients must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("dirichlet_partition: alpha must be > 0");
  if (labels.size() < static_cast<size_t>(n_clients))
    throw std::invalid_argument("dirichlet_partition: fewer samples than clients");

  std::int32_t n_classes = 0;
  for (const auto y : labels) n_classes = std::max(n_classes, y + 1);
  std::vector<std::vector<std::int32_t>> by_class(static_cast<size_t>(n_classes));
  for (size_t i = 0; i < labels.size(); ++i)
    by_class[static_cast<size_t>(labels[i])].push_back(static_cast<std::int32_t>(i));

  constexpr int kMaxAttempts = 10;
  std::vector<std::vector<std::int32_t>> clients;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    rng::Xoshiro256 gen(rng::derive(seed, "dirichlet", static_cast<std::uint64_t>(attempt)));
    clients = partition_attempt(by_class, n_clients, alpha, gen);
    const bool any_empty =
        std::any_of(clients.begin(), clients.end(), [](const auto& c) { return c.empty(); });
    if (!any_empty) break;
  }

  // Repair remaining empty clients by donating one sample from the largest.
  for (size_t j = 0; j < clients.size(); ++j) {
    if (!clients[j].empty()) continue;
    size_t donor = 0;
    for (size_t k = 1; k < clients.size(); ++k)
      if (clients[k].size() > clients[donor].size()) donor = k;
    if (clients[donor].size() < 2)
      throw std::runtime_error("dirichlet_partition: cannot make every client non-empty");
    clients[j].push_back(clients[donor].back());
    clients[donor].pop_back();
  }

  Partition p;
  p.assignments = std::move(clients);
  p.alpha = alpha;
  return p;
}

Dataset synthetic_classification(int n_samples, int n_features, int n_classes, double class_sep,
                                 std::uint64_t seed) {
  if (n_samples <= 0 || n_features <= 0)
    throw std::invalid_argument("synthetic_classification: sizes must be positive");
  if (n_classes < 2) throw std::invalid_argument("synthetic_classification: need >= 2 classes");

  rng::Xoshiro256 gen(rng::derive(seed, "synthetic"));

  // Random unit direction per class, scaled to class_sep.
  std::vector<double> means(static_cast<size_t>(n_classes) * static_cast<size_t>(n_features));
  for (int c = 0; c < n_classes; ++c) {
    double norm_sq = 0.0;
    double* mean = means.data() + static_cast<size_t>(c) * static_cast<size_t>(n_features);
    do {
      norm_sq = 0.0;
      for (int f = 0; f < n_features; ++f) {
        mean[f] = gen.gaussian();
        norm_sq += mean[f] * mean[f];
      }
    } while (!(norm_sq > 0.0));
    const double scale = class_sep / std::sqrt(norm_sq);
    for (int f = 0; f < n_features; ++f) mean[f] *= scale;
  }

  std::vector<double> raw(static_cast<size_t>(n_samples) * static_cast<size_t>(n_features));
  Dataset d;
  d.n_samples = n_samples;
  d.n_features = n_features;
  d.n_classes = n_classes;
  d.labels.resize(static_cast<size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const int c = i % n_classes;  // balanced
    d.labels[static_cast<size_t>(i)] = c;
    const double* mean = means.data() + static_cast<size_t>(c) * static_cast<size_t>(n_features);
    double* row = raw.data() + static_cast<size_t>(i) * static_cast<size_t>(n_features);
    for (int f = 0; f < n_features; ++f) row[f] = mean[f] + gen.gaussian();
  }

  // Min-max rescale each feature to [0, 1].
  d.features.resize(raw.size());
  for (int f = 0; f < n_features; ++f) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_samples; ++i) {
      const double v = raw[static_cast<size_t>(i) * static_cast<size_t>(n_features) +
                           static_cast<size_t>(f)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (int i = 0; i < n_samples; ++i) {
      const size_t at =
          static_cast<size_t>(i) * static_cast<size_t>(n_features) + static_cast<size_t>(f);
      d.features[at] = static_cast<float>((raw[at] - lo) / span);
    }
  }
  d.validate();
  return d;
}

}  // namespace greenfed::data
