#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Datasets, the IDX container format, Dirichlet non-IID partitioning, and a
// synthetic Gaussian-blob corpus for fast tests.

namespace greenfed::data {

// Features are stored as float32 in [0, 1]; training gathers batches into
// double-precision scratch buffers.
struct Dataset {
  int n_samples = 0;
  int n_features = 0;
  int n_classes = 0;
  std::vector<float> features;  // row-major n_samples x n_features
  std::vector<std::int32_t> labels;

  const float* row(int i) const {
    return features.data() + static_cast<size_t>(i) * static_cast<size_t>(n_features);
  }
  void validate() const;
};

struct IdxError : std::runtime_error {
  enum class Kind { Truncated, UnknownMagic, SizeMismatch };
  IdxError(Kind k, const std::string& what) : std::runtime_error(what), kind(k) {}
  Kind kind;
};

// A parsed IDX tensor: element type code, dimensions, and the raw
// big-endian payload bytes. parse/serialize round-trip exactly.
struct IdxTensor {
  std::uint8_t element_type = 0x08;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;

  std::size_t element_size() const;
  std::size_t element_count() const;
};

IdxTensor parse_idx(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> serialize_idx(const IdxTensor& tensor);

// Reads a whole file; transparently inflates gzip (.gz or by magic bytes).
std::vector<std::uint8_t> read_file_maybe_gzip(const std::string& path);

struct MnistPaths {
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;

  // The four conventional file names under a directory, preferring the
  // .gz variants when present.
  static MnistPaths in_directory(const std::string& dir);
};

struct MnistData {
  Dataset train;
  Dataset test;
};

// Parses the four IDX files (images rank 3 ubyte, labels rank 1 ubyte) and
// rescales pixels to [0, 1].
MnistData load_mnist(const MnistPaths& paths);

struct Partition {
  std::vector<std::vector<std::int32_t>> assignments;  // one index list per client
  double alpha = 0.0;

  std::string to_json() const;
};

// Splits each class's indices among clients with Dirichlet(alpha)
// proportions. Empty clients are retried a bounded number of times, then
// repaired by donating one sample from the largest client. Deterministic
// and platform-independent for a fixed seed.
Partition dirichlet_partition(std::span<const std::int32_t> labels, int n_clients, double alpha,
                              std::uint64_t seed);

// Gaussian blobs with one random unit-direction mean per class at distance
// class_sep from the origin, min-max rescaled to [0, 1] per feature.
Dataset synthetic_classification(int n_samples, int n_features, int n_classes, double class_sep,
                                 std::uint64_t seed);

}  // namespace greenfed::data
