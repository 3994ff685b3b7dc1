#include "parc/data.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <zlib.h>

#include "parc/errors.hpp"

namespace parc {

namespace {

using Eigen::Index;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t at) {
  return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
         (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::vector<std::uint8_t> read_plain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> read_gzip(const std::filesystem::path& path) {
  gzFile file = gzopen(path.string().c_str(), "rb");
  if (file == nullptr) {
    throw FormatError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> out;
  std::uint8_t buffer[1 << 16];
  int got = 0;
  while ((got = gzread(file, buffer, sizeof(buffer))) > 0) {
    out.insert(out.end(), buffer, buffer + got);
  }
  const bool failed = got < 0;
  gzclose(file);
  if (failed) {
    throw FormatError("corrupt gzip stream in " + path.string());
  }
  return out;
}

std::filesystem::path find_mnist_file(const std::filesystem::path& dir, const std::string& stem) {
  for (const std::string& candidate : {stem, stem + ".gz"}) {
    if (std::filesystem::exists(dir / candidate)) {
      return dir / candidate;
    }
  }
  throw FormatError("MNIST file " + stem + "[.gz] not found in " + dir.string());
}

}  // namespace

std::size_t IdxTensor::element_count() const {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t acc, std::uint32_t d) { return acc * d; });
}

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) {
    throw FormatError("IDX data shorter than its magic number");
  }
  IdxTensor t;
  t.magic = read_be32(bytes, 0);
  const std::uint32_t ndims = t.magic & 0xFFu;
  if ((t.magic & 0xFFFFFF00u) != 0x00000800u || ndims == 0) {
    char hex[16];
    std::snprintf(hex, sizeof(hex), "0x%08X", t.magic);
    throw FormatError(std::string("bad IDX magic ") + hex + " (expected unsigned-byte tensor)");
  }
  const std::size_t header = 4 + 4 * std::size_t{ndims};
  if (bytes.size() < header) {
    throw FormatError("IDX header truncated");
  }
  for (std::uint32_t i = 0; i < ndims; ++i) {
    t.dims.push_back(read_be32(bytes, 4 + 4 * i));
  }
  const std::size_t expected = t.element_count();
  if (bytes.size() - header != expected) {
    throw FormatError("IDX payload has " + std::to_string(bytes.size() - header) +
                      " bytes, header declares " + std::to_string(expected));
  }
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return t;
}

IdxTensor read_idx(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes =
      path.extension() == ".gz" ? read_gzip(path) : read_plain(path);
  return parse_idx(bytes);
}

std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor) {
  std::vector<std::uint8_t> out;
  write_be32(out, 0x00000800u | static_cast<std::uint32_t>(tensor.dims.size()));
  for (const auto d : tensor.dims) {
    write_be32(out, d);
  }
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  return out;
}

Eigen::MatrixXd downsample_6x6(const Eigen::MatrixXd& image28) {
  if (image28.rows() != 28 || image28.cols() != 28) {
    throw DimensionMismatch("downsample_6x6 expects a 28x28 image");
  }
  Eigen::MatrixXd out(6, 6);
  for (Index r = 0; r < 6; ++r) {
    for (Index c = 0; c < 6; ++c) {
      out(r, c) = image28.block(2 + 4 * r, 2 + 4 * c, 4, 4).sum() / 16.0;
    }
  }
  return out;
}

std::string to_string(Split split) { return split == Split::Train ? "train" : "test"; }

Batch Dataset::as_batch() const {
  Batch b;
  b.x = inputs;
  b.labels = labels;
  return b;
}

Batch Dataset::gather(std::span<const Index> indices) const {
  Batch b;
  b.x.resize(inputs.rows(), static_cast<Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    b.x.col(static_cast<Index>(j)) = inputs.col(indices[j]);
  }
  if (has_labels()) {
    b.labels.reserve(indices.size());
    for (const Index i : indices) {
      b.labels.push_back(labels[static_cast<std::size_t>(i)]);
    }
  }
  return b;
}

Dataset synthetic_dataset(Index n, std::uint64_t seed, Split split) {
  if (n < 1) {
    throw ConfigError("synthetic_dataset needs n >= 1");
  }
  // Two rows of five blob centres (row, column) on the 6x6 grid.
  static constexpr double kCenterRow[2] = {1.5, 3.5};
  static constexpr double kCenterCol[5] = {0.5, 1.5, 2.5, 3.5, 4.5};

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.35);
  std::uniform_real_distribution<double> amplitude(0.5, 1.0);
  std::uniform_real_distribution<double> width(0.7, 1.1);
  std::uniform_real_distribution<double> noise(0.0, 0.05);

  Dataset ds;
  ds.split = split;
  ds.inputs.resize(36, n);
  ds.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 10);
    const double cr = kCenterRow[label / 5] + jitter(rng);
    const double cc = kCenterCol[label % 5] + jitter(rng);
    const double amp = amplitude(rng);
    const double sigma = width(rng);
    for (Index r = 0; r < 6; ++r) {
      for (Index c = 0; c < 6; ++c) {
        const double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
        const double v = amp * std::exp(-d2 / (2.0 * sigma * sigma)) + noise(rng);
        ds.inputs(r * 6 + c, i) = std::clamp(v, 0.0, 1.0);
      }
    }
    ds.labels[static_cast<std::size_t>(i)] = label;
  }
  return ds;
}

Dataset load_mnist(const std::filesystem::path& dir, Split split, Index count, std::uint64_t seed) {
  const std::string prefix = split == Split::Train ? "train" : "t10k";
  const IdxTensor images = read_idx(find_mnist_file(dir, prefix + "-images-idx3-ubyte"));
  const IdxTensor labels = read_idx(find_mnist_file(dir, prefix + "-labels-idx1-ubyte"));
  if (images.magic != kIdxImageMagic || images.dims[1] != 28 || images.dims[2] != 28) {
    throw FormatError("MNIST image file is not an N x 28 x 28 tensor");
  }
  if (labels.magic != kIdxLabelMagic || labels.dims[0] != images.dims[0]) {
    throw FormatError("MNIST label file does not match the image file");
  }
  const Index total = images.dims[0];
  std::vector<Index> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), Index{0});
  if (count > 0 && count < total) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(static_cast<std::size_t>(count));
  }

  Dataset ds;
  ds.split = split;
  ds.inputs.resize(36, static_cast<Index>(order.size()));
  ds.labels.reserve(order.size());
  Eigen::MatrixXd image(28, 28);
  for (std::size_t j = 0; j < order.size(); ++j) {
    const std::size_t base = static_cast<std::size_t>(order[j]) * 28 * 28;
    for (Index r = 0; r < 28; ++r) {
      for (Index c = 0; c < 28; ++c) {
        image(r, c) = images.data[base + static_cast<std::size_t>(r * 28 + c)] / 255.0;
      }
    }
    const Eigen::MatrixXd small = downsample_6x6(image);
    for (Index r = 0; r < 6; ++r) {
      for (Index c = 0; c < 6; ++c) {
        ds.inputs(r * 6 + c, static_cast<Index>(j)) = small(r, c);
      }
    }
    const int label = labels.data[static_cast<std::size_t>(order[j])];
    if (label > 9) {
      throw FormatError("MNIST label out of range");
    }
    ds.labels.push_back(label);
  }
  return ds;
}

std::vector<std::vector<Index>> epoch_batches(Index n, Index batch_size, std::uint64_t seed,
                                              std::uint64_t epoch, bool shuffle) {
  if (batch_size < 1) {
    throw ConfigError("batch_size must be >= 1");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  if (shuffle) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<Index>> out;
  for (Index start = 0; start < n; start += batch_size) {
    const Index stop = std::min(n, start + batch_size);
    out.emplace_back(order.begin() + start, order.begin() + stop);
  }
  return out;
}

std::vector<Batch> batches(const Dataset& dataset, Index batch_size, std::uint64_t seed,
                           bool shuffle, std::uint64_t epoch) {
  std::vector<Batch> out;
  for (const auto& idx : epoch_batches(dataset.size(), batch_size, seed, epoch, shuffle)) {
    out.push_back(dataset.gather(idx));
  }
  return out;
}

BatchStream::BatchStream(const Dataset& dataset, Index batch_size, std::uint64_t seed, bool shuffle)
    : dataset_(&dataset), batch_size_(batch_size), seed_(seed), shuffle_(shuffle) {
  if (dataset.size() == 0) {
    throw ConfigError("BatchStream over an empty dataset");
  }
  start_epoch();
}

void BatchStream::start_epoch() {
  current_ = batches(*dataset_, batch_size_, seed_, shuffle_, epoch_);
  cursor_ = 0;
}

const Batch& BatchStream::next() {
  if (cursor_ == current_.size()) {
    ++epoch_;
    start_epoch();
  }
  return current_[cursor_++];
}

}  // namespace parc
