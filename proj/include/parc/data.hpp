#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "parc/models.hpp"

namespace parc {

/// Raw IDX tensor: dimension sizes and the unsigned-byte payload.
struct IdxTensor {
  std::uint32_t magic = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;

  std::size_t element_count() const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Parses an IDX file (unsigned-byte payload). Files ending in ".gz" are
/// decompressed transparently. Throws FormatError on a bad magic number or a
/// payload that does not match the declared sizes.
IdxTensor read_idx(const std::filesystem::path& path);

/// Parses IDX bytes already in memory.
IdxTensor parse_idx(std::span<const std::uint8_t> bytes);

/// Serializes a tensor in IDX layout (big-endian header).
std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor);

/// Center-crop 28x28 -> 24x24, then 4x4 average pooling -> 6x6.
Eigen::MatrixXd downsample_6x6(const Eigen::MatrixXd& image28);

enum class Split { Train, Test };

std::string to_string(Split split);

/// Samples are columns of `inputs` (36 rows, values in [0, 1]).
struct Dataset {
  Eigen::MatrixXd inputs;
  std::vector<int> labels;
  Split split = Split::Train;

  Eigen::Index size() const { return inputs.cols(); }
  bool has_labels() const { return !labels.empty(); }

  Batch as_batch() const;
  Batch gather(std::span<const Eigen::Index> indices) const;
};

/// Deterministic blurred-blob images on the 6x6 grid; sample i belongs to
/// class i % 10, each class centred at its own grid position.
Dataset synthetic_dataset(Eigen::Index n, std::uint64_t seed, Split split = Split::Train);

/// Loads MNIST from `dir` (train-images-idx3-ubyte[.gz] etc.), draws `count`
/// samples with a seeded permutation (all of them when count <= 0), scales
/// to [0, 1] and downsamples to 6x6.
Dataset load_mnist(const std::filesystem::path& dir, Split split, Eigen::Index count,
                   std::uint64_t seed);

/// Index order for one epoch, split into batches; the last partial batch is
/// kept.
std::vector<std::vector<Eigen::Index>> epoch_batches(Eigen::Index n, Eigen::Index batch_size,
                                                     std::uint64_t seed, std::uint64_t epoch,
                                                     bool shuffle);

/// Batches of one epoch.
std::vector<Batch> batches(const Dataset& dataset, Eigen::Index batch_size, std::uint64_t seed,
                           bool shuffle, std::uint64_t epoch = 0);

/// Endless minibatch stream; each epoch reshuffles from (seed, epoch).
class BatchStream {
 public:
  BatchStream(const Dataset& dataset, Eigen::Index batch_size, std::uint64_t seed,
              bool shuffle = true);

  const Batch& next();
  std::uint64_t epoch() const { return epoch_; }

 private:
  void start_epoch();

  const Dataset* dataset_;
  Eigen::Index batch_size_;
  std::uint64_t seed_;
  bool shuffle_;
  std::uint64_t epoch_ = 0;
  std::size_t cursor_ = 0;
  std::vector<Batch> current_;
};

}  // namespace parc
