#pragma once

// Binary policy checkpoint:
//
//   offset  size  field
//   0       9     magic "SHIREPOL1"
//   9       4     obs_dim            (uint32 little-endian)
//   13      4     n_actions          (uint32)
//   17      4     hidden layer count (uint32)
//   21      4*k   hidden widths      (uint32 each)
//   ...     8*P   parameters         (IEEE-754 float64 little-endian)
//
// Parameters follow ActorCriticParams::flat() order: actor layers then critic layers,
// each as a row-major weight matrix followed by its bias.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "shire/error.hpp"
#include "shire/nn.hpp"

namespace shire {

inline constexpr std::string_view kCheckpointMagic = "SHIREPOL1";

namespace detail {

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (sizeof(T) == 8) {
    std::memcpy(&bits, &value, 8);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get_le() {
    if (pos_ + sizeof(T) > bytes_.size()) throw IoError("checkpoint truncated");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    if constexpr (sizeof(T) == 8) {
      T value;
      std::memcpy(&value, &bits, 8);
      return value;
    } else {
      return static_cast<T>(bits);
    }
  }

  std::string_view take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw IoError("checkpoint truncated");
    std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> serialize_checkpoint(const nn::ActorCriticParams& params) {
  std::vector<unsigned char> out(kCheckpointMagic.begin(), kCheckpointMagic.end());
  const auto& shape = params.shape();
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.obs_dim));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.n_actions));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.hidden.size()));
  for (int h : shape.hidden) detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(h));
  for (Eigen::Index i = 0; i < params.flat().size(); ++i) detail::put_le<double>(out, params.flat()(i));
  return out;
}

inline nn::ActorCriticParams deserialize_checkpoint(const std::vector<unsigned char>& bytes) {
  detail::ByteReader in(bytes);
  if (bytes.size() < kCheckpointMagic.size() || in.take(kCheckpointMagic.size()) != kCheckpointMagic) {
    throw IoError("checkpoint: bad magic (expected SHIREPOL1)");
  }
  nn::NetworkShape shape;
  shape.obs_dim = static_cast<int>(in.get_le<std::uint32_t>());
  shape.n_actions = static_cast<int>(in.get_le<std::uint32_t>());
  const auto layers = in.get_le<std::uint32_t>();
  if (layers == 0 || layers > 64) throw IoError("checkpoint: implausible hidden layer count");
  shape.hidden.clear();
  for (std::uint32_t k = 0; k < layers; ++k) shape.hidden.push_back(static_cast<int>(in.get_le<std::uint32_t>()));
  if (shape.obs_dim < 1 || shape.n_actions < 1) throw IoError("checkpoint: invalid dimensions");
  for (int h : shape.hidden) {
    if (h < 1 || h > (1 << 20)) throw IoError("checkpoint: invalid hidden width");
  }
  nn::ActorCriticParams params(shape);
  if (in.remaining() != params.size() * 8) {
    throw IoError("checkpoint: expected " + std::to_string(params.size() * 8) +
                  " parameter bytes, found " + std::to_string(in.remaining()));
  }
  for (Eigen::Index i = 0; i < params.flat().size(); ++i) params.flat()(i) = in.get_le<double>();
  return params;
}

inline void save_checkpoint(const nn::ActorCriticParams& params, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

inline nn::ActorCriticParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

/// Load and verify the checkpoint matches an environment's network dimensions.
inline nn::ActorCriticParams load_checkpoint_for(const std::filesystem::path& path, int obs_dim,
                                                 int n_actions) {
  auto params = load_checkpoint(path);
  if (params.obs_dim() != obs_dim || params.n_actions() != n_actions) {
    throw IoError("checkpoint shape mismatch: file has obs_dim=" + std::to_string(params.obs_dim()) +
                  " n_actions=" + std::to_string(params.n_actions()) + ", environment needs obs_dim=" +
                  std::to_string(obs_dim) + " n_actions=" + std::to_string(n_actions));
  }
  return params;
}

}  // namespace shire
