#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "phonoprobe/tokenize.hpp"

namespace phonoprobe {

using TokenId = std::int32_t;

/// Dense frames x vocabulary matrix of real-valued scores, frame-major.
class LogitMatrix {
 public:
  LogitMatrix() = default;
  LogitMatrix(std::size_t frames, std::size_t vocab_size, float fill = 0.0f);
  /// Takes ownership of `values`; its size must be frames * vocab_size.
  LogitMatrix(std::size_t frames, std::size_t vocab_size, std::vector<float> values);

  std::size_t frames() const noexcept { return frames_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }

  std::span<const float> row(std::size_t frame) const {
    return {values_.data() + frame * vocab_size_, vocab_size_};
  }
  std::span<float> row(std::size_t frame) {
    return {values_.data() + frame * vocab_size_, vocab_size_};
  }
  float& at(std::size_t frame, std::size_t token) { return values_[frame * vocab_size_ + token]; }
  float at(std::size_t frame, std::size_t token) const {
    return values_[frame * vocab_size_ + token];
  }

  std::span<const float> values() const noexcept { return values_; }

  /// Bitwise comparison: NaN payloads and signed zeros must match exactly.
  friend bool operator==(const LogitMatrix& a, const LogitMatrix& b);

 private:
  std::size_t frames_ = 0;
  std::size_t vocab_size_ = 0;
  std::vector<float> values_;
};

struct LayerLogits {
  int index = 0;
  LogitMatrix logits;

  friend bool operator==(const LayerLogits&, const LayerLogits&) = default;
};

/// One utterance: per-layer logits, vocabulary, blank id and gold reference.
struct LayerLogitBundle {
  std::string utterance_id;
  std::vector<LayerLogits> layers;  // strictly increasing index
  std::vector<std::string> vocab;
  TokenId blank_id = 0;
  PhonemeSequence reference;
  TokenizerMode tokenizer = TokenizerMode::chars;
  std::map<std::string, std::string> metadata;

  /// Throws InvariantViolation naming the first offending field.
  void validate() const;

  const std::string& blank_token() const { return vocab.at(static_cast<std::size_t>(blank_id)); }
  std::size_t frames() const { return layers.empty() ? 0 : layers.front().logits.frames(); }
  std::vector<int> layer_indices() const;
  const LayerLogits& layer(int index) const;

  friend bool operator==(const LayerLogitBundle&, const LayerLogitBundle&) = default;
};

inline constexpr char kMatrixMagic[4] = {'L', 'L', 'B', '1'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;
inline constexpr std::size_t kMatrixHeaderBytes = 16;
inline constexpr const char* kManifestName = "manifest.json";

/// Writes `bundle` as a directory: manifest.json plus layer_<index>.llb per
/// layer. The parent directory of `dir` must exist.
void write_bundle(const LayerLogitBundle& bundle, const std::filesystem::path& dir);

/// Reads a bundle directory written by write_bundle (or any conforming
/// producer). Values are bit-exact with what was written.
LayerLogitBundle read_bundle(const std::filesystem::path& dir);

/// Matrix file codec, exposed for producers that write layers themselves.
void write_matrix_file(const LogitMatrix& matrix, const std::filesystem::path& file);
LogitMatrix read_matrix_file(const std::filesystem::path& file);

std::string layer_file_name(int index);

/// Bundle directories under `root` (or `root` itself when it holds a
/// manifest), sorted by path.
std::vector<std::filesystem::path> discover_bundles(const std::filesystem::path& root);

}  // namespace phonoprobe
