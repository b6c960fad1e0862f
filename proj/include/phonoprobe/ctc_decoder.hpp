#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "phonoprobe/bundle.hpp"

namespace phonoprobe {

/// A run of identical non-blank argmax frames, [start, end).
struct EmittedSpan {
  TokenId token = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const EmittedSpan&, const EmittedSpan&) = default;
};

/// Frame-level provenance of a greedy decode.
struct FramePath {
  std::vector<TokenId> frame_argmax;
  std::vector<EmittedSpan> emitted_spans;

  friend bool operator==(const FramePath&, const FramePath&) = default;
};

struct GreedyDecode {
  std::vector<TokenId> token_ids;
  FramePath path;
};

/// Index of the largest score; the lowest id wins ties. NaN never wins
/// against a number; an all-NaN row yields 0.
TokenId frame_argmax(std::span<const float> scores);

/// Greedy CTC decode: argmax per frame, collapse repeats, drop blanks.
GreedyDecode greedy_decode(const LogitMatrix& logits, TokenId blank_id);

struct LayerHypothesis {
  std::vector<TokenId> token_ids;
  PhonemeSequence tokens;  // vocab strings of token_ids
  FramePath path;

  std::string text() const { return tokens.joined(); }
};

using DecodedLayers = std::map<int, LayerHypothesis>;

/// Decodes every layer of a validated bundle with the same pipeline.
DecodedLayers decode_all_layers(const LayerLogitBundle& bundle);

}  // namespace phonoprobe
