#include "phonoprobe/ctc_decoder.hpp"

#include <cmath>

#include "phonoprobe/error.hpp"

namespace phonoprobe {

TokenId frame_argmax(std::span<const float> scores) {
  std::size_t best = 0;
  bool found = false;
  for (std::size_t v = 0; v < scores.size(); ++v) {
    if (std::isnan(scores[v])) continue;
    if (!found || scores[v] > scores[best]) {
      best = v;
      found = true;
    }
  }
  return static_cast<TokenId>(best);
}

GreedyDecode greedy_decode(const LogitMatrix& logits, TokenId blank_id) {
  if (logits.vocab_size() < 2) {
    throw InvalidArgument("greedy_decode: vocabulary needs at least 2 entries");
  }
  if (blank_id < 0 || static_cast<std::size_t>(blank_id) >= logits.vocab_size()) {
    throw InvalidArgument("greedy_decode: blank_id " + std::to_string(blank_id) +
                          " outside vocabulary");
  }

  GreedyDecode out;
  auto& path = out.path;
  path.frame_argmax.reserve(logits.frames());
  for (std::size_t t = 0; t < logits.frames(); ++t) {
    const TokenId id = frame_argmax(logits.row(t));
    path.frame_argmax.push_back(id);
    // A new run starts whenever the argmax changes.
    if (t > 0 && path.frame_argmax[t - 1] == id) {
      if (id != blank_id) path.emitted_spans.back().end = t + 1;
      continue;
    }
    if (id != blank_id) path.emitted_spans.push_back({id, t, t + 1});
  }
  out.token_ids.reserve(path.emitted_spans.size());
  for (const auto& span : path.emitted_spans) out.token_ids.push_back(span.token);
  return out;
}

DecodedLayers decode_all_layers(const LayerLogitBundle& bundle) {
  bundle.validate();
  DecodedLayers out;
  for (const auto& layer : bundle.layers) {
    auto decoded = greedy_decode(layer.logits, bundle.blank_id);
    std::vector<std::string> tokens;
    tokens.reserve(decoded.token_ids.size());
    for (TokenId id : decoded.token_ids) tokens.push_back(bundle.vocab[static_cast<std::size_t>(id)]);
    out.emplace(layer.index, LayerHypothesis{std::move(decoded.token_ids),
                                             PhonemeSequence(std::move(tokens)),
                                             std::move(decoded.path)});
  }
  return out;
}

}  // namespace phonoprobe
