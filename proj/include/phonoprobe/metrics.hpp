#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "phonoprobe/aligner.hpp"

namespace phonoprobe {

using TokenCounts = std::map<std::string, std::size_t>;
using PairCounts = std::map<std::pair<std::string, std::string>, std::size_t>;

/// PER and error profile of one utterance at one layer.
struct LayerReport {
  std::string utterance_id;
  int layer_index = 0;
  std::size_t reference_length = 0;
  double per = 0.0;  // (S + D + I) / N_ref * 100, unclamped
  EditCounts counts;
  PairCounts substitution_pairs;
  TokenCounts deleted_tokens;
  TokenCounts inserted_tokens;
};

LayerReport score(const AlignmentOutcome& alignment, std::string utterance_id, int layer_index);

/// Aligns and scores. Throws InvalidArgument on an empty reference.
LayerReport score(const PhonemeSequence& ref, const PhonemeSequence& hyp,
                  std::string utterance_id, int layer_index,
                  AlignerMode mode = AlignerMode::ratcliff_obershelp);

/// Relative PER reduction from `baseline` to `candidate`, in percent.
double per_improvement(const LayerReport& baseline, const LayerReport& candidate);

struct ConfusionMatrix {
  PairCounts substitutions;  // (ref, hyp) -> count
  TokenCounts deletions;     // ref -> count

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

using LayerConfusions = std::map<int, ConfusionMatrix>;

LayerConfusions confusion_matrices(std::span<const LayerReport> reports);

enum class CorpusAveraging {
  macro,  // unweighted mean of utterance PERs
  micro,  // total errors over total reference tokens
};

std::string_view to_string(CorpusAveraging averaging);
CorpusAveraging parse_corpus_averaging(std::string_view name);

struct TrendPoint {
  double mean_per_macro = 0.0;
  double mean_per_micro = 0.0;
  EditCounts counts;
  std::size_t utterances = 0;
  std::size_t reference_tokens = 0;

  double per(CorpusAveraging averaging) const {
    return averaging == CorpusAveraging::macro ? mean_per_macro : mean_per_micro;
  }
};

struct CorpusTrend {
  std::map<int, TrendPoint> per_layer;
};

/// Aggregates reports per layer. Every utterance must cover the same layer
/// set unless `allow_ragged`; a repeated (utterance, layer) is always an error.
CorpusTrend trend(std::span<const LayerReport> reports, bool allow_ragged = false);

}  // namespace phonoprobe
