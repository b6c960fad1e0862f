#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phonoprobe/aligner.hpp"

namespace phonoprobe {

enum class Degradation { substitution, deletion };

std::string_view to_string(Degradation kind);

/// A reference position that is a hit at `source_layer` and a substitution
/// or deletion at the deeper `target_layer`.
struct RegressionEvent {
  std::string utterance_id;
  std::size_t ref_index = 0;
  std::string ref_token;
  int source_layer = 0;
  int target_layer = 0;
  Degradation degradation = Degradation::substitution;
  std::string hyp_token;  // substituted token; empty for deletions

  friend bool operator==(const RegressionEvent&, const RegressionEvent&) = default;
  friend auto operator<=>(const RegressionEvent&, const RegressionEvent&) = default;
};

enum class RegressionMode {
  standard,    // sources near the final layer, target = final layer
  exhaustive,  // every ordered layer pair
};

std::string_view to_string(RegressionMode mode);
/// Accepts "default" and "exhaustive".
RegressionMode parse_regression_mode(std::string_view name);

enum class SourceCounting {
  earliest_source,  // a position counts once, from its shallowest hit source
  each_source,      // one event per (position, hit source)
};

struct DetectOptions {
  RegressionMode mode = RegressionMode::standard;
  SourceCounting counting = SourceCounting::earliest_source;
  /// Source layers for standard mode. Unset means the two layer indices just
  /// below the final layer (22 and 23 for a 24-layer encoder).
  std::optional<std::set<int>> source_layers;
};

using LayerAlignments = std::map<int, AlignmentOutcome>;

/// Throws InvalidArgument when the alignments do not share one reference.
std::vector<RegressionEvent> detect(const LayerAlignments& per_layer_alignments,
                                    const std::string& utterance_id,
                                    const DetectOptions& options = {});

struct RegressionSummary {
  std::size_t total = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  /// Sorted by count descending, then token ascending.
  std::vector<std::pair<std::string, std::size_t>> by_token;
  /// (ref -> hyp or "DEL") transitions, same ordering.
  std::vector<std::pair<std::string, std::size_t>> by_transition;
};

RegressionSummary summarize(std::span<const RegressionEvent> events);

}  // namespace phonoprobe
