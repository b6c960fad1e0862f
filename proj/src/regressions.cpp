#include "phonoprobe/regressions.hpp"

#include <algorithm>

#include "phonoprobe/error.hpp"

namespace phonoprobe {

std::string_view to_string(Degradation kind) {
  return kind == Degradation::substitution ? "substitution" : "deletion";
}

std::string_view to_string(RegressionMode mode) {
  return mode == RegressionMode::standard ? "default" : "exhaustive";
}

RegressionMode parse_regression_mode(std::string_view name) {
  if (name == "default") return RegressionMode::standard;
  if (name == "exhaustive") return RegressionMode::exhaustive;
  throw InvalidArgument("unknown regression mode '" + std::string(name) +
                        "' (expected default or exhaustive)");
}

namespace {

bool is_hit(const AlignmentOutcome& a, std::size_t i) {
  return a.ref_labels[i].kind == LabelKind::hit;
}

bool is_degraded(const AlignmentOutcome& a, std::size_t i) {
  const auto kind = a.ref_labels[i].kind;
  return kind == LabelKind::substitution || kind == LabelKind::deletion;
}

RegressionEvent make_event(const std::string& utterance_id, const AlignmentOutcome& target,
                           std::size_t i, int source_layer, int target_layer) {
  const auto& label = target.ref_labels[i];
  const bool sub = label.kind == LabelKind::substitution;
  return {utterance_id,
          i,
          target.reference[i],
          source_layer,
          target_layer,
          sub ? Degradation::substitution : Degradation::deletion,
          sub ? label.counterpart : std::string{}};
}

}  // namespace

std::vector<RegressionEvent> detect(const LayerAlignments& alignments,
                                    const std::string& utterance_id,
                                    const DetectOptions& options) {
  std::vector<RegressionEvent> events;
  if (alignments.size() < 2) return events;

  const auto& reference = alignments.begin()->second.reference;
  for (const auto& [layer, a] : alignments) {
    if (a.reference.size() != reference.size() || a.ref_labels.size() != reference.size()) {
      throw InvalidArgument("detect: " + utterance_id + " layer " + std::to_string(layer) +
                            " aligns a reference of length " +
                            std::to_string(a.ref_labels.size()) + ", expected " +
                            std::to_string(reference.size()));
    }
    if (a.reference != reference) {
      throw InvalidArgument("detect: " + utterance_id + " layer " + std::to_string(layer) +
                            " aligns a different reference");
    }
  }
  const std::size_t n = reference.size();

  if (options.mode == RegressionMode::exhaustive) {
    for (auto src = alignments.begin(); src != alignments.end(); ++src) {
      for (auto dst = std::next(src); dst != alignments.end(); ++dst) {
        for (std::size_t i = 0; i < n; ++i) {
          if (is_hit(src->second, i) && is_degraded(dst->second, i)) {
            events.push_back(make_event(utterance_id, dst->second, i, src->first, dst->first));
          }
        }
      }
    }
  } else {
    const auto& [final_layer, target] = *alignments.rbegin();
    const std::set<int> sources =
        options.source_layers.value_or(std::set<int>{final_layer - 2, final_layer - 1});
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_degraded(target, i)) continue;
      for (int source : sources) {
        if (source >= final_layer) break;
        auto it = alignments.find(source);
        if (it == alignments.end() || !is_hit(it->second, i)) continue;
        events.push_back(make_event(utterance_id, target, i, source, final_layer));
        if (options.counting == SourceCounting::earliest_source) break;
      }
    }
  }

  std::sort(events.begin(), events.end(), [](const RegressionEvent& x, const RegressionEvent& y) {
    return std::tie(x.ref_index, x.source_layer, x.target_layer) <
           std::tie(y.ref_index, y.source_layer, y.target_layer);
  });
  return events;
}

namespace {

std::vector<std::pair<std::string, std::size_t>> ranked(
    const std::map<std::string, std::size_t>& counts) {
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });
  return out;
}

}  // namespace

RegressionSummary summarize(std::span<const RegressionEvent> events) {
  RegressionSummary out;
  std::map<std::string, std::size_t> by_token;
  std::map<std::string, std::size_t> by_transition;
  for (const auto& e : events) {
    ++out.total;
    if (e.degradation == Degradation::substitution) {
      ++out.substitutions;
      ++by_transition[e.ref_token + " -> " + e.hyp_token];
    } else {
      ++out.deletions;
      ++by_transition[e.ref_token + " -> DEL"];
    }
    ++by_token[e.ref_token];
  }
  out.by_token = ranked(by_token);
  out.by_transition = ranked(by_transition);
  return out;
}

}  // namespace phonoprobe
