#include "phonoprobe/metrics.hpp"

#include <set>

#include "phonoprobe/error.hpp"

namespace phonoprobe {

LayerReport score(const AlignmentOutcome& alignment, std::string utterance_id, int layer_index) {
  const std::size_t n = alignment.reference.size();
  if (n == 0) {
    throw InvalidArgument("score: empty reference for " + utterance_id +
                          " (PER is undefined without reference tokens)");
  }
  LayerReport report;
  report.utterance_id = std::move(utterance_id);
  report.layer_index = layer_index;
  report.reference_length = n;
  report.counts = alignment.counts;
  report.per = 100.0 * static_cast<double>(alignment.counts.errors()) / static_cast<double>(n);

  for (std::size_t i = 0; i < n; ++i) {
    const auto& label = alignment.ref_labels[i];
    if (label.kind == LabelKind::substitution) {
      ++report.substitution_pairs[{alignment.reference[i], label.counterpart}];
    } else if (label.kind == LabelKind::deletion) {
      ++report.deleted_tokens[alignment.reference[i]];
    }
  }
  for (std::size_t j = 0; j < alignment.hyp_labels.size(); ++j) {
    if (alignment.hyp_labels[j].kind == LabelKind::insertion) {
      ++report.inserted_tokens[alignment.hypothesis[j]];
    }
  }
  return report;
}

LayerReport score(const PhonemeSequence& ref, const PhonemeSequence& hyp,
                  std::string utterance_id, int layer_index, AlignerMode mode) {
  if (ref.empty()) {
    throw InvalidArgument("score: empty reference for " + utterance_id +
                          " (PER is undefined without reference tokens)");
  }
  return score(align(ref, hyp, mode), std::move(utterance_id), layer_index);
}

double per_improvement(const LayerReport& baseline, const LayerReport& candidate) {
  if (baseline.utterance_id != candidate.utterance_id) {
    throw InvalidArgument("per_improvement: utterances differ ('" + baseline.utterance_id +
                          "' vs '" + candidate.utterance_id + "')");
  }
  if (baseline.per == 0.0) {
    throw InvalidArgument("per_improvement: baseline PER is zero for " + baseline.utterance_id);
  }
  return (baseline.per - candidate.per) / baseline.per * 100.0;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (const auto& [key, n] : other.substitutions) substitutions[key] += n;
  for (const auto& [key, n] : other.deletions) deletions[key] += n;
  return *this;
}

LayerConfusions confusion_matrices(std::span<const LayerReport> reports) {
  LayerConfusions out;
  for (const auto& r : reports) {
    ConfusionMatrix m{r.substitution_pairs, r.deleted_tokens};
    out[r.layer_index] += m;
  }
  return out;
}

std::string_view to_string(CorpusAveraging averaging) {
  return averaging == CorpusAveraging::macro ? "macro" : "micro";
}

CorpusAveraging parse_corpus_averaging(std::string_view name) {
  if (name == "macro") return CorpusAveraging::macro;
  if (name == "micro") return CorpusAveraging::micro;
  throw InvalidArgument("unknown corpus averaging '" + std::string(name) +
                        "' (expected micro or macro)");
}

CorpusTrend trend(std::span<const LayerReport> reports, bool allow_ragged) {
  std::map<std::string, std::set<int>> coverage;
  for (const auto& r : reports) {
    if (!coverage[r.utterance_id].insert(r.layer_index).second) {
      throw InvalidArgument("trend: duplicate report for " + r.utterance_id + " at layer " +
                            std::to_string(r.layer_index));
    }
  }
  if (!allow_ragged && !coverage.empty()) {
    const auto& expected = coverage.begin()->second;
    for (const auto& [utt, layers] : coverage) {
      if (layers != expected) {
        throw InvalidArgument("trend: ragged layer coverage, " + utt + " covers " +
                              std::to_string(layers.size()) + " layers but " +
                              coverage.begin()->first + " covers " +
                              std::to_string(expected.size()));
      }
    }
  }

  CorpusTrend out;
  std::map<int, double> per_sum;
  for (const auto& r : reports) {
    auto& point = out.per_layer[r.layer_index];
    point.counts += r.counts;
    point.utterances += 1;
    point.reference_tokens += r.reference_length;
    per_sum[r.layer_index] += r.per;
  }
  for (auto& [layer, point] : out.per_layer) {
    point.mean_per_macro = per_sum[layer] / static_cast<double>(point.utterances);
    point.mean_per_micro = point.reference_tokens == 0
                               ? 0.0
                               : 100.0 * static_cast<double>(point.counts.errors()) /
                                     static_cast<double>(point.reference_tokens);
  }
  return out;
}

}  // namespace phonoprobe
