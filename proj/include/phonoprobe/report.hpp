#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phonoprobe/bundle.hpp"
#include "phonoprobe/ctc_decoder.hpp"
#include "phonoprobe/metrics.hpp"
#include "phonoprobe/regressions.hpp"

namespace phonoprobe {

enum class DocFormat { csv, json, markdown };

std::string_view to_string(DocFormat format);
DocFormat parse_doc_format(std::string_view name);

/// Row label used for deletions in long-format confusion output.
inline constexpr const char* kDeletionLabel = "DEL";

/// RFC-4180 field quoting.
std::string csv_field(std::string_view value);

/// Two-decimal fixed formatting used by every human-facing table.
std::string fixed2(double value);

/// Table-1 shaped: one row per layer, deepest first. CSV and Markdown round
/// PERs to two decimals, JSON keeps full precision. Throws on empty trend.
std::string emit_layer_table(const CorpusTrend& trend, DocFormat format);

struct ComparisonRow {
  std::string utterance_id;
  double per_a = 0.0;
  double per_b = 0.0;
  /// Unset when the baseline PER is zero and the candidate is not.
  std::optional<double> improvement;
};

/// Rows sorted by relative improvement descending (ties by utterance id),
/// truncated to top_k. Throws InvalidArgument on mismatched utterance sets.
std::vector<ComparisonRow> compare_layers(std::span<const LayerReport> reports_a,
                                          std::span<const LayerReport> reports_b,
                                          std::size_t top_k);

std::string emit_comparison(std::span<const LayerReport> reports_a,
                            std::span<const LayerReport> reports_b, std::size_t top_k,
                            DocFormat format);

/// Long format: (layer, ref_token, hyp_token or DEL, count), zero cells omitted.
std::string emit_confusion(const LayerConfusions& matrices, DocFormat format);

/// One line per decoded layer (deepest first), then the reference line.
std::string emit_sidebyside(const LayerLogitBundle& bundle, const DecodedLayers& decoded,
                            DocFormat format = DocFormat::markdown);

/// Per-layer hypotheses with frame provenance.
std::string emit_hypotheses(const LayerLogitBundle& bundle, const DecodedLayers& decoded);

std::string emit_reports(std::span<const LayerReport> reports);

std::string emit_regressions(std::span<const RegressionEvent> events,
                             const RegressionSummary& summary);

}  // namespace phonoprobe
