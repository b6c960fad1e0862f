#include "phonoprobe/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ranges>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "phonoprobe/error.hpp"

namespace phonoprobe {

using nlohmann::json;

std::string_view to_string(DocFormat format) {
  switch (format) {
    case DocFormat::csv:
      return "csv";
    case DocFormat::json:
      return "json";
    case DocFormat::markdown:
      return "markdown";
  }
  return "csv";
}

DocFormat parse_doc_format(std::string_view name) {
  if (name == "csv") return DocFormat::csv;
  if (name == "json") return DocFormat::json;
  if (name == "markdown" || name == "md") return DocFormat::markdown;
  throw InvalidArgument("unknown format '" + std::string(name) + "'");
}

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string fixed2(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

namespace {

constexpr const char* kCrlf = "\r\n";

class CsvWriter {
 public:
  template <typename... Fields>
  CsvWriter& row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << csv_field(fields), first = false), ...);
    out_ << kCrlf;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string md_cell(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string emit_layer_table(const CorpusTrend& trend, DocFormat format) {
  if (trend.per_layer.empty()) throw InvalidArgument("emit_layer_table: empty trend");
  const auto rows = std::views::reverse(trend.per_layer);

  switch (format) {
    case DocFormat::csv: {
      CsvWriter csv;
      csv.row("layer", "mean_per_macro", "mean_per_micro", "hits", "subs", "dels", "ins");
      for (const auto& [layer, p] : rows) {
        csv.row(std::to_string(layer), fixed2(p.mean_per_macro), fixed2(p.mean_per_micro),
                std::to_string(p.counts.hits), std::to_string(p.counts.substitutions),
                std::to_string(p.counts.deletions), std::to_string(p.counts.insertions));
      }
      return csv.str();
    }
    case DocFormat::json: {
      json layers = json::array();
      for (const auto& [layer, p] : rows) {
        layers.push_back({{"layer", layer},
                          {"mean_per_macro", p.mean_per_macro},
                          {"mean_per_micro", p.mean_per_micro},
                          {"hits", p.counts.hits},
                          {"subs", p.counts.substitutions},
                          {"dels", p.counts.deletions},
                          {"ins", p.counts.insertions},
                          {"utterances", p.utterances},
                          {"reference_tokens", p.reference_tokens}});
      }
      return dump({{"layers", std::move(layers)}});
    }
    case DocFormat::markdown: {
      std::ostringstream md;
      md << "| Layer | PER (macro) | PER (micro) | Hits | Subs | Dels | Ins |\n"
         << "|---:|---:|---:|---:|---:|---:|---:|\n";
      for (const auto& [layer, p] : rows) {
        md << "| " << layer << " | " << fixed2(p.mean_per_macro) << " | "
           << fixed2(p.mean_per_micro) << " | " << p.counts.hits << " | "
           << p.counts.substitutions << " | " << p.counts.deletions << " | "
           << p.counts.insertions << " |\n";
      }
      return md.str();
    }
  }
  return {};
}

std::vector<ComparisonRow> compare_layers(std::span<const LayerReport> reports_a,
                                          std::span<const LayerReport> reports_b,
                                          std::size_t top_k) {
  std::map<std::string, const LayerReport*> by_utt_b;
  for (const auto& r : reports_b) by_utt_b[r.utterance_id] = &r;
  std::set<std::string> seen_a;
  std::vector<ComparisonRow> rows;
  for (const auto& a : reports_a) {
    auto it = by_utt_b.find(a.utterance_id);
    if (it == by_utt_b.end()) {
      throw InvalidArgument("comparison: " + a.utterance_id + " has no report at layer B");
    }
    if (!seen_a.insert(a.utterance_id).second) {
      throw InvalidArgument("comparison: duplicate report for " + a.utterance_id);
    }
    const LayerReport& b = *it->second;
    ComparisonRow row{a.utterance_id, a.per, b.per, std::nullopt};
    if (a.per > 0.0) {
      row.improvement = per_improvement(a, b);
    } else if (b.per == 0.0) {
      row.improvement = 0.0;
    }
    rows.push_back(std::move(row));
  }
  if (seen_a.size() != by_utt_b.size()) {
    throw InvalidArgument("comparison: utterance sets differ between the two layers");
  }
  std::sort(rows.begin(), rows.end(), [](const ComparisonRow& x, const ComparisonRow& y) {
    if (x.improvement.has_value() != y.improvement.has_value()) return x.improvement.has_value();
    if (x.improvement && *x.improvement != *y.improvement) return *x.improvement > *y.improvement;
    return x.utterance_id < y.utterance_id;
  });
  if (rows.size() > top_k) rows.resize(top_k);
  return rows;
}

std::string emit_comparison(std::span<const LayerReport> reports_a,
                            std::span<const LayerReport> reports_b, std::size_t top_k,
                            DocFormat format) {
  const auto rows = compare_layers(reports_a, reports_b, top_k);
  const std::string layer_a = reports_a.empty() ? "A" : std::to_string(reports_a.front().layer_index);
  const std::string layer_b = reports_b.empty() ? "B" : std::to_string(reports_b.front().layer_index);

  switch (format) {
    case DocFormat::csv: {
      CsvWriter csv;
      csv.row("utterance", "per_layer" + layer_a, "per_layer" + layer_b, "improvement_pct");
      for (const auto& r : rows) {
        csv.row(r.utterance_id, fixed2(r.per_a), fixed2(r.per_b),
                r.improvement ? fixed2(*r.improvement) : std::string{});
      }
      return csv.str();
    }
    case DocFormat::json: {
      json out = json::array();
      for (const auto& r : rows) {
        out.push_back({{"utterance_id", r.utterance_id},
                       {"per_a", r.per_a},
                       {"per_b", r.per_b},
                       {"improvement_pct", r.improvement ? json(*r.improvement) : json(nullptr)}});
      }
      return dump({{"layer_a", reports_a.empty() ? json(nullptr) : json(reports_a.front().layer_index)},
                   {"layer_b", reports_b.empty() ? json(nullptr) : json(reports_b.front().layer_index)},
                   {"rows", std::move(out)}});
    }
    case DocFormat::markdown: {
      std::ostringstream md;
      md << "| Audio File | PER@Layer" << layer_a << " (%) | PER@Layer" << layer_b
         << " (%) | % Improvement |\n|---|---:|---:|---:|\n";
      for (const auto& r : rows) {
        md << "| " << md_cell(r.utterance_id) << " | " << fixed2(r.per_a) << " | "
           << fixed2(r.per_b) << " | " << (r.improvement ? fixed2(*r.improvement) : "n/a")
           << " |\n";
      }
      return md.str();
    }
  }
  return {};
}

std::string emit_confusion(const LayerConfusions& matrices, DocFormat format) {
  struct Row {
    int layer;
    std::string ref;
    std::string hyp;
    std::size_t count;
  };
  std::vector<Row> rows;
  for (const auto& [layer, m] : std::views::reverse(matrices)) {
    const std::size_t first = rows.size();
    for (const auto& [pair, n] : m.substitutions) {
      if (n > 0) rows.push_back({layer, pair.first, pair.second, n});
    }
    for (const auto& [tok, n] : m.deletions) {
      if (n > 0) rows.push_back({layer, tok, kDeletionLabel, n});
    }
    std::sort(rows.begin() + static_cast<std::ptrdiff_t>(first), rows.end(),
              [](const Row& x, const Row& y) { return std::tie(x.ref, x.hyp) < std::tie(y.ref, y.hyp); });
  }

  switch (format) {
    case DocFormat::csv: {
      CsvWriter csv;
      csv.row("layer", "ref_token", "hyp_token", "count");
      for (const auto& r : rows) csv.row(std::to_string(r.layer), r.ref, r.hyp, std::to_string(r.count));
      return csv.str();
    }
    case DocFormat::json: {
      json out = json::array();
      for (const auto& r : rows) {
        out.push_back({{"layer", r.layer}, {"ref_token", r.ref}, {"hyp_token", r.hyp}, {"count", r.count}});
      }
      return dump(out);
    }
    case DocFormat::markdown: {
      std::ostringstream md;
      md << "| Layer | Ref | Pred | Count |\n|---:|---|---|---:|\n";
      for (const auto& r : rows) {
        md << "| " << r.layer << " | " << md_cell(r.ref) << " | " << md_cell(r.hyp) << " | "
           << r.count << " |\n";
      }
      return md.str();
    }
  }
  return {};
}

std::string emit_sidebyside(const LayerLogitBundle& bundle, const DecodedLayers& decoded,
                            DocFormat format) {
  if (decoded.empty()) throw InvalidArgument("emit_sidebyside: no decoded layers");
  switch (format) {
    case DocFormat::markdown: {
      std::ostringstream md;
      md << "| Layer | " << md_cell(bundle.utterance_id) << " |\n|---|---|\n";
      for (const auto& [layer, hyp] : std::views::reverse(decoded)) {
        md << "| " << layer << " | " << md_cell(hyp.text()) << " |\n";
      }
      md << "| Reference | " << md_cell(bundle.reference.joined()) << " |\n";
      return md.str();
    }
    case DocFormat::csv: {
      CsvWriter csv;
      csv.row("layer", "prediction");
      for (const auto& [layer, hyp] : std::views::reverse(decoded)) {
        csv.row(std::to_string(layer), hyp.text());
      }
      csv.row("reference", bundle.reference.joined());
      return csv.str();
    }
    case DocFormat::json: {
      json layers = json::array();
      for (const auto& [layer, hyp] : std::views::reverse(decoded)) {
        layers.push_back({{"layer", layer}, {"text", hyp.text()}});
      }
      return dump({{"utterance_id", bundle.utterance_id},
                   {"layers", std::move(layers)},
                   {"reference", bundle.reference.joined()}});
    }
  }
  return {};
}

std::string emit_hypotheses(const LayerLogitBundle& bundle, const DecodedLayers& decoded) {
  json layers = json::array();
  for (const auto& [layer, hyp] : std::views::reverse(decoded)) {
    json spans = json::array();
    for (const auto& s : hyp.path.emitted_spans) spans.push_back({s.token, s.start, s.end});
    layers.push_back({{"layer", layer},
                      {"text", hyp.text()},
                      {"tokens", hyp.tokens.tokens()},
                      {"token_ids", hyp.token_ids},
                      {"frames", hyp.path.frame_argmax.size()},
                      {"spans", std::move(spans)}});
  }
  return dump({{"utterance_id", bundle.utterance_id},
               {"blank_id", bundle.blank_id},
               {"reference", bundle.reference.joined()},
               {"layers", std::move(layers)}});
}

std::string emit_reports(std::span<const LayerReport> reports) {
  json out = json::array();
  for (const auto& r : reports) {
    json subs = json::array();
    for (const auto& [pair, n] : r.substitution_pairs) {
      subs.push_back({{"ref", pair.first}, {"hyp", pair.second}, {"count", n}});
    }
    out.push_back({{"utterance_id", r.utterance_id},
                   {"layer", r.layer_index},
                   {"reference_length", r.reference_length},
                   {"per", r.per},
                   {"hits", r.counts.hits},
                   {"subs", r.counts.substitutions},
                   {"dels", r.counts.deletions},
                   {"ins", r.counts.insertions},
                   {"substitutions", std::move(subs)},
                   {"deletions", r.deleted_tokens},
                   {"insertions", r.inserted_tokens}});
  }
  return dump(out);
}

std::string emit_regressions(std::span<const RegressionEvent> events,
                             const RegressionSummary& summary) {
  json list = json::array();
  for (const auto& e : events) {
    list.push_back({{"utterance_id", e.utterance_id},
                    {"ref_index", e.ref_index},
                    {"ref_token", e.ref_token},
                    {"source_layer", e.source_layer},
                    {"target_layer", e.target_layer},
                    {"degradation", std::string(to_string(e.degradation))},
                    {"hyp_token", e.degradation == Degradation::substitution ? json(e.hyp_token)
                                                                             : json(nullptr)}});
  }
  json by_token = json::array();
  for (const auto& [tok, n] : summary.by_token) by_token.push_back({{"token", tok}, {"count", n}});
  json by_transition = json::array();
  for (const auto& [tr, n] : summary.by_transition) {
    by_transition.push_back({{"transition", tr}, {"count", n}});
  }
  return dump({{"events", std::move(list)},
               {"summary",
                {{"total", summary.total},
                 {"substitutions", summary.substitutions},
                 {"deletions", summary.deletions},
                 {"by_token", std::move(by_token)},
                 {"by_transition", std::move(by_transition)}}}});
}

}  // namespace phonoprobe
