#include "phonoprobe/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <ranges>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "phonoprobe/bundle.hpp"
#include "phonoprobe/ctc_decoder.hpp"
#include "phonoprobe/error.hpp"
#include "phonoprobe/report.hpp"
#include "phonoprobe/synth.hpp"

namespace phonoprobe::cli {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing " + file.string());
  out << text;
  if (!out) throw IoError("write failed: " + file.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<fs::path> corpus_bundles(const fs::path& corpus_dir) {
  auto dirs = discover_bundles(corpus_dir);
  if (dirs.empty()) throw IoError("no bundles (manifest.json) under " + corpus_dir.string());
  return dirs;
}

// Whitespace in a decoded hypothesis comes from word-delimiter tokens and
// carries no phoneme.
PhonemeSequence scoring_tokens(const std::string& text, TokenizerMode mode) {
  std::string compact;
  compact.reserve(text.size());
  for (char c : text) {
    if (std::string_view(" \t\n\r\v\f").find(c) == std::string_view::npos) compact += c;
  }
  return tokenize(compact, mode);
}

struct ScoredUtterance {
  std::string utterance_id;
  LayerAlignments alignments;
};

ScoredUtterance align_bundle(const LayerLogitBundle& bundle, TokenizerMode mode) {
  const PhonemeSequence ref = tokenize(bundle.reference.joined(), mode);
  ScoredUtterance out{bundle.utterance_id, {}};
  for (const auto& [layer, hyp] : decode_all_layers(bundle)) {
    out.alignments.emplace(layer, align(ref, scoring_tokens(hyp.text(), mode)));
  }
  return out;
}

}  // namespace

void cmd_decode(const DecodeOptions& options, std::ostream& out) {
  if (!fs::is_directory(options.bundle_dir)) {
    throw IoError("bundle directory not found: " + options.bundle_dir.string());
  }
  const LayerLogitBundle bundle = read_bundle(options.bundle_dir);
  DecodedLayers decoded = decode_all_layers(bundle);
  if (!options.layers.empty()) {
    const std::set<int> wanted(options.layers.begin(), options.layers.end());
    for (int layer : wanted) {
      if (!decoded.contains(layer)) {
        std::string available;
        for (int l : bundle.layer_indices()) available += (available.empty() ? "" : ", ") + std::to_string(l);
        throw InvalidArgument("layer " + std::to_string(layer) + " not in bundle " +
                              bundle.utterance_id + " (available: " + available + ")");
      }
    }
    std::erase_if(decoded, [&](const auto& kv) { return !wanted.contains(kv.first); });
  }

  const std::string table = emit_sidebyside(bundle, decoded, DocFormat::markdown);
  if (options.out) {
    ensure_dir(*options.out);
    write_text(*options.out / "sidebyside.md", table);
    write_text(*options.out / "hypotheses.json", emit_hypotheses(bundle, decoded));
  } else {
    out << table;
  }
}

void cmd_score(const ScoreOptions& options, std::ostream& out) {
  std::vector<LayerReport> reports;
  for (const auto& dir : corpus_bundles(options.corpus_dir)) {
    const LayerLogitBundle bundle = read_bundle(dir);
    const auto scored = align_bundle(bundle, options.tokenizer.value_or(bundle.tokenizer));
    for (const auto& [layer, alignment] : scored.alignments) {
      reports.push_back(score(alignment, scored.utterance_id, layer));
    }
  }
  std::sort(reports.begin(), reports.end(), [](const LayerReport& a, const LayerReport& b) {
    return std::tie(a.utterance_id, a.layer_index) < std::tie(b.utterance_id, b.layer_index);
  });
  const CorpusTrend corpus = trend(reports, options.allow_ragged);

  std::ostringstream table;
  table << "| Layer | PER (" << to_string(options.corpus_per) << ") |\n|---:|---:|\n";
  for (const auto& [layer, point] : std::views::reverse(corpus.per_layer)) {
    table << "| " << layer << " | " << fixed2(point.per(options.corpus_per)) << " |\n";
  }
  out << table.str();
  if (!options.out) return;

  ensure_dir(*options.out);
  write_text(*options.out / "layer_table.csv", emit_layer_table(corpus, DocFormat::csv));
  write_text(*options.out / "layer_table.json", emit_layer_table(corpus, DocFormat::json));
  write_text(*options.out / "layer_table.md", emit_layer_table(corpus, DocFormat::markdown));
  write_text(*options.out / "reports.json", emit_reports(reports));
  const auto confusions = confusion_matrices(reports);
  write_text(*options.out / "confusion.csv", emit_confusion(confusions, DocFormat::csv));

  // Deepest layer against the best-scoring one.
  const int deepest = corpus.per_layer.rbegin()->first;
  int best = deepest;
  for (const auto& [layer, point] : corpus.per_layer) {
    if (point.per(options.corpus_per) < corpus.per_layer.at(best).per(options.corpus_per)) best = layer;
  }
  if (best != deepest && !options.allow_ragged) {
    std::vector<LayerReport> at_deepest;
    std::vector<LayerReport> at_best;
    for (const auto& r : reports) {
      if (r.layer_index == deepest) at_deepest.push_back(r);
      if (r.layer_index == best) at_best.push_back(r);
    }
    write_text(*options.out / "comparison.csv",
               emit_comparison(at_deepest, at_best, at_deepest.size(), DocFormat::csv));
    write_text(*options.out / "comparison.md",
               emit_comparison(at_deepest, at_best, 5, DocFormat::markdown));
  }
}

void cmd_regressions(const RegressionsOptions& options, std::ostream& out) {
  std::vector<RegressionEvent> events;
  std::size_t each_source_total = 0;
  for (const auto& dir : corpus_bundles(options.corpus_dir)) {
    const LayerLogitBundle bundle = read_bundle(dir);
    const auto scored = align_bundle(bundle, bundle.tokenizer);
    auto found = detect(scored.alignments, scored.utterance_id, DetectOptions{options.mode, SourceCounting::earliest_source, std::nullopt});
    events.insert(events.end(), found.begin(), found.end());
    if (options.mode == RegressionMode::standard) {
      DetectOptions per_source{RegressionMode::standard, SourceCounting::each_source, std::nullopt};
      each_source_total += detect(scored.alignments, scored.utterance_id, per_source).size();
    }
  }
  const RegressionSummary summary = summarize(events);
  const std::string doc = emit_regressions(events, summary);
  if (!options.out) {
    out << doc;
    return;
  }
  ensure_dir(*options.out);
  write_text(*options.out / "regressions.json", doc);

  out << "mode: " << to_string(options.mode) << "\n"
      << "total: " << summary.total << "\n"
      << "hit->substitution: " << summary.substitutions << "\n"
      << "hit->deletion: " << summary.deletions << "\n";
  if (options.mode == RegressionMode::standard) {
    out << "total counting each hit source: " << each_source_total << "\n";
  }
  out << "by token:\n";
  for (const auto& [tok, n] : summary.by_token) out << "  " << tok << " " << n << "\n";
}

void cmd_synth(const SynthOptions& options, std::ostream& out) {
  PlanDocument doc = load_plan_file(options.plan_file);
  for (auto& job : doc.jobs) {
    if (options.seed) job.plan.seed = *options.seed;
  }
  if (!doc.corpus) {
    const auto& job = doc.jobs.front();
    write_bundle(generate(job.plan, job.vocab, job.blank_id), options.out);
    out << options.out.string() << "\n";
    return;
  }
  ensure_dir(options.out);
  for (const auto& job : doc.jobs) {
    const fs::path dir = options.out / job.plan.utterance_id;
    write_bundle(generate(job.plan, job.vocab, job.blank_id), dir);
    out << dir.string() << "\n";
  }
}

namespace {

// Reads key=value lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config " + file.string());
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(file.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

// Splices config entries in front of the explicit flags so flags win.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::optional<fs::path> config;
  std::vector<std::string> explicit_args;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    } else {
      explicit_args.push_back(args[i]);
    }
  }
  if (!config) return explicit_args;

  auto given = [&](const std::string& key) {
    return std::any_of(explicit_args.begin(), explicit_args.end(), [&](const std::string& a) {
      return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
    });
  };
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_config(*config)) {
    if (given(key)) continue;
    if (value == "true" || value == "false") {
      if (value == "true") injected.push_back("--" + key);
    } else {
      injected.push_back("--" + key + "=" + value);
    }
  }
  // argv[0], subcommand, injected, rest.
  const auto head = static_cast<std::ptrdiff_t>(std::min<std::size_t>(2, explicit_args.size()));
  std::vector<std::string> merged(explicit_args.begin(), explicit_args.begin() + head);
  merged.insert(merged.end(), injected.begin(), injected.end());
  merged.insert(merged.end(), explicit_args.begin() + head, explicit_args.end());
  return merged;
}

template <typename Enum, typename Parse>
std::function<std::string(const std::string&)> enum_check(Parse parse) {
  return [parse](const std::string& value) -> std::string {
    try {
      (void)parse(value);
      return {};
    } catch (const Error& e) {
      return e.what();
    }
  };
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layer-wise CTC phoneme decoding diagnostics", "phonoprobe"};
  app.require_subcommand(1);
  app.add_option("--config", "key=value file; explicit flags take precedence");

  DecodeOptions decode_opts;
  auto* decode = app.add_subcommand("decode", "Greedy-decode every layer of one bundle");
  decode->add_option("bundle_dir", decode_opts.bundle_dir, "Bundle directory")->required();
  decode->add_option("--layers", decode_opts.layers, "Comma-separated layer indices (default: all)")
      ->delimiter(',');
  std::string decode_out;
  decode->add_option("--out", decode_out, "Output directory for sidebyside.md and hypotheses.json");

  ScoreOptions score_opts;
  std::string score_tokenizer, score_avg = "macro", score_out;
  auto* score_cmd = app.add_subcommand("score", "Score every bundle of a corpus at every layer");
  score_cmd->add_option("corpus_dir", score_opts.corpus_dir, "Corpus directory")->required();
  score_cmd->add_option("--tokenizer", score_tokenizer, "chars | sampa-length (default: manifest's)")
      ->check(enum_check<TokenizerMode>(parse_tokenizer_mode));
  score_cmd->add_option("--corpus-per", score_avg, "macro | micro corpus averaging")
      ->check(enum_check<CorpusAveraging>(parse_corpus_averaging));
  score_cmd->add_option("--out", score_out, "Output directory for tables and reports");
  score_cmd->add_flag("--allow-ragged", score_opts.allow_ragged,
                      "Accept utterances that cover different layer sets");

  RegressionsOptions reg_opts;
  std::string reg_mode = "default", reg_out;
  auto* reg_cmd = app.add_subcommand("regressions", "Detect hits that degrade at deeper layers");
  reg_cmd->add_option("corpus_dir", reg_opts.corpus_dir, "Corpus directory")->required();
  reg_cmd->add_option("--mode", reg_mode, "default | exhaustive")
      ->check(enum_check<RegressionMode>(parse_regression_mode));
  reg_cmd->add_option("--out", reg_out, "Output directory for regressions.json");

  SynthOptions synth_opts;
  std::uint64_t seed = 0;
  auto* synth = app.add_subcommand("synth", "Generate bundles from an injection plan");
  synth->add_option("plan", synth_opts.plan_file, "Plan JSON file")->required();
  synth->add_option("--out", synth_opts.out, "Output bundle (or corpus) directory")->required();
  auto* seed_opt = synth->add_option("--seed", seed, "Override the plan's seed");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = apply_config(std::move(args));
    std::vector<const char*> merged;
    for (const auto& a : args) merged.push_back(a.c_str());
    app.parse(static_cast<int>(merged.size()), merged.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*decode) {
      if (!decode_out.empty()) decode_opts.out = decode_out;
      cmd_decode(decode_opts, out);
    } else if (*score_cmd) {
      if (!score_tokenizer.empty()) score_opts.tokenizer = parse_tokenizer_mode(score_tokenizer);
      score_opts.corpus_per = parse_corpus_averaging(score_avg);
      if (!score_out.empty()) score_opts.out = score_out;
      cmd_score(score_opts, out);
    } else if (*reg_cmd) {
      reg_opts.mode = parse_regression_mode(reg_mode);
      if (!reg_out.empty()) reg_opts.out = reg_out;
      cmd_regressions(reg_opts, out);
    } else if (*synth) {
      if (seed_opt->count() > 0) synth_opts.seed = seed;
      cmd_synth(synth_opts, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace phonoprobe::cli
