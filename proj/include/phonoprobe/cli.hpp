#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phonoprobe/metrics.hpp"
#include "phonoprobe/regressions.hpp"
#include "phonoprobe/tokenize.hpp"

namespace phonoprobe::cli {

struct DecodeOptions {
  std::filesystem::path bundle_dir;
  std::vector<int> layers;  // empty = all
  std::optional<std::filesystem::path> out;
};

struct ScoreOptions {
  std::filesystem::path corpus_dir;
  std::optional<TokenizerMode> tokenizer;  // unset = each manifest's own
  CorpusAveraging corpus_per = CorpusAveraging::macro;
  std::optional<std::filesystem::path> out;
  bool allow_ragged = false;
};

struct RegressionsOptions {
  std::filesystem::path corpus_dir;
  RegressionMode mode = RegressionMode::standard;
  std::optional<std::filesystem::path> out;
};

struct SynthOptions {
  std::filesystem::path plan_file;
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
};

void cmd_decode(const DecodeOptions& options, std::ostream& out);
void cmd_score(const ScoreOptions& options, std::ostream& out);
void cmd_regressions(const RegressionsOptions& options, std::ostream& out);
void cmd_synth(const SynthOptions& options, std::ostream& out);

/// Parses argv and dispatches. Data goes to `out`, diagnostics to `err`.
/// Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace phonoprobe::cli
