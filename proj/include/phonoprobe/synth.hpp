#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "phonoprobe/bundle.hpp"

namespace phonoprobe {

inline constexpr const char* kDefaultBlankToken = "<blank>";

/// Planted per-layer hypotheses for one synthetic utterance.
struct InjectionPlan {
  std::string utterance_id = "synthetic";
  PhonemeSequence reference;
  TokenizerMode tokenizer = TokenizerMode::chars;
  std::map<int, PhonemeSequence> per_layer_targets;
  std::size_t frames_per_token = 4;
  std::size_t blank_frames_between = 1;
  double margin = 5.0;       // winning logit value
  double noise_scale = 1.0;  // losers drawn from U[-noise_scale, 0]
  std::uint64_t seed = 0;
  std::map<std::string, std::string> metadata;
};

/// Blank first, then every distinct reference and target token, sorted.
std::vector<std::string> derive_vocab(const InjectionPlan& plan,
                                      const std::string& blank_token = kDefaultBlankToken);

/// Frames needed to emit `target`: tokens plus separating blanks.
std::size_t required_frames(const InjectionPlan& plan, const PhonemeSequence& target);

/// Throws InvariantViolation naming the offending field.
void validate_plan(const InjectionPlan& plan, const std::vector<std::string>& vocab,
                   TokenId blank_id);

/// Builds a bundle whose greedy decode reproduces every planted target.
LayerLogitBundle generate(const InjectionPlan& plan, const std::vector<std::string>& vocab,
                          TokenId blank_id);

/// A plan plus the vocabulary it is generated against.
struct SynthJob {
  InjectionPlan plan;
  std::vector<std::string> vocab;
  TokenId blank_id = 0;
};

struct PlanDocument {
  bool corpus = false;  // {"utterances": [...]} rather than a single plan
  std::vector<SynthJob> jobs;
};

/// Parses a plan document: a single plan object, or {"utterances": [...]}
/// whose top-level keys act as defaults for each utterance.
PlanDocument parse_plan_document(const std::string& json_text);
PlanDocument load_plan_file(const std::filesystem::path& file);

/// Serializes a job in the plan-file format parse_plan_document accepts.
std::string plan_to_json(const SynthJob& job);

}  // namespace phonoprobe
