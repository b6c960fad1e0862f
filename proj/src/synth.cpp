#include "phonoprobe/synth.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "phonoprobe/error.hpp"

namespace phonoprobe {

using nlohmann::json;

std::vector<std::string> derive_vocab(const InjectionPlan& plan, const std::string& blank_token) {
  std::set<std::string> tokens(plan.reference.begin(), plan.reference.end());
  for (const auto& [layer, target] : plan.per_layer_targets) tokens.insert(target.begin(), target.end());
  tokens.erase(blank_token);
  std::vector<std::string> vocab{blank_token};
  vocab.insert(vocab.end(), tokens.begin(), tokens.end());
  return vocab;
}

std::size_t required_frames(const InjectionPlan& plan, const PhonemeSequence& target) {
  if (target.empty()) return 0;
  return target.size() * plan.frames_per_token + (target.size() - 1) * plan.blank_frames_between;
}

namespace {

std::unordered_map<std::string, TokenId> index_vocab(const std::vector<std::string>& vocab) {
  std::unordered_map<std::string, TokenId> ids;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab[i].empty()) throw InvariantViolation("vocab", "empty token at id " + std::to_string(i));
    if (!ids.emplace(vocab[i], static_cast<TokenId>(i)).second) {
      throw InvariantViolation("vocab", "duplicate token '" + vocab[i] + "'");
    }
  }
  return ids;
}

}  // namespace

void validate_plan(const InjectionPlan& plan, const std::vector<std::string>& vocab,
                   TokenId blank_id) {
  if (plan.utterance_id.empty()) throw InvariantViolation("utterance_id", "must not be empty");
  if (vocab.size() < 2) throw InvariantViolation("vocab", "needs at least 2 entries");
  const auto ids = index_vocab(vocab);
  if (blank_id < 0 || static_cast<std::size_t>(blank_id) >= vocab.size()) {
    throw InvariantViolation("blank_id", std::to_string(blank_id) + " outside vocabulary");
  }
  const std::string& blank = vocab[static_cast<std::size_t>(blank_id)];
  if (plan.frames_per_token == 0) throw InvariantViolation("frames_per_token", "must be positive");
  if (!(std::isfinite(plan.margin) && static_cast<float>(plan.margin) > 0.0f)) {
    throw InvariantViolation("margin", "must be a positive finite number");
  }
  if (!(std::isfinite(plan.noise_scale) && plan.noise_scale >= 0.0)) {
    throw InvariantViolation("noise_scale", "must be a non-negative finite number");
  }
  if (plan.per_layer_targets.empty()) {
    throw InvariantViolation("per_layer_targets", "plan has no layers");
  }
  plan.reference.require_no_blank(blank, "reference");
  for (const auto& [layer, target] : plan.per_layer_targets) {
    const std::string field = "per_layer_targets." + std::to_string(layer);
    for (std::size_t k = 0; k < target.size(); ++k) {
      const auto it = ids.find(target[k]);
      if (it == ids.end()) {
        throw InvariantViolation(field, "token '" + target[k] + "' not in vocabulary");
      }
      if (it->second == blank_id) {
        throw InvariantViolation(field, "blank token at position " + std::to_string(k));
      }
      if (k > 0 && target[k] == target[k - 1] && plan.blank_frames_between == 0) {
        throw InvariantViolation(field, "repeated token '" + target[k] + "' at position " +
                                            std::to_string(k) +
                                            " needs blank_frames_between >= 1");
      }
    }
  }
}

LayerLogitBundle generate(const InjectionPlan& plan, const std::vector<std::string>& vocab,
                          TokenId blank_id) {
  validate_plan(plan, vocab, blank_id);
  const auto ids = index_vocab(vocab);

  std::size_t frames = 0;
  for (const auto& [layer, target] : plan.per_layer_targets) {
    frames = std::max(frames, required_frames(plan, target));
  }

  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> noise(-plan.noise_scale, 0.0);
  const auto winner_value = static_cast<float>(plan.margin);

  LayerLogitBundle bundle;
  bundle.utterance_id = plan.utterance_id;
  bundle.vocab = vocab;
  bundle.blank_id = blank_id;
  bundle.reference = plan.reference;
  bundle.tokenizer = plan.tokenizer;
  bundle.metadata = plan.metadata;

  for (const auto& [layer, target] : plan.per_layer_targets) {
    std::vector<TokenId> frame_ids;
    frame_ids.reserve(frames);
    for (std::size_t k = 0; k < target.size(); ++k) {
      if (k > 0) frame_ids.insert(frame_ids.end(), plan.blank_frames_between, blank_id);
      frame_ids.insert(frame_ids.end(), plan.frames_per_token, ids.at(target[k]));
    }
    frame_ids.resize(frames, blank_id);

    LogitMatrix logits(frames, vocab.size());
    for (std::size_t t = 0; t < frames; ++t) {
      auto row = logits.row(t);
      if (plan.noise_scale > 0.0) {
        for (float& v : row) v = static_cast<float>(noise(rng));
      }
      row[static_cast<std::size_t>(frame_ids[t])] = winner_value;
    }
    bundle.layers.push_back({layer, std::move(logits)});
  }
  bundle.validate();
  return bundle;
}

namespace {

template <typename T>
T field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvariantViolation(key, e.what());
  }
}

PhonemeSequence sequence_field(const json& value, TokenizerMode mode, const std::string& name) {
  try {
    if (value.is_string()) return tokenize(value.get<std::string>(), mode);
    if (value.is_array()) return PhonemeSequence(value.get<std::vector<std::string>>());
  } catch (const Error& e) {
    throw InvariantViolation(name, e.what());
  } catch (const json::exception& e) {
    throw InvariantViolation(name, e.what());
  }
  throw InvariantViolation(name, "expected a string or an array of tokens");
}

SynthJob parse_job(const json& j) {
  if (!j.is_object()) throw InvariantViolation("plan", "expected a JSON object");
  SynthJob job;
  auto& plan = job.plan;
  plan.utterance_id = field<std::string>(j, "utterance_id", plan.utterance_id);
  try {
    plan.tokenizer = parse_tokenizer_mode(field<std::string>(j, "tokenizer", "chars"));
  } catch (const InvalidArgument& e) {
    throw InvariantViolation("tokenizer", e.what());
  }
  if (!j.contains("reference")) throw InvariantViolation("reference", "missing");
  plan.reference = sequence_field(j["reference"], plan.tokenizer, "reference");

  if (!j.contains("per_layer_targets") || !j["per_layer_targets"].is_object()) {
    throw InvariantViolation("per_layer_targets", "expected an object of layer -> target");
  }
  for (const auto& [key, value] : j["per_layer_targets"].items()) {
    const std::string name = "per_layer_targets." + key;
    int layer = 0;
    try {
      std::size_t used = 0;
      layer = std::stoi(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::logic_error&) {
      throw InvariantViolation(name, "layer key is not an integer");
    }
    plan.per_layer_targets[layer] = sequence_field(value, plan.tokenizer, name);
  }

  const auto fpt = field<long long>(j, "frames_per_token", 4);
  if (fpt <= 0) throw InvariantViolation("frames_per_token", "must be positive");
  plan.frames_per_token = static_cast<std::size_t>(fpt);
  const auto bfb = field<long long>(j, "blank_frames_between", 1);
  if (bfb < 0) throw InvariantViolation("blank_frames_between", "must be non-negative");
  plan.blank_frames_between = static_cast<std::size_t>(bfb);
  plan.margin = field<double>(j, "margin", plan.margin);
  plan.noise_scale = field<double>(j, "noise_scale", plan.noise_scale);
  plan.seed = field<std::uint64_t>(j, "seed", plan.seed);
  plan.metadata = field<std::map<std::string, std::string>>(j, "metadata", {});

  if (j.contains("vocab")) {
    job.vocab = field<std::vector<std::string>>(j, "vocab", {});
    if (!j.contains("blank_id")) throw InvariantViolation("blank_id", "required with 'vocab'");
    job.blank_id = field<TokenId>(j, "blank_id", 0);
  } else {
    job.vocab = derive_vocab(plan, field<std::string>(j, "blank_token", kDefaultBlankToken));
    job.blank_id = 0;
  }
  validate_plan(plan, job.vocab, job.blank_id);
  return job;
}

}  // namespace

PlanDocument parse_plan_document(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("plan: ") + e.what());
  }
  if (!doc.is_object()) throw InvariantViolation("plan", "expected a JSON object");
  if (!doc.contains("utterances")) return {false, {parse_job(doc)}};

  if (!doc["utterances"].is_array()) throw InvariantViolation("utterances", "expected an array");
  json defaults = doc;
  defaults.erase("utterances");
  std::vector<SynthJob> jobs;
  std::set<std::string> seen;
  for (const auto& u : doc["utterances"]) {
    if (!u.is_object()) throw InvariantViolation("utterances", "entries must be objects");
    json merged = defaults;
    merged.update(u);
    jobs.push_back(parse_job(merged));
    if (!seen.insert(jobs.back().plan.utterance_id).second) {
      throw InvariantViolation("utterance_id", "duplicate '" + jobs.back().plan.utterance_id + "'");
    }
  }
  return {true, std::move(jobs)};
}

PlanDocument load_plan_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open plan " + file.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_plan_document(text);
}

std::string plan_to_json(const SynthJob& job) {
  const auto& p = job.plan;
  json targets = json::object();
  for (const auto& [layer, seq] : p.per_layer_targets) targets[std::to_string(layer)] = seq.tokens();
  json j = {
      {"utterance_id", p.utterance_id},
      {"reference", p.reference.tokens()},
      {"tokenizer", std::string(to_string(p.tokenizer))},
      {"per_layer_targets", std::move(targets)},
      {"frames_per_token", p.frames_per_token},
      {"blank_frames_between", p.blank_frames_between},
      {"margin", p.margin},
      {"noise_scale", p.noise_scale},
      {"seed", p.seed},
      {"metadata", p.metadata},
      {"vocab", job.vocab},
      {"blank_id", job.blank_id},
  };
  return j.dump(2) + "\n";
}

}  // namespace phonoprobe
