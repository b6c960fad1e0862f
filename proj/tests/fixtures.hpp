#pragma once

// Shared test fixtures: the five published layer-wise transcriptions and a
// planted regression corpus.

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "phonoprobe/regressions.hpp"
#include "phonoprobe/synth.hpp"

namespace fixtures {

struct PublishedUtterance {
  const char* id;
  const char* layer24;
  const char* layer23;
  const char* layer22;
  const char* reference;
};

inline constexpr std::array<PublishedUtterance, 5> kTable4 = {{
    {"30_F_extract_04", "iE5ntsu:tVmla:u5Nti:S", "iE5ntsu:tamla:u5Nti:Si:", "e:ntsutamla:u5tiSi",
     "ensudwamillaundiZi"},
    {"46_M_extract_04", "dedega:nivutibiStozorUnsa:kuzo:apEttsa:zU",
     "dedega:nivutebiStuzogunsa:kuzo:apEtsa:zu", "dedega:nivutebStzorunsakuzoapEtsazu",
     "dEdEGanivuntibiStiuzuGusakuzuapEtsauzu"},
    {"30_F_extract_02", "snunorantazzaeti", "snunorantazzaeti", "snunorantazaeti", "sunO4antazEti"},
    {"03_F_extract_01", "ekambjadame:4a", "ekambjadame:4a", "ekambjadame4a", "eekambjadame4a"},
    {"29_M_extract_03", "miza:gata:oudegonoSamuleDimiae", "mizagata:oudegonoSamuleDimiae",
     "mizagataodegonoSamuleDimiae", "mizEaGataudeGOnOSamullEDimiaE?"},
}};

inline const PublishedUtterance& published(const std::string& id) {
  for (const auto& u : kTable4) {
    if (id == u.id) return u;
  }
  throw std::out_of_range(id);
}

inline phonoprobe::SynthJob published_job(const PublishedUtterance& u,
                                          phonoprobe::TokenizerMode mode) {
  using phonoprobe::tokenize;
  phonoprobe::SynthJob job;
  job.plan.utterance_id = u.id;
  job.plan.tokenizer = mode;
  job.plan.reference = tokenize(u.reference, mode);
  job.plan.per_layer_targets[24] = tokenize(u.layer24, mode);
  job.plan.per_layer_targets[23] = tokenize(u.layer23, mode);
  job.plan.per_layer_targets[22] = tokenize(u.layer22, mode);
  job.plan.seed = 7;
  job.vocab = phonoprobe::derive_vocab(job.plan);
  job.blank_id = 0;
  return job;
}

// ---------------------------------------------------------------------------
// Planted regression corpus.
//
// Each utterance is a chain of unique anchor consonants with "slots" between
// them. A slot holds one reference phoneme whose fate is planted per layer:
// hit, substitution or deletion. Anchors never change, so every slot aligns
// on its own and the expected regression events follow from the plan alone.

enum class Fate { hit, sub, del };

struct Slot {
  std::string token;
  std::string replacement;    // used where fate == sub
  std::map<int, Fate> fates;  // per layer
};

inline constexpr std::array<int, 4> kPlantLayers = {21, 22, 23, 24};

inline const std::map<std::string, std::string>& replacements() {
  static const std::map<std::string, std::string> r = {
      {"u", "o"}, {"r", "4"}, {"n", "m"}, {"i", "e"},
      {"a", "6"}, {"E", "e"}, {"O", "o"}, {"l", "L"}};
  return r;
}

inline const std::vector<std::string>& anchors() {
  static const std::vector<std::string> a = {"p", "t", "k", "b", "d", "g", "f", "s",
                                             "v", "z", "h", "j", "x", "c", "q", "w"};
  return a;
}

inline Slot make_slot(const std::string& token, std::map<int, Fate> fates) {
  return {token, replacements().at(token), std::move(fates)};
}

// Layout: anchor pair, slot, anchor pair, slot, ..., anchor pair.
inline phonoprobe::InjectionPlan slots_to_plan(const std::string& id, const std::vector<Slot>& slots,
                                               std::uint64_t seed) {
  using phonoprobe::PhonemeSequence;
  const auto& anchor = anchors();
  if (2 * (slots.size() + 1) > anchor.size()) throw std::invalid_argument("too many slots");
  std::vector<std::string> ref;
  std::map<int, std::vector<std::string>> hyp;
  auto push_anchor = [&](std::size_t pair) {
    for (std::size_t k = 0; k < 2; ++k) {
      ref.push_back(anchor[2 * pair + k]);
      for (int layer : kPlantLayers) hyp[layer].push_back(anchor[2 * pair + k]);
    }
  };
  push_anchor(0);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    ref.push_back(slots[s].token);
    for (int layer : kPlantLayers) {
      const Fate f = slots[s].fates.count(layer) ? slots[s].fates.at(layer) : Fate::hit;
      if (f == Fate::hit) hyp[layer].push_back(slots[s].token);
      if (f == Fate::sub) hyp[layer].push_back(slots[s].replacement);
    }
    push_anchor(s + 1);
  }
  phonoprobe::InjectionPlan plan;
  plan.utterance_id = id;
  plan.reference = PhonemeSequence(ref);
  for (auto& [layer, tokens] : hyp) plan.per_layer_targets[layer] = PhonemeSequence(tokens);
  plan.frames_per_token = 3;
  plan.seed = seed;
  return plan;
}

// Expected events for one utterance, computed from the fates alone.
inline std::vector<phonoprobe::RegressionEvent> expected_events(
    const std::string& id, const std::vector<Slot>& slots, phonoprobe::RegressionMode mode) {
  using namespace phonoprobe;
  std::vector<RegressionEvent> out;
  auto fate = [](const Slot& s, int layer) { return s.fates.count(layer) ? s.fates.at(layer) : Fate::hit; };
  for (std::size_t s = 0; s < slots.size(); ++s) {
    const std::size_t ref_index = 2 + 3 * s;
    auto event = [&](int src, int dst) {
      const bool sub = fate(slots[s], dst) == Fate::sub;
      return RegressionEvent{id, ref_index, slots[s].token, src, dst,
                             sub ? Degradation::substitution : Degradation::deletion,
                             sub ? slots[s].replacement : std::string{}};
    };
    if (mode == RegressionMode::exhaustive) {
      for (int src : kPlantLayers) {
        for (int dst : kPlantLayers) {
          if (dst > src && fate(slots[s], src) == Fate::hit && fate(slots[s], dst) != Fate::hit) {
            out.push_back(event(src, dst));
          }
        }
      }
    } else if (fate(slots[s], 24) != Fate::hit) {
      for (int src : {22, 23}) {
        if (fate(slots[s], src) == Fate::hit) {
          out.push_back(event(src, 24));
          break;
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::tie(x.ref_index, x.source_layer, x.target_layer) <
           std::tie(y.ref_index, y.source_layer, y.target_layer);
  });
  return out;
}

struct PlantedUtterance {
  std::string id;
  std::vector<Slot> slots;
};

// 53 regressions in default mode: 39 hit->substitution, 14 hit->deletion,
// with /u/ (13) and /r/ (7) the most affected tokens, plus distractor slots
// that must not count.
inline std::vector<PlantedUtterance> regression_plant() {
  struct Quota {
    const char* token;
    int subs;
    int dels;
  };
  const Quota quotas[] = {{"u", 10, 3}, {"r", 5, 2}, {"n", 4, 2}, {"i", 4, 2},
                          {"a", 4, 2},  {"E", 4, 1}, {"O", 4, 1}, {"l", 4, 1}};
  std::vector<Slot> slots;
  int variant = 0;
  for (const auto& q : quotas) {
    for (int k = 0; k < q.subs + q.dels; ++k, ++variant) {
      const Fate degraded = k < q.subs ? Fate::sub : Fate::del;
      std::map<int, Fate> fates{{24, degraded}};
      switch (variant % 3) {
        case 0:  // hit at 22 and 23
          break;
        case 1:  // only 23 is a hit
          fates[22] = Fate::del;
          break;
        case 2:  // only 22 is a hit
          fates[23] = degraded;
          break;
      }
      if (variant % 4 == 0) fates[21] = Fate::del;
      slots.push_back(make_slot(q.token, fates));
    }
  }
  // Distractors: no default-mode event.
  const char* tokens[] = {"u", "r", "n", "i", "a", "E", "O", "l"};
  for (int k = 0; k < 8; ++k) {
    const std::string t = tokens[k];
    slots.push_back(make_slot(t, {{22, Fate::sub}, {23, Fate::del}, {24, Fate::sub}}));  // always wrong
    slots.push_back(make_slot(t, {{23, Fate::sub}}));                                    // recovers at 24
    slots.push_back(make_slot(t, {{22, Fate::del}, {23, Fate::del}, {24, Fate::del}}));  // only 21 hits
  }

  std::mt19937_64 rng(2024);
  std::shuffle(slots.begin(), slots.end(), rng);
  std::vector<PlantedUtterance> out;
  for (std::size_t s = 0; s < slots.size(); s += 3) {
    PlantedUtterance u;
    u.id = "plant_" + std::string(s / 3 < 10 ? "0" : "") + std::to_string(s / 3);
    u.slots.assign(slots.begin() + static_cast<std::ptrdiff_t>(s),
                   slots.begin() + static_cast<std::ptrdiff_t>(std::min(s + 3, slots.size())));
    out.push_back(std::move(u));
  }
  return out;
}

inline phonoprobe::SynthJob plant_job(const PlantedUtterance& u, std::uint64_t seed) {
  phonoprobe::SynthJob job;
  job.plan = slots_to_plan(u.id, u.slots, seed);
  job.vocab = phonoprobe::derive_vocab(job.plan);
  return job;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("phonoprobe_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
