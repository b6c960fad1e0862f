#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "phonoprobe/ctc_decoder.hpp"
#include "phonoprobe/error.hpp"
#include "phonoprobe/regressions.hpp"
#include "phonoprobe/synth.hpp"

using namespace phonoprobe;
using fixtures::Fate;

namespace {

LayerAlignments align_layers(const PhonemeSequence& ref, const std::map<int, std::string>& hyps) {
  LayerAlignments out;
  for (const auto& [layer, text] : hyps) out.emplace(layer, align(ref, tokenize(text)));
  return out;
}

// Synthesizes, decodes and aligns a slot plan: the full pipeline.
LayerAlignments pipeline(const std::string& id, const std::vector<fixtures::Slot>& slots,
                         std::uint64_t seed) {
  const auto plan = fixtures::slots_to_plan(id, slots, seed);
  const auto bundle = generate(plan, derive_vocab(plan), 0);
  LayerAlignments out;
  for (const auto& [layer, hyp] : decode_all_layers(bundle)) {
    out.emplace(layer, align(bundle.reference, hyp.tokens));
  }
  return out;
}

}  // namespace

TEST_CASE("stable hits give no events") {
  const auto ref = tokenize("kuta");
  const auto a = align_layers(ref, {{22, "kuta"}, {23, "kuta"}, {24, "kuta"}});
  CHECK(detect(a, "u").empty());
  CHECK(detect(a, "u", {RegressionMode::exhaustive}).empty());
}

TEST_CASE("u hit at 22, substituted by o at 24") {
  const auto ref = tokenize("kuta");
  const auto a = align_layers(ref, {{22, "kuta"}, {23, "kta"}, {24, "kota"}});
  const auto events = detect(a, "utt");
  REQUIRE(events.size() == 1);
  CHECK(events[0] == RegressionEvent{"utt", 1, "u", 22, 24, Degradation::substitution, "o"});
}

TEST_CASE("default mode counts each position once; each_source counts per source") {
  const auto ref = tokenize("kuta");
  const auto a = align_layers(ref, {{22, "kuta"}, {23, "kuta"}, {24, "kta"}});
  const auto once = detect(a, "utt");
  REQUIRE(once.size() == 1);
  CHECK(once[0].source_layer == 22);
  CHECK(once[0].degradation == Degradation::deletion);
  CHECK(once[0].hyp_token.empty());

  DetectOptions per_source;
  per_source.counting = SourceCounting::each_source;
  CHECK(detect(a, "utt", per_source).size() == 2);
}

TEST_CASE("recovery at the final layer") {
  // hit at 22, error at 23, hit again at 24.
  const auto ref = tokenize("kuta");
  const auto a = align_layers(ref, {{22, "kuta"}, {23, "kota"}, {24, "kuta"}});
  CHECK(detect(a, "utt").empty());
  const auto all = detect(a, "utt", {RegressionMode::exhaustive});
  REQUIRE(all.size() == 1);
  CHECK(all[0].source_layer == 22);
  CHECK(all[0].target_layer == 23);
}

TEST_CASE("default sources are the two layers below the final one") {
  const auto ref = tokenize("kuta");
  const auto a = align_layers(ref, {{21, "kuta"}, {22, "kta"}, {23, "kta"}, {24, "kta"}});
  CHECK(detect(a, "utt").empty());
  DetectOptions wide;
  wide.source_layers = std::set<int>{21, 22, 23};
  CHECK(detect(a, "utt", wide).size() == 1);
}

TEST_CASE("exhaustive mode keeps one event per layer pair") {
  const auto ref = tokenize("kuta");
  const auto a = align_layers(ref, {{21, "kuta"}, {22, "kuta"}, {23, "kota"}, {24, "kta"}});
  const auto all = detect(a, "utt", {RegressionMode::exhaustive});
  // (21,23) (21,24) (22,23) (22,24) for the same reference position.
  CHECK(all.size() == 4);
  CHECK(summarize(all).by_token == std::vector<std::pair<std::string, std::size_t>>{{"u", 4}});
}

TEST_CASE("mismatched references are rejected") {
  LayerAlignments a;
  a.emplace(23, align(tokenize("kuta"), tokenize("kuta")));
  a.emplace(24, align(tokenize("kut"), tokenize("kut")));
  CHECK_THROWS_AS(detect(a, "utt"), InvalidArgument);
}

TEST_CASE("summary ranking") {
  CHECK(summarize({}).by_token.empty());
  std::vector<RegressionEvent> events;
  for (int i = 0; i < 7; ++i) events.push_back({"a", 0, "r", 22, 24, Degradation::deletion, ""});
  for (int i = 0; i < 13; ++i) events.push_back({"a", 1, "u", 22, 24, Degradation::substitution, "o"});
  const auto s = summarize(events);
  CHECK(s.total == 20);
  CHECK(s.substitutions == 13);
  CHECK(s.deletions == 7);
  REQUIRE(s.by_token.size() == 2);
  CHECK(s.by_token[0] == std::pair<std::string, std::size_t>{"u", 13});
  CHECK(s.by_token[1] == std::pair<std::string, std::size_t>{"r", 7});
  CHECK(s.by_transition[0].first == "u -> o");
  CHECK(s.by_transition[1].first == "r -> DEL");
}

TEST_CASE("planted corpus: 39 substitutions, 14 deletions, u then r") {
  std::vector<RegressionEvent> all;
  std::vector<RegressionEvent> exhaustive;
  for (const auto& u : fixtures::regression_plant()) {
    const auto a = pipeline(u.id, u.slots, 3);
    const auto found = detect(a, u.id);
    CHECK(found == fixtures::expected_events(u.id, u.slots, RegressionMode::standard));
    all.insert(all.end(), found.begin(), found.end());
    const auto ex = detect(a, u.id, {RegressionMode::exhaustive});
    for (const auto& e : found) CHECK(std::find(ex.begin(), ex.end(), e) != ex.end());
    exhaustive.insert(exhaustive.end(), ex.begin(), ex.end());
  }
  const auto s = summarize(all);
  CHECK(s.substitutions == 39);
  CHECK(s.deletions == 14);
  REQUIRE(s.by_token.size() >= 2);
  CHECK(s.by_token[0] == std::pair<std::string, std::size_t>{"u", 13});
  CHECK(s.by_token[1] == std::pair<std::string, std::size_t>{"r", 7});
  CHECK(exhaustive.size() > all.size());
}

TEST_CASE("random slot plans are recovered exactly") {
  std::mt19937_64 rng(50);
  const char* tokens[] = {"u", "r", "n", "i", "a", "E", "O", "l"};
  for (int p = 0; p < 60; ++p) {
    std::vector<fixtures::Slot> slots;
    const int n_slots = 1 + static_cast<int>(rng() % 7);
    for (int s = 0; s < n_slots; ++s) {
      std::map<int, Fate> fates;
      for (int layer : fixtures::kPlantLayers) fates[layer] = static_cast<Fate>(rng() % 3);
      slots.push_back(fixtures::make_slot(tokens[rng() % 8], fates));
    }
    const std::string id = "r" + std::to_string(p);
    const auto a = pipeline(id, slots, rng());
    CHECK(detect(a, id) == fixtures::expected_events(id, slots, RegressionMode::standard));
    CHECK(detect(a, id, {RegressionMode::exhaustive}) ==
          fixtures::expected_events(id, slots, RegressionMode::exhaustive));
  }
}

TEST_CASE("mode names") {
  CHECK(parse_regression_mode("default") == RegressionMode::standard);
  CHECK(parse_regression_mode("exhaustive") == RegressionMode::exhaustive);
  CHECK_THROWS_AS(parse_regression_mode("all"), InvalidArgument);
}
