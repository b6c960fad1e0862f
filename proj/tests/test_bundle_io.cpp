#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "phonoprobe/bundle.hpp"
#include "phonoprobe/error.hpp"

using namespace phonoprobe;
namespace fs = std::filesystem;

namespace {

LayerLogitBundle small_bundle(std::vector<int> layers, std::size_t frames, std::size_t vocab) {
  LayerLogitBundle b;
  b.utterance_id = "30_F_extract_04";
  for (std::size_t v = 0; v < vocab; ++v) b.vocab.push_back(v == 0 ? "<pad>" : "t" + std::to_string(v));
  b.blank_id = 0;
  b.reference = tokenize("ensudwamillaundiZi");
  for (int l : layers) {
    LogitMatrix m(frames, vocab);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t v = 0; v < vocab; ++v) m.at(t, v) = static_cast<float>(t) - 0.5f * v + l;
    }
    b.layers.push_back({l, std::move(m)});
  }
  return b;
}

LayerLogitBundle random_bundle(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_layers(1, 4), frames(0, 20), vocab(2, 12), start(-3, 30);
  std::uniform_int_distribution<std::uint32_t> bits;
  LayerLogitBundle b;
  b.utterance_id = "utt_" + std::to_string(bits(rng));
  const int v = vocab(rng);
  for (int i = 0; i < v; ++i) b.vocab.push_back("p" + std::to_string(i));
  b.blank_id = std::uniform_int_distribution<int>(0, v - 1)(rng);
  b.tokenizer = bits(rng) % 2 ? TokenizerMode::chars : TokenizerMode::sampa_length;
  b.reference = tokenize(bits(rng) % 2 ? "e:kamb" : "aGu", b.tokenizer);
  if (bits(rng) % 2) b.metadata = {{"speaker", "F"}, {"duration_s", "4.06"}};
  const int t = frames(rng);
  int index = start(rng);
  for (int l = n_layers(rng); l > 0; --l) {
    LogitMatrix m(static_cast<std::size_t>(t), static_cast<std::size_t>(v));
    // Arbitrary bit patterns, NaNs and infinities included.
    for (std::size_t tt = 0; tt < m.frames(); ++tt) {
      for (auto& x : m.row(tt)) x = std::bit_cast<float>(bits(rng));
    }
    b.layers.push_back({index, std::move(m)});
    index += 1 + static_cast<int>(bits(rng) % 3);
  }
  return b;
}

void write_raw(const fs::path& file, const std::string& bytes) {
  std::ofstream(file, std::ios::binary) << bytes;
}

std::string le32(std::uint32_t v) {
  std::string s(4, '\0');
  for (int k = 0; k < 4; ++k) s[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
  return s;
}

}  // namespace

TEST_CASE("degenerate empty utterance round-trips") {
  const auto dir = fixtures::scratch_dir("bundle_empty") / "b";
  const auto b = small_bundle({24}, 0, 2);
  write_bundle(b, dir);
  CHECK(fs::file_size(dir / "layer_24.llb") == kMatrixHeaderBytes);
  const auto manifest = nlohmann::json::parse(std::ifstream(dir / kManifestName));
  CHECK(manifest["layers"].size() == 1);
  CHECK(read_bundle(dir) == b);
}

TEST_CASE("three layers with a realistic vocabulary size") {
  const auto dir = fixtures::scratch_dir("bundle_three") / "b";
  const auto b = small_bundle({22, 23, 24}, 100, 392);
  write_bundle(b, dir);
  for (int l : {22, 23, 24}) {
    CHECK(fs::file_size(dir / layer_file_name(l)) == kMatrixHeaderBytes + 100 * 392 * 4);
  }
  const auto manifest = nlohmann::json::parse(std::ifstream(dir / kManifestName));
  CHECK(manifest["layers"].size() == 3);
  CHECK(manifest["layers"][0]["frames"] == 100);
  CHECK(manifest["tokenizer"] == "chars");
  CHECK(manifest["reference"] == "ensudwamillaundiZi");
  CHECK(read_bundle(dir) == b);
}

TEST_CASE("random bundles round-trip bit-exactly") {
  const auto root = fixtures::scratch_dir("bundle_random");
  std::mt19937_64 rng(11);
  for (int i = 0; i < 120; ++i) {
    const auto b = random_bundle(rng);
    const auto dir = root / std::to_string(i);
    write_bundle(b, dir);
    const auto back = read_bundle(dir);
    REQUIRE(back == b);
  }
}

TEST_CASE("matrix header is little-endian LLB1") {
  const auto dir = fixtures::scratch_dir("bundle_header");
  LogitMatrix m(1, 2, std::vector<float>{1.0f, -2.0f});
  write_matrix_file(m, dir / "m.llb");
  std::ifstream in(dir / "m.llb", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(bytes == std::string("LLB1") + le32(1) + le32(1) + le32(2) +
                     le32(std::bit_cast<std::uint32_t>(1.0f)) +
                     le32(std::bit_cast<std::uint32_t>(-2.0f)));
}

TEST_CASE("bundle from an independent producer is readable") {
  // Written by hand, as an external extractor would.
  const auto dir = fixtures::scratch_dir("bundle_external");
  std::string payload;
  const float values[] = {0.1f, 2.0f, -1.0f, 3.0f, 0.0f, 0.0f};  // T=2, V=3
  for (float v : values) payload += le32(std::bit_cast<std::uint32_t>(v));
  write_raw(dir / "layer_24.llb", "LLB1" + le32(1) + le32(2) + le32(3) + payload);
  write_raw(dir / kManifestName, R"({"utterance_id": "clip", "vocab": ["<pad>", "a", "e:"],
    "blank_id": 0, "reference": "ae:", "tokenizer": "sampa-length",
    "layers": [{"index": 24, "file": "layer_24.llb", "frames": 2}],
    "metadata": {"final_norm": "applied", "sample_rate": "16000"}})");
  const auto b = read_bundle(dir);
  CHECK(b.utterance_id == "clip");
  CHECK(b.reference == PhonemeSequence{"a", "e:"});
  CHECK(b.metadata.at("final_norm") == "applied");
  CHECK(b.layers.at(0).logits.at(1, 0) == 3.0f);
}

TEST_CASE("read errors") {
  const auto root = fixtures::scratch_dir("bundle_errors");
  const auto good = small_bundle({23, 24}, 10, 4);

  SUBCASE("missing directory") {
    CHECK_THROWS_AS(read_bundle(root / "nope"), IoError);
  }
  SUBCASE("manifest frames disagree with matrix header") {
    auto other = good;
    for (auto& l : other.layers) l.logits = LogitMatrix(9, 4);
    write_bundle(other, root / "b");
    auto manifest = nlohmann::json::parse(std::ifstream(root / "b" / kManifestName));
    manifest["layers"][0]["frames"] = 10;
    std::ofstream(root / "b" / kManifestName) << manifest.dump();
    CHECK_THROWS_AS(read_bundle(root / "b"), ShapeMismatch);
  }
  SUBCASE("truncated matrix names the file") {
    write_bundle(good, root / "b");
    fs::resize_file(root / "b" / "layer_24.llb", kMatrixHeaderBytes + 7);
    try {
      read_bundle(root / "b");
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("layer_24.llb") != std::string::npos);
    }
  }
  SUBCASE("bad magic and version") {
    write_bundle(good, root / "b");
    write_raw(root / "b" / "layer_23.llb", "LLB2" + le32(1) + le32(0) + le32(4));
    CHECK_THROWS_AS(read_bundle(root / "b"), FormatError);
    write_raw(root / "b" / "layer_23.llb", "LLB1" + le32(7) + le32(0) + le32(4));
    CHECK_THROWS_AS(read_bundle(root / "b"), FormatError);
  }
  SUBCASE("blank id out of range") {
    write_bundle(good, root / "b");
    auto manifest = nlohmann::json::parse(std::ifstream(root / "b" / kManifestName));
    manifest["blank_id"] = 4;
    std::ofstream(root / "b" / kManifestName) << manifest.dump();
    try {
      read_bundle(root / "b");
      FAIL("expected InvariantViolation");
    } catch (const InvariantViolation& e) {
      CHECK(e.field() == "blank_id");
    }
  }
  SUBCASE("missing matrix file") {
    write_bundle(good, root / "b");
    fs::remove(root / "b" / "layer_23.llb");
    CHECK_THROWS_AS(read_bundle(root / "b"), IoError);
  }
  SUBCASE("malformed manifest") {
    write_bundle(good, root / "b");
    std::ofstream(root / "b" / kManifestName) << "{\"utterance_id\": ";
    CHECK_THROWS_AS(read_bundle(root / "b"), FormatError);
  }
}

TEST_CASE("write rejects invariant violations by field") {
  const auto root = fixtures::scratch_dir("bundle_invalid");
  auto check_field = [&](LayerLogitBundle b, const std::string& field) {
    try {
      write_bundle(b, root / "b");
      FAIL("expected InvariantViolation for " << field);
    } catch (const InvariantViolation& e) {
      CHECK(e.field() == field);
    }
  };
  auto b = small_bundle({23, 24}, 5, 3);
  auto unordered = b;
  std::swap(unordered.layers[0], unordered.layers[1]);
  check_field(unordered, "layers");
  auto duplicate = b;
  duplicate.layers[1].index = 23;
  check_field(duplicate, "layers");
  auto ragged = b;
  ragged.layers[1].logits = LogitMatrix(4, 3);
  check_field(ragged, "layers");
  auto blank = b;
  blank.blank_id = 3;
  check_field(blank, "blank_id");
  auto blank_in_ref = b;
  blank_in_ref.vocab[0] = "a";
  check_field(blank_in_ref, "reference");

  CHECK_THROWS_AS(write_bundle(b, root / "missing_parent" / "b"), IoError);
}

TEST_CASE("corpus discovery") {
  const auto root = fixtures::scratch_dir("bundle_discover");
  const auto b = small_bundle({24}, 2, 2);
  write_bundle(b, root / "z");
  fs::create_directories(root / "nested");
  write_bundle(b, root / "nested" / "a");
  fs::create_directories(root / "empty");
  const auto found = discover_bundles(root);
  REQUIRE(found.size() == 2);
  CHECK(found[0] == root / "nested" / "a");
  CHECK(found[1] == root / "z");
  CHECK(discover_bundles(root / "z") == std::vector<fs::path>{root / "z"});
}
