#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include "phonoprobe/bundle.hpp"
#include "phonoprobe/error.hpp"

namespace phonoprobe {

namespace fs = std::filesystem;
using nlohmann::json;

LogitMatrix::LogitMatrix(std::size_t frames, std::size_t vocab_size, float fill)
    : frames_(frames), vocab_size_(vocab_size), values_(frames * vocab_size, fill) {}

LogitMatrix::LogitMatrix(std::size_t frames, std::size_t vocab_size, std::vector<float> values)
    : frames_(frames), vocab_size_(vocab_size), values_(std::move(values)) {
  if (values_.size() != frames * vocab_size) {
    throw ShapeMismatch("logit matrix: " + std::to_string(values_.size()) +
                        " values for shape " + std::to_string(frames) + "x" +
                        std::to_string(vocab_size));
  }
}

bool operator==(const LogitMatrix& a, const LogitMatrix& b) {
  return a.frames_ == b.frames_ && a.vocab_size_ == b.vocab_size_ &&
         (a.values_.empty() ||
          std::memcmp(a.values_.data(), b.values_.data(), a.values_.size() * sizeof(float)) == 0);
}

void LayerLogitBundle::validate() const {
  if (utterance_id.empty()) throw InvariantViolation("utterance_id", "must not be empty");
  if (vocab.size() < 2) throw InvariantViolation("vocab", "needs at least 2 entries");
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab[i].empty()) {
      throw InvariantViolation("vocab", "empty token at id " + std::to_string(i));
    }
  }
  if (blank_id < 0 || static_cast<std::size_t>(blank_id) >= vocab.size()) {
    throw InvariantViolation("blank_id", std::to_string(blank_id) + " outside [0, " +
                                             std::to_string(vocab.size()) + ")");
  }
  if (layers.empty()) throw InvariantViolation("layers", "bundle has no layers");
  const std::size_t t = layers.front().logits.frames();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& layer = layers[i];
    if (i > 0 && layer.index <= layers[i - 1].index) {
      throw InvariantViolation("layers", "layer indices must be strictly increasing (" +
                                             std::to_string(layers[i - 1].index) + " then " +
                                             std::to_string(layer.index) + ")");
    }
    if (layer.logits.vocab_size() != vocab.size()) {
      throw InvariantViolation("layers", "layer " + std::to_string(layer.index) + " has V=" +
                                             std::to_string(layer.logits.vocab_size()) +
                                             ", vocab has " + std::to_string(vocab.size()));
    }
    if (layer.logits.frames() != t) {
      throw InvariantViolation("layers", "layer " + std::to_string(layer.index) + " has T=" +
                                             std::to_string(layer.logits.frames()) +
                                             ", expected " + std::to_string(t));
    }
  }
  reference.require_no_blank(blank_token(), "reference");
  if (tokenize(reference.joined(), tokenizer) != reference) {
    throw InvariantViolation("reference", "tokens do not match the '" +
                                              std::string(to_string(tokenizer)) +
                                              "' tokenization of their concatenation");
  }
}

std::vector<int> LayerLogitBundle::layer_indices() const {
  std::vector<int> out;
  out.reserve(layers.size());
  for (const auto& l : layers) out.push_back(l.index);
  return out;
}

const LayerLogits& LayerLogitBundle::layer(int index) const {
  for (const auto& l : layers) {
    if (l.index == index) return l;
  }
  throw InvalidArgument("layer " + std::to_string(index) + " not in bundle " + utterance_id);
}

std::string layer_file_name(int index) { return "layer_" + std::to_string(index) + ".llb"; }

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<char>((v >> shift) & 0xFF));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(p[k]);
  return v;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + file.string());
  return data;
}

void spit(const fs::path& file, const std::string& data) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing " + file.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + file.string());
}

template <typename T>
T required(const json& j, const char* key, const fs::path& file) {
  if (!j.contains(key)) throw FormatError(file.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

void write_matrix_file(const LogitMatrix& matrix, const fs::path& file) {
  if (matrix.frames() > UINT32_MAX || matrix.vocab_size() > UINT32_MAX) {
    throw InvalidArgument("matrix too large for the LLB1 header: " + file.string());
  }
  std::string data;
  data.reserve(kMatrixHeaderBytes + matrix.values().size() * 4);
  data.append(kMatrixMagic, 4);
  put_u32(data, kMatrixFormatVersion);
  put_u32(data, static_cast<std::uint32_t>(matrix.frames()));
  put_u32(data, static_cast<std::uint32_t>(matrix.vocab_size()));
  for (float v : matrix.values()) put_u32(data, std::bit_cast<std::uint32_t>(v));
  spit(file, data);
}

LogitMatrix read_matrix_file(const fs::path& file) {
  const std::string data = slurp(file);
  if (data.size() < kMatrixHeaderBytes) {
    throw IoError(file.string() + ": truncated header (" + std::to_string(data.size()) +
                  " bytes)");
  }
  if (std::memcmp(data.data(), kMatrixMagic, 4) != 0) {
    throw FormatError(file.string() + ": bad magic, expected LLB1");
  }
  const std::uint32_t version = get_u32(data.data() + 4);
  if (version != kMatrixFormatVersion) {
    throw FormatError(file.string() + ": unsupported format version " + std::to_string(version));
  }
  const std::size_t frames = get_u32(data.data() + 8);
  const std::size_t vocab = get_u32(data.data() + 12);
  const std::size_t expected = kMatrixHeaderBytes + frames * vocab * 4;
  if (data.size() < expected) {
    throw IoError(file.string() + ": truncated payload (" + std::to_string(data.size()) +
                  " of " + std::to_string(expected) + " bytes)");
  }
  if (data.size() > expected) {
    throw FormatError(file.string() + ": " + std::to_string(data.size() - expected) +
                      " trailing bytes after payload");
  }
  std::vector<float> values(frames * vocab);
  const char* p = data.data() + kMatrixHeaderBytes;
  for (std::size_t i = 0; i < values.size(); ++i, p += 4) {
    values[i] = std::bit_cast<float>(get_u32(p));
  }
  return LogitMatrix(frames, vocab, std::move(values));
}

void write_bundle(const LayerLogitBundle& bundle, const fs::path& dir) {
  bundle.validate();
  std::error_code ec;
  if (!dir.parent_path().empty() && !fs::is_directory(dir.parent_path(), ec)) {
    throw IoError("parent directory does not exist: " + dir.parent_path().string());
  }
  fs::create_directory(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  json layers = json::array();
  for (const auto& layer : bundle.layers) {
    const std::string name = layer_file_name(layer.index);
    write_matrix_file(layer.logits, dir / name);
    layers.push_back({{"index", layer.index}, {"file", name}, {"frames", layer.logits.frames()}});
  }
  json manifest = {
      {"utterance_id", bundle.utterance_id},
      {"vocab", bundle.vocab},
      {"blank_id", bundle.blank_id},
      {"reference", bundle.reference.joined()},
      {"tokenizer", std::string(to_string(bundle.tokenizer))},
      {"layers", std::move(layers)},
      {"metadata", bundle.metadata},
  };
  spit(dir / kManifestName, manifest.dump(2) + "\n");
}

LayerLogitBundle read_bundle(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestName;
  json manifest;
  try {
    manifest = json::parse(slurp(manifest_path));
  } catch (const json::parse_error& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  if (!manifest.is_object()) throw FormatError(manifest_path.string() + ": not a JSON object");

  LayerLogitBundle bundle;
  bundle.utterance_id = required<std::string>(manifest, "utterance_id", manifest_path);
  bundle.vocab = required<std::vector<std::string>>(manifest, "vocab", manifest_path);
  bundle.blank_id = required<TokenId>(manifest, "blank_id", manifest_path);
  if (bundle.blank_id < 0 || static_cast<std::size_t>(bundle.blank_id) >= bundle.vocab.size()) {
    throw InvariantViolation("blank_id", std::to_string(bundle.blank_id) + " outside [0, " +
                                             std::to_string(bundle.vocab.size()) + ") in " +
                                             manifest_path.string());
  }
  try {
    bundle.tokenizer = parse_tokenizer_mode(
        manifest.contains("tokenizer") ? required<std::string>(manifest, "tokenizer", manifest_path)
                                       : "chars");
    bundle.reference =
        tokenize(required<std::string>(manifest, "reference", manifest_path), bundle.tokenizer);
  } catch (const InvalidArgument& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  if (manifest.contains("metadata") && !manifest["metadata"].is_null()) {
    bundle.metadata =
        required<std::map<std::string, std::string>>(manifest, "metadata", manifest_path);
  }

  const auto entries = required<json>(manifest, "layers", manifest_path);
  if (!entries.is_array()) throw FormatError(manifest_path.string() + ": 'layers' is not an array");
  for (const auto& entry : entries) {
    const int index = required<int>(entry, "index", manifest_path);
    const auto file = required<std::string>(entry, "file", manifest_path);
    const auto frames = required<std::size_t>(entry, "frames", manifest_path);
    LogitMatrix logits = read_matrix_file(dir / file);
    if (logits.frames() != frames) {
      throw ShapeMismatch((dir / file).string() + ": header T=" +
                          std::to_string(logits.frames()) + " but manifest declares T=" +
                          std::to_string(frames));
    }
    if (logits.vocab_size() != bundle.vocab.size()) {
      throw ShapeMismatch((dir / file).string() + ": header V=" +
                          std::to_string(logits.vocab_size()) + " but vocab has " +
                          std::to_string(bundle.vocab.size()) + " entries");
    }
    bundle.layers.push_back({index, std::move(logits)});
  }
  bundle.validate();
  return bundle;
}

std::vector<fs::path> discover_bundles(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("not a directory: " + root.string());
  if (fs::exists(root / kManifestName)) return {root};
  std::vector<fs::path> out;
  for (auto it = fs::recursive_directory_iterator(root, ec); it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (ec) throw IoError("cannot scan " + root.string() + ": " + ec.message());
    if (it->is_directory() && fs::exists(it->path() / kManifestName)) {
      out.push_back(it->path());
      it.disable_recursion_pending();
    }
  }
  if (ec) throw IoError("cannot scan " + root.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace phonoprobe
