#include "phonoprobe/tokenize.hpp"

#include <cstdint>

#include "phonoprobe/error.hpp"

namespace phonoprobe {

PhonemeSequence::PhonemeSequence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) {
      throw InvariantViolation("tokens", "empty token at position " + std::to_string(i));
    }
  }
}

PhonemeSequence::PhonemeSequence(std::initializer_list<std::string> tokens)
    : PhonemeSequence(std::vector<std::string>(tokens)) {}

std::string PhonemeSequence::joined() const {
  std::string out;
  for (const auto& t : tokens_) out += t;
  return out;
}

void PhonemeSequence::require_no_blank(std::string_view blank, const std::string& field) const {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i] == blank) {
      throw InvariantViolation(field, "blank token '" + std::string(blank) +
                                          "' at position " + std::to_string(i));
    }
  }
}

std::string_view to_string(TokenizerMode mode) {
  switch (mode) {
    case TokenizerMode::chars:
      return "chars";
    case TokenizerMode::sampa_length:
      return "sampa-length";
  }
  return "chars";
}

TokenizerMode parse_tokenizer_mode(std::string_view name) {
  if (name == "chars") return TokenizerMode::chars;
  if (name == "sampa-length") return TokenizerMode::sampa_length;
  throw InvalidArgument("unknown tokenizer mode '" + std::string(name) +
                        "' (expected chars or sampa-length)");
}

namespace {

// Length of the UTF-8 scalar starting at text[pos]; throws on malformed input.
std::size_t scalar_length(std::string_view text, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 0;
  std::uint32_t cp = 0;
  if (lead < 0x80) {
    return 1;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    throw FormatError("invalid UTF-8 lead byte at offset " + std::to_string(pos));
  }
  if (pos + len > text.size()) {
    throw FormatError("truncated UTF-8 sequence at offset " + std::to_string(pos));
  }
  for (std::size_t k = 1; k < len; ++k) {
    const auto c = static_cast<unsigned char>(text[pos + k]);
    if ((c & 0xC0) != 0x80) {
      throw FormatError("invalid UTF-8 continuation byte at offset " + std::to_string(pos + k));
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  static constexpr std::uint32_t kMinForLength[] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMinForLength[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    throw FormatError("invalid UTF-8 scalar at offset " + std::to_string(pos));
  }
  return len;
}

}  // namespace

std::vector<std::string> utf8_scalars(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t len = scalar_length(text, pos);
    out.emplace_back(text.substr(pos, len));
    pos += len;
  }
  return out;
}

PhonemeSequence tokenize(std::string_view raw, TokenizerMode mode) {
  auto scalars = utf8_scalars(raw);
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    if (scalars[i].size() == 1 && std::string_view(" \t\n\r\v\f").find(scalars[i][0]) !=
                                      std::string_view::npos) {
      throw InvalidArgument("whitespace token at position " + std::to_string(i));
    }
  }
  if (mode == TokenizerMode::chars) return PhonemeSequence(std::move(scalars));

  std::vector<std::string> tokens;
  tokens.reserve(scalars.size());
  for (auto& s : scalars) {
    if (s == ":") {
      if (tokens.empty()) {
        throw InvalidArgument("sampa-length tokenizer: ':' has no preceding token");
      }
      tokens.back() += s;
    } else {
      tokens.push_back(std::move(s));
    }
  }
  return PhonemeSequence(std::move(tokens));
}

}  // namespace phonoprobe
