#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace phonoprobe {

/// Ordered list of phoneme tokens (SAMPA symbols). Tokens are never empty.
class PhonemeSequence {
 public:
  PhonemeSequence() = default;
  explicit PhonemeSequence(std::vector<std::string> tokens);
  PhonemeSequence(std::initializer_list<std::string> tokens);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  /// Concatenation of all tokens; inverts `tokenize` in every mode.
  std::string joined() const;

  /// Throws InvariantViolation(field) if any token equals `blank`.
  void require_no_blank(std::string_view blank, const std::string& field) const;

  friend bool operator==(const PhonemeSequence&, const PhonemeSequence&) = default;

 private:
  std::vector<std::string> tokens_;
};

enum class TokenizerMode {
  chars,         // one token per Unicode scalar
  sampa_length,  // as chars, but ':' attaches to the preceding token
};

std::string_view to_string(TokenizerMode mode);
/// Accepts "chars" and "sampa-length"; throws InvalidArgument otherwise.
TokenizerMode parse_tokenizer_mode(std::string_view name);

/// Splits `raw` (UTF-8) into phoneme tokens. Throws FormatError on invalid
/// UTF-8 and InvalidArgument on a leading ':' in sampa-length mode.
PhonemeSequence tokenize(std::string_view raw, TokenizerMode mode = TokenizerMode::chars);

/// Splits UTF-8 text into its Unicode scalars, each as its own UTF-8 string.
std::vector<std::string> utf8_scalars(std::string_view text);

}  // namespace phonoprobe
