#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phonoprobe/tokenize.hpp"

namespace phonoprobe {

enum class OpTag { equal, replace, del, insert };

std::string_view to_string(OpTag tag);

/// One edit block; ref[ref_start, ref_end) maps onto hyp[hyp_start, hyp_end).
struct Opcode {
  OpTag tag = OpTag::equal;
  std::size_t ref_start = 0;
  std::size_t ref_end = 0;
  std::size_t hyp_start = 0;
  std::size_t hyp_end = 0;

  friend bool operator==(const Opcode&, const Opcode&) = default;
};

enum class LabelKind { hit, substitution, deletion, insertion };

std::string_view to_string(LabelKind kind);

/// Per-position label. `counterpart` is the token on the other side of a
/// substitution and empty otherwise.
struct PositionLabel {
  LabelKind kind = LabelKind::hit;
  std::string counterpart;

  friend bool operator==(const PositionLabel&, const PositionLabel&) = default;
};

struct EditCounts {
  std::size_t hits = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;

  std::size_t errors() const noexcept { return substitutions + deletions + insertions; }
  EditCounts& operator+=(const EditCounts& other) noexcept;
  friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

struct AlignmentOutcome {
  PhonemeSequence reference;
  PhonemeSequence hypothesis;
  std::vector<Opcode> opcodes;
  std::vector<PositionLabel> ref_labels;  // hit | substitution | deletion
  std::vector<PositionLabel> hyp_labels;  // hit | substitution | insertion
  EditCounts counts;
};

enum class AlignerMode {
  ratcliff_obershelp,  // SequenceMatcher semantics, no junk heuristics
  levenshtein,         // minimal edit distance, for sensitivity analysis only
};

std::string_view to_string(AlignerMode mode);
AlignerMode parse_aligner_mode(std::string_view name);

/// Ratcliff-Obershelp opcodes: leftmost-longest matching block, recursing on
/// both remainders. Identical to difflib.SequenceMatcher(None, a, b,
/// autojunk=False).get_opcodes().
std::vector<Opcode> matching_opcodes(std::span<const std::string> ref,
                                     std::span<const std::string> hyp);

/// Opcodes from one minimal-edit-distance path (diagonal preferred, then
/// deletion, then insertion when backtracking).
std::vector<Opcode> levenshtein_opcodes(std::span<const std::string> ref,
                                        std::span<const std::string> hyp);

struct ReplaceClassification {
  std::vector<std::pair<std::string, std::string>> substitutions;  // ref -> hyp
  std::vector<std::string> deleted;
  std::vector<std::string> inserted;
};

/// Positional pairing inside a replace block: the leading min(m, n) pairs are
/// substitutions, the rest of the longer side are deletions or insertions.
/// Both spans must be non-empty.
ReplaceClassification classify_replace(std::span<const std::string> ref_span,
                                       std::span<const std::string> hyp_span);

AlignmentOutcome align(const PhonemeSequence& ref, const PhonemeSequence& hyp,
                       AlignerMode mode = AlignerMode::ratcliff_obershelp);

}  // namespace phonoprobe
