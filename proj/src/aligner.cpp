#include "phonoprobe/aligner.hpp"

#include <algorithm>
#include <unordered_map>

#include "phonoprobe/error.hpp"

namespace phonoprobe {

std::string_view to_string(OpTag tag) {
  switch (tag) {
    case OpTag::equal:
      return "equal";
    case OpTag::replace:
      return "replace";
    case OpTag::del:
      return "delete";
    case OpTag::insert:
      return "insert";
  }
  return "equal";
}

std::string_view to_string(LabelKind kind) {
  switch (kind) {
    case LabelKind::hit:
      return "hit";
    case LabelKind::substitution:
      return "substitution";
    case LabelKind::deletion:
      return "deletion";
    case LabelKind::insertion:
      return "insertion";
  }
  return "hit";
}

std::string_view to_string(AlignerMode mode) {
  return mode == AlignerMode::levenshtein ? "levenshtein" : "ratcliff-obershelp";
}

AlignerMode parse_aligner_mode(std::string_view name) {
  if (name == "ratcliff-obershelp") return AlignerMode::ratcliff_obershelp;
  if (name == "levenshtein") return AlignerMode::levenshtein;
  throw InvalidArgument("unknown aligner mode '" + std::string(name) + "'");
}

EditCounts& EditCounts::operator+=(const EditCounts& other) noexcept {
  hits += other.hits;
  substitutions += other.substitutions;
  deletions += other.deletions;
  insertions += other.insertions;
  return *this;
}

namespace {

struct Block {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t size = 0;
};

// Maps both token sequences onto dense integer ids.
std::pair<std::vector<int>, std::vector<int>> intern(std::span<const std::string> a,
                                                     std::span<const std::string> b) {
  std::unordered_map<std::string_view, int> ids;
  auto map = [&](std::span<const std::string> seq) {
    std::vector<int> out;
    out.reserve(seq.size());
    for (const auto& tok : seq) {
      out.push_back(ids.try_emplace(tok, static_cast<int>(ids.size())).first->second);
    }
    return out;
  };
  auto ia = map(a);
  auto ib = map(b);
  return {std::move(ia), std::move(ib)};
}

class LongestMatchFinder {
 public:
  LongestMatchFinder(const std::vector<int>& a, const std::vector<int>& b) : a_(a), b_(b) {
    for (std::size_t j = 0; j < b.size(); ++j) positions_[b[j]].push_back(j);
  }

  // Longest a[i, i+k) == b[j, j+k) inside the window; smallest i, then
  // smallest j, among the longest.
  Block find(std::size_t alo, std::size_t ahi, std::size_t blo, std::size_t bhi) const {
    Block best{alo, blo, 0};
    // run_len[j] = length of the match ending at (i - 1, j).
    std::unordered_map<std::size_t, std::size_t> run_len;
    std::unordered_map<std::size_t, std::size_t> next;
    for (std::size_t i = alo; i < ahi; ++i) {
      next.clear();
      auto it = positions_.find(a_[i]);
      if (it != positions_.end()) {
        for (std::size_t j : it->second) {
          if (j < blo) continue;
          if (j >= bhi) break;
          std::size_t k = 1;
          if (j > 0) {
            auto prev = run_len.find(j - 1);
            if (prev != run_len.end()) k += prev->second;
          }
          next[j] = k;
          if (k > best.size) best = {i + 1 - k, j + 1 - k, k};
        }
      }
      std::swap(run_len, next);
    }
    return best;
  }

 private:
  const std::vector<int>& a_;
  const std::vector<int>& b_;
  std::unordered_map<int, std::vector<std::size_t>> positions_;
};

std::vector<Block> matching_blocks(const std::vector<int>& a, const std::vector<int>& b) {
  const LongestMatchFinder finder(a, b);
  struct Window {
    std::size_t alo, ahi, blo, bhi;
  };
  std::vector<Window> pending{{0, a.size(), 0, b.size()}};
  std::vector<Block> blocks;
  while (!pending.empty()) {
    const Window w = pending.back();
    pending.pop_back();
    const Block m = finder.find(w.alo, w.ahi, w.blo, w.bhi);
    if (m.size == 0) continue;
    blocks.push_back(m);
    if (w.alo < m.i && w.blo < m.j) pending.push_back({w.alo, m.i, w.blo, m.j});
    if (m.i + m.size < w.ahi && m.j + m.size < w.bhi) {
      pending.push_back({m.i + m.size, w.ahi, m.j + m.size, w.bhi});
    }
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const Block& x, const Block& y) { return std::tie(x.i, x.j) < std::tie(y.i, y.j); });

  std::vector<Block> merged;
  for (const Block& blk : blocks) {
    if (!merged.empty() && merged.back().i + merged.back().size == blk.i &&
        merged.back().j + merged.back().size == blk.j) {
      merged.back().size += blk.size;
    } else {
      merged.push_back(blk);
    }
  }
  merged.push_back({a.size(), b.size(), 0});
  return merged;
}

OpTag gap_tag(std::size_t ref_len, std::size_t hyp_len) {
  if (ref_len > 0 && hyp_len > 0) return OpTag::replace;
  return ref_len > 0 ? OpTag::del : OpTag::insert;
}

}  // namespace

std::vector<Opcode> matching_opcodes(std::span<const std::string> ref,
                                     std::span<const std::string> hyp) {
  const auto [a, b] = intern(ref, hyp);
  std::vector<Opcode> ops;
  std::size_t i = 0;
  std::size_t j = 0;
  for (const Block& blk : matching_blocks(a, b)) {
    if (i < blk.i || j < blk.j) ops.push_back({gap_tag(blk.i - i, blk.j - j), i, blk.i, j, blk.j});
    i = blk.i + blk.size;
    j = blk.j + blk.size;
    if (blk.size > 0) ops.push_back({OpTag::equal, blk.i, i, blk.j, j});
  }
  return ops;
}

std::vector<Opcode> levenshtein_opcodes(std::span<const std::string> ref,
                                        std::span<const std::string> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<std::size_t> dist((n + 1) * (m + 1));
  auto d = [&](std::size_t i, std::size_t j) -> std::size_t& { return dist[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) d(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) d(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = d(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d(i, j) = std::min({diag, d(i - 1, j) + 1, d(i, j - 1) + 1});
    }
  }

  // Backtrack to (0, 0), recording whether each step was an exact match.
  struct Step {
    std::size_t di, dj;
    bool match;
  };
  std::vector<Step> steps;
  for (std::size_t i = n, j = m; i > 0 || j > 0;) {
    if (i > 0 && j > 0 && d(i, j) == d(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      steps.push_back({1, 1, ref[i - 1] == hyp[j - 1]});
      --i;
      --j;
    } else if (i > 0 && d(i, j) == d(i - 1, j) + 1) {
      steps.push_back({1, 0, false});
      --i;
    } else {
      steps.push_back({0, 1, false});
      --j;
    }
  }
  std::reverse(steps.begin(), steps.end());

  std::vector<Opcode> ops;
  std::size_t i = 0;
  std::size_t j = 0;
  for (const Step& s : steps) {
    const OpTag tag = s.match ? OpTag::equal : gap_tag(s.di, s.dj);
    const bool same_group =
        !ops.empty() && (s.match ? ops.back().tag == OpTag::equal : ops.back().tag != OpTag::equal);
    if (same_group) {
      auto& op = ops.back();
      op.ref_end += s.di;
      op.hyp_end += s.dj;
      op.tag = s.match ? OpTag::equal : gap_tag(op.ref_end - op.ref_start, op.hyp_end - op.hyp_start);
    } else {
      ops.push_back({tag, i, i + s.di, j, j + s.dj});
    }
    i += s.di;
    j += s.dj;
  }
  return ops;
}

ReplaceClassification classify_replace(std::span<const std::string> ref_span,
                                       std::span<const std::string> hyp_span) {
  if (ref_span.empty() || hyp_span.empty()) {
    throw InvalidArgument("classify_replace: both spans must be non-empty");
  }
  ReplaceClassification out;
  const std::size_t paired = std::min(ref_span.size(), hyp_span.size());
  for (std::size_t k = 0; k < paired; ++k) out.substitutions.emplace_back(ref_span[k], hyp_span[k]);
  for (std::size_t k = paired; k < ref_span.size(); ++k) out.deleted.push_back(ref_span[k]);
  for (std::size_t k = paired; k < hyp_span.size(); ++k) out.inserted.push_back(hyp_span[k]);
  return out;
}

AlignmentOutcome align(const PhonemeSequence& ref, const PhonemeSequence& hyp, AlignerMode mode) {
  AlignmentOutcome out;
  out.reference = ref;
  out.hypothesis = hyp;
  const std::span<const std::string> r = ref.tokens();
  const std::span<const std::string> h = hyp.tokens();
  out.opcodes = mode == AlignerMode::levenshtein ? levenshtein_opcodes(r, h) : matching_opcodes(r, h);
  out.ref_labels.resize(r.size());
  out.hyp_labels.resize(h.size());

  for (const Opcode& op : out.opcodes) {
    switch (op.tag) {
      case OpTag::equal:
        out.counts.hits += op.ref_end - op.ref_start;
        break;  // labels default to hit
      case OpTag::del:
        for (std::size_t i = op.ref_start; i < op.ref_end; ++i) {
          out.ref_labels[i] = {LabelKind::deletion, {}};
        }
        out.counts.deletions += op.ref_end - op.ref_start;
        break;
      case OpTag::insert:
        for (std::size_t j = op.hyp_start; j < op.hyp_end; ++j) {
          out.hyp_labels[j] = {LabelKind::insertion, {}};
        }
        out.counts.insertions += op.hyp_end - op.hyp_start;
        break;
      case OpTag::replace: {
        const auto cls = classify_replace(r.subspan(op.ref_start, op.ref_end - op.ref_start),
                                          h.subspan(op.hyp_start, op.hyp_end - op.hyp_start));
        const std::size_t paired = cls.substitutions.size();
        for (std::size_t k = 0; k < paired; ++k) {
          out.ref_labels[op.ref_start + k] = {LabelKind::substitution, h[op.hyp_start + k]};
          out.hyp_labels[op.hyp_start + k] = {LabelKind::substitution, r[op.ref_start + k]};
        }
        for (std::size_t i = op.ref_start + paired; i < op.ref_end; ++i) {
          out.ref_labels[i] = {LabelKind::deletion, {}};
        }
        for (std::size_t j = op.hyp_start + paired; j < op.hyp_end; ++j) {
          out.hyp_labels[j] = {LabelKind::insertion, {}};
        }
        out.counts.substitutions += paired;
        out.counts.deletions += cls.deleted.size();
        out.counts.insertions += cls.inserted.size();
        break;
      }
    }
  }
  return out;
}

}  // namespace phonoprobe
