#pragma once

#include <filesystem>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lexalign/embed_store.hpp"

namespace lexalign {

enum class LexiconRole { train, test };

struct WordPair {
  std::string src;
  std::string tgt;
  friend bool operator==(const WordPair&, const WordPair&) = default;
};

/// Ordered, duplicate-free list of translation pairs. A source word may
/// appear with several targets.
class TranslationLexicon {
 public:
  explicit TranslationLexicon(LexiconRole role = LexiconRole::train)
      : role_(role) {}
  TranslationLexicon(std::vector<WordPair> pairs, LexiconRole role);

  /// Appends unless the exact pair is already present.
  bool add(WordPair pair);

  const std::vector<WordPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  LexiconRole role() const { return role_; }
  bool contains(const WordPair& pair) const;

  std::size_t skipped_lines = 0;

 private:
  LexiconRole role_;
  std::vector<WordPair> pairs_;
  std::unordered_set<std::string> keys_;
};

struct ScoredPair {
  std::string src;
  std::string tgt;
  double score;
};

struct ScoredWordPairs {
  std::vector<ScoredPair> triples;
  std::size_t skipped_lines = 0;
};

/// Two-column, tab- or whitespace-separated dictionary. '#' lines and blank
/// lines are ignored; lines without exactly two columns are counted in
/// `skipped_lines`.
TranslationLexicon load_lexicon(const std::filesystem::path& path,
                                LexiconRole role);
TranslationLexicon parse_lexicon(std::string_view text, LexiconRole role);

/// Three columns: source word, target word, finite gold score.
ScoredWordPairs load_scored_pairs(const std::filesystem::path& path);
ScoredWordPairs parse_scored_pairs(std::string_view text);

struct LeakageResult {
  TranslationLexicon lexicon;
  std::size_t removed = 0;
};

/// Drops every training pair that occurs in the test set in either
/// orientation. Matching is exact-string.
LeakageResult remove_test_leakage(const TranslationLexicon& train,
                                  const TranslationLexicon& test);
LeakageResult remove_test_leakage(const TranslationLexicon& train,
                                  const ScoredWordPairs& test);

struct FilterResult {
  TranslationLexicon lexicon;
  std::size_t dropped = 0;
};

FilterResult filter_to_vocab(const TranslationLexicon& lex,
                             const EmbeddingSpace& src_space,
                             const EmbeddingSpace& tgt_space);

enum class Side { src, tgt };

struct Anchor {
  std::string word;
  Side side;
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// One anchor per distinct word on each side, source anchors first, each
/// in first-occurrence order.
std::vector<Anchor> decouple_pairs(const TranslationLexicon& lex);

}  // namespace lexalign
