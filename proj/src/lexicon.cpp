#include "lexalign/lexicon.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace lexalign {

namespace {

std::string pair_key(std::string_view a, std::string_view b) {
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key.append(a).push_back('\t');
  key.append(b);
  return key;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && is_ws(line[i])) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !is_ws(line[j])) ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool skip_line(std::string_view line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string_view::npos || line[first] == '#';
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    fn(text.substr(start, end - start));
    start = end + 1;
  }
}

}  // namespace

TranslationLexicon::TranslationLexicon(std::vector<WordPair> pairs,
                                       LexiconRole role)
    : role_(role) {
  for (auto& p : pairs) add(std::move(p));
}

bool TranslationLexicon::add(WordPair pair) {
  if (!keys_.insert(pair_key(pair.src, pair.tgt)).second) return false;
  pairs_.push_back(std::move(pair));
  return true;
}

bool TranslationLexicon::contains(const WordPair& pair) const {
  return keys_.count(pair_key(pair.src, pair.tgt)) > 0;
}

TranslationLexicon parse_lexicon(std::string_view text, LexiconRole role) {
  TranslationLexicon lex(role);
  std::size_t skipped = 0;
  for_each_line(text, [&](std::string_view line) {
    if (skip_line(line)) return;
    const auto cols = split_ws(line);
    if (cols.size() != 2) {
      ++skipped;
      return;
    }
    lex.add({std::string(cols[0]), std::string(cols[1])});
  });
  lex.skipped_lines = skipped;
  return lex;
}

TranslationLexicon load_lexicon(const std::filesystem::path& path,
                                LexiconRole role) {
  return parse_lexicon(read_file(path), role);
}

ScoredWordPairs parse_scored_pairs(std::string_view text) {
  ScoredWordPairs out;
  for_each_line(text, [&](std::string_view line) {
    if (skip_line(line)) return;
    const auto cols = split_ws(line);
    double score = 0.0;
    bool ok = cols.size() == 3;
    if (ok) {
      auto [ptr, ec] = std::from_chars(
          cols[2].data(), cols[2].data() + cols[2].size(), score);
      ok = ec == std::errc() && ptr == cols[2].data() + cols[2].size() &&
           std::isfinite(score);
    }
    if (!ok) {
      ++out.skipped_lines;
      return;
    }
    out.triples.push_back({std::string(cols[0]), std::string(cols[1]), score});
  });
  return out;
}

ScoredWordPairs load_scored_pairs(const std::filesystem::path& path) {
  return parse_scored_pairs(read_file(path));
}

namespace {

template <typename Pairs>
LeakageResult remove_leak_impl(const TranslationLexicon& train,
                               const Pairs& test) {
  std::unordered_set<std::string> banned;
  for (const auto& p : test) {
    banned.insert(pair_key(p.src, p.tgt));
    banned.insert(pair_key(p.tgt, p.src));
  }
  LeakageResult result{TranslationLexicon(train.role()), 0};
  std::vector<WordPair> kept;
  for (const auto& p : train.pairs()) {
    if (banned.count(pair_key(p.src, p.tgt)))
      ++result.removed;
    else
      kept.push_back(p);
  }
  result.lexicon = TranslationLexicon(std::move(kept), train.role());
  return result;
}

}  // namespace

LeakageResult remove_test_leakage(const TranslationLexicon& train,
                                  const TranslationLexicon& test) {
  return remove_leak_impl(train, test.pairs());
}

LeakageResult remove_test_leakage(const TranslationLexicon& train,
                                  const ScoredWordPairs& test) {
  return remove_leak_impl(train, test.triples);
}

FilterResult filter_to_vocab(const TranslationLexicon& lex,
                             const EmbeddingSpace& src_space,
                             const EmbeddingSpace& tgt_space) {
  std::vector<WordPair> kept;
  std::size_t dropped = 0;
  for (const auto& p : lex.pairs()) {
    if (src_space.vocab().contains(p.src) && tgt_space.vocab().contains(p.tgt))
      kept.push_back(p);
    else
      ++dropped;
  }
  return {TranslationLexicon(std::move(kept), lex.role()), dropped};
}

std::vector<Anchor> decouple_pairs(const TranslationLexicon& lex) {
  std::vector<Anchor> anchors;
  std::unordered_set<std::string> seen_src, seen_tgt;
  for (const auto& p : lex.pairs())
    if (seen_src.insert(p.src).second) anchors.push_back({p.src, Side::src});
  for (const auto& p : lex.pairs())
    if (seen_tgt.insert(p.tgt).second) anchors.push_back({p.tgt, Side::tgt});
  return anchors;
}

}  // namespace lexalign
