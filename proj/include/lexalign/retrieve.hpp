#pragma once

#include <filesystem>
#include <vector>

#include "lexalign/embed_store.hpp"
#include "lexalign/lexicon.hpp"

namespace lexalign {

struct SimilarityConfig {
  double scale = 20.0;
  void validate() const;
};

/// C * cos(u, v). Throws Error on a zero vector or a dimension mismatch.
double scaled_cosine(std::span<const float> u, std::span<const float> v,
                     const SimilarityConfig& cfg);

struct Neighbor {
  WordId id;
  double score;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Exact scaled-cosine search over a fixed target space. Row norms are
/// computed once; all-zero target rows are never returned.
class CosineIndex {
 public:
  CosineIndex(const EmbeddingSpace& space, SimilarityConfig cfg);

  /// The k best targets not in `exclude` (sorted ids), score-descending,
  /// ties broken by lower id.
  std::vector<Neighbor> topk(std::span<const float> query, std::size_t k,
                             std::span<const WordId> exclude = {}) const;

  const EmbeddingSpace& space() const { return *space_; }

 private:
  const EmbeddingSpace* space_;
  SimilarityConfig cfg_;
  std::vector<double> norms_;
};

std::vector<Neighbor> topk(std::span<const float> query,
                           const EmbeddingSpace& space, std::size_t k,
                           std::span<const WordId> exclude,
                           const SimilarityConfig& cfg);

struct NegativeEntry {
  WordId src;
  WordId gold;
  std::vector<WordId> negatives;  // similarity-descending
};

/// One entry per lexicon pair, in lexicon order.
struct NegativeTable {
  std::size_t n_negatives = 0;
  std::vector<NegativeEntry> entries;
};

/// For each pair (w, v): the n_negatives targets closest to w under the
/// pre-fine-tuning spaces, excluding v itself. `lex` must be filtered to
/// vocab.
NegativeTable mine_hard_negatives(const TranslationLexicon& lex,
                                  const EmbeddingSpace& src_space,
                                  const EmbeddingSpace& tgt_space,
                                  std::size_t n_negatives,
                                  const SimilarityConfig& cfg,
                                  unsigned threads = 1);

/// TSV rows "src \t gold \t neg1,neg2,...".
void write_negative_table(const NegativeTable& table,
                          const EmbeddingSpace& src_space,
                          const EmbeddingSpace& tgt_space,
                          const std::filesystem::path& path);
NegativeTable read_negative_table(const std::filesystem::path& path,
                                  const EmbeddingSpace& src_space,
                                  const EmbeddingSpace& tgt_space);

}  // namespace lexalign
