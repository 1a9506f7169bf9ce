#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lexalign/common.hpp"

namespace lexalign {

/// Ordered set of unique words. Ids are dense and follow insertion order,
/// which for fastText dumps is also frequency order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  /// Appends `word`; returns false (and leaves the vocabulary untouched)
  /// when it is already present.
  bool add(std::string word);

  std::optional<WordId> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId, Hash, std::equal_to<>> index_;
};

/// Counters collected while reading an interchange file.
struct LoadStats {
  std::size_t declared_count = 0;
  std::size_t duplicates = 0;
  std::size_t rejected_words = 0;  // words containing a space
};

/// A vocabulary plus one float row per word.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  /// Throws Error if the row count disagrees with the vocabulary, if the
  /// dimension is zero, or if `normalized` is claimed for non-unit rows.
  EmbeddingSpace(Vocabulary vocab, RowMatrixF matrix, bool normalized = false);

  const Vocabulary& vocab() const { return vocab_; }
  const RowMatrixF& matrix() const { return matrix_; }
  std::size_t size() const { return vocab_.size(); }
  int dim() const { return static_cast<int>(matrix_.cols()); }
  bool normalized() const { return normalized_; }

  std::span<const float> row(WordId id) const {
    return {matrix_.data() + static_cast<std::ptrdiff_t>(id) * matrix_.cols(),
            static_cast<std::size_t>(matrix_.cols())};
  }

  /// Row of `word`, or nullopt when it is not in the vocabulary.
  std::optional<std::span<const float>> lookup(std::string_view word) const;

  LoadStats stats;

 private:
  Vocabulary vocab_;
  RowMatrixF matrix_;
  bool normalized_ = false;
};

/// Reads the fastText `.vec` text format: a "<count> <dim>" header followed
/// by "<word> <v1> ... <vd>" rows. At most `max_words` distinct rows are
/// kept, in file order. Duplicate words and words containing a space are
/// skipped and counted in `stats`; any other malformed row is a FormatError.
EmbeddingSpace load_text_embeddings(
    const std::filesystem::path& path,
    std::optional<std::size_t> max_words = std::nullopt);
EmbeddingSpace parse_text_embeddings(
    std::string_view text, std::optional<std::size_t> max_words = std::nullopt);

/// Writes the `.vec` format with shortest round-trip float formatting.
void write_text_embeddings(const EmbeddingSpace& space,
                           const std::filesystem::path& path);
std::string format_text_embeddings(const EmbeddingSpace& space);

/// Divides every row by its L2 norm. Idempotent. Throws Error naming the
/// first word with an all-zero row.
EmbeddingSpace l2_normalize(const EmbeddingSpace& space);

/// Loads either the binary cache or the `.vec` text format, chosen by
/// sniffing the file's magic bytes. `max_words` keeps the leading rows.
EmbeddingSpace load_embeddings(
    const std::filesystem::path& path,
    std::optional<std::size_t> max_words = std::nullopt);

/// Restricts both spaces to the words they share, in `a`'s order.
std::pair<EmbeddingSpace, EmbeddingSpace> intersect_vocab(
    const EmbeddingSpace& a, const EmbeddingSpace& b);

}  // namespace lexalign
