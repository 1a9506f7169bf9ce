#include "lexalign/embed_store.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "lexalign/binary_io.hpp"

namespace lexalign {

Vocabulary::Vocabulary(std::vector<std::string> words) {
  words_.reserve(words.size());
  for (auto& w : words) {
    if (contains(w)) throw Error("duplicate word in vocabulary: " + w);
    add(std::move(w));
  }
}

bool Vocabulary::add(std::string word) {
  const auto id = static_cast<WordId>(words_.size());
  auto [it, inserted] = index_.try_emplace(word, id);
  if (!inserted) return false;
  words_.push_back(std::move(word));
  return true;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingSpace::EmbeddingSpace(Vocabulary vocab, RowMatrixF matrix,
                               bool normalized)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)),
      normalized_(normalized) {
  if (static_cast<std::size_t>(matrix_.rows()) != vocab_.size())
    throw Error("embedding matrix has " + std::to_string(matrix_.rows()) +
                " rows for " + std::to_string(vocab_.size()) + " words");
  if (matrix_.cols() <= 0) throw Error("embedding dimension must be positive");
  if (normalized_) {
    for (std::size_t i = 0; i < size(); ++i) {
      const double n = norm(row(static_cast<WordId>(i)));
      if (std::abs(n - 1.0) > 1e-4)
        throw Error("row for '" + vocab_.word(static_cast<WordId>(i)) +
                    "' is not unit length");
    }
  }
}

std::optional<std::span<const float>> EmbeddingSpace::lookup(
    std::string_view word) const {
  auto id = vocab_.find(word);
  if (!id) return std::nullopt;
  return row(*id);
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

bool looks_numeric(std::string_view token) {
  float v;
  return parse_number(token, v);
}

EmbeddingSpace parse_stream(std::istream& in,
                            std::optional<std::size_t> max_words) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_spaces(line);
  std::size_t count = 0;
  int dim = 0;
  if (header.size() != 2 || !parse_number(header[0], count) ||
      !parse_number(header[1], dim) || dim <= 0)
    throw FormatError("malformed header, expected \"<count> <dim>\"", 1);

  std::size_t limit = count;
  if (max_words) limit = std::min(limit, *max_words);

  LoadStats stats;
  stats.declared_count = count;
  Vocabulary vocab;
  std::vector<float> values;
  values.reserve(limit * static_cast<std::size_t>(dim));
  std::size_t line_no = 1;

  while (vocab.size() < limit && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tokens = split_spaces(line);
    if (tokens.empty()) continue;
    const std::size_t expected = static_cast<std::size_t>(dim) + 1;
    if (tokens.size() < expected)
      throw FormatError(std::to_string(tokens.size() - 1) +
                            " values, expected " + std::to_string(dim),
                        line_no);
    if (tokens.size() > expected) {
      // Either a multi-token word or too many values.
      const std::size_t word_tokens = tokens.size() - dim;
      for (std::size_t t = 1; t < word_tokens; ++t) {
        if (looks_numeric(tokens[t]))
          throw FormatError(std::to_string(tokens.size() - 1) +
                                " values, expected " + std::to_string(dim),
                            line_no);
      }
      ++stats.rejected_words;
      continue;
    }
    const std::size_t before = values.size();
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      float v;
      if (!parse_number(tokens[t], v) || !std::isfinite(v))
        throw FormatError("bad value '" + std::string(tokens[t]) + "'",
                          line_no);
      values.push_back(v);
    }
    if (!vocab.add(std::string(tokens[0]))) {
      values.resize(before);
      ++stats.duplicates;
    }
  }

  RowMatrixF matrix(static_cast<Eigen::Index>(vocab.size()), dim);
  std::copy(values.begin(), values.end(), matrix.data());
  EmbeddingSpace space(std::move(vocab), std::move(matrix), false);
  space.stats = stats;
  return space;
}

}  // namespace

EmbeddingSpace load_text_embeddings(const std::filesystem::path& path,
                                    std::optional<std::size_t> max_words) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return parse_stream(in, max_words);
}

EmbeddingSpace parse_text_embeddings(std::string_view text,
                                     std::optional<std::size_t> max_words) {
  std::istringstream in{std::string(text)};
  return parse_stream(in, max_words);
}

std::string format_text_embeddings(const EmbeddingSpace& space) {
  std::string out;
  out += std::to_string(space.size()) + " " + std::to_string(space.dim()) +
         "\n";
  char buf[64];
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto id = static_cast<WordId>(i);
    out += space.vocab().word(id);
    for (float v : space.row(id)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      out += ' ';
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

void write_text_embeddings(const EmbeddingSpace& space,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << format_text_embeddings(space);
}

EmbeddingSpace l2_normalize(const EmbeddingSpace& space) {
  RowMatrixF m = space.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = norm(space.row(static_cast<WordId>(i)));
    if (n == 0.0)
      throw Error("zero vector for word " +
                  space.vocab().word(static_cast<WordId>(i)));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = static_cast<float>(m(i, j) / n);
  }
  EmbeddingSpace out(space.vocab(), std::move(m), true);
  out.stats = space.stats;
  return out;
}

EmbeddingSpace load_embeddings(const std::filesystem::path& path,
                               std::optional<std::size_t> max_words) {
  if (!std::filesystem::exists(path))
    throw Error("no such file: " + path.string());
  if (!is_container(path)) return load_text_embeddings(path, max_words);
  EmbeddingSpace space = read_embedding_cache(path);
  if (!max_words || *max_words >= space.size()) return space;
  const auto keep = static_cast<Eigen::Index>(*max_words);
  std::vector<std::string> words(space.vocab().words().begin(),
                                 space.vocab().words().begin() + keep);
  return EmbeddingSpace(Vocabulary(std::move(words)),
                        space.matrix().topRows(keep), space.normalized());
}

std::pair<EmbeddingSpace, EmbeddingSpace> intersect_vocab(
    const EmbeddingSpace& a, const EmbeddingSpace& b) {
  std::vector<WordId> ids_a, ids_b;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& w = a.vocab().word(static_cast<WordId>(i));
    if (auto j = b.vocab().find(w)) {
      ids_a.push_back(static_cast<WordId>(i));
      ids_b.push_back(*j);
    }
  }
  auto gather = [](const EmbeddingSpace& s, const std::vector<WordId>& ids) {
    RowMatrixF m(static_cast<Eigen::Index>(ids.size()), s.dim());
    Vocabulary v;
    for (std::size_t r = 0; r < ids.size(); ++r) {
      m.row(static_cast<Eigen::Index>(r)) = s.matrix().row(ids[r]);
      v.add(s.vocab().word(ids[r]));
    }
    return EmbeddingSpace(std::move(v), std::move(m), s.normalized());
  };
  return {gather(a, ids_a), gather(b, ids_b)};
}

}  // namespace lexalign
