#include "lexalign/retrieve.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace lexalign {

namespace {

// Shared by scaled_cosine and CosineIndex so both produce identical bits.
inline double scaled(double dot_uv, double norm_u, double norm_v, double c) {
  return c * (dot_uv / (norm_u * norm_v));
}

// Orders by score descending, then id ascending.
inline bool better(const Neighbor& a, const Neighbor& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

}  // namespace

void SimilarityConfig::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw ConfigError("similarity scale must be positive");
}

double scaled_cosine(std::span<const float> u, std::span<const float> v,
                     const SimilarityConfig& cfg) {
  cfg.validate();
  if (u.size() != v.size())
    throw Error("scaled_cosine: dimension mismatch");
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) throw Error("scaled_cosine: zero vector");
  return scaled(dot(u, v), nu, nv, cfg.scale);
}

CosineIndex::CosineIndex(const EmbeddingSpace& space, SimilarityConfig cfg)
    : space_(&space), cfg_(cfg) {
  cfg_.validate();
  norms_.resize(space.size());
  for (std::size_t i = 0; i < space.size(); ++i)
    norms_[i] = norm(space.row(static_cast<WordId>(i)));
}

std::vector<Neighbor> CosineIndex::topk(std::span<const float> query,
                                        std::size_t k,
                                        std::span<const WordId> exclude) const {
  if (k == 0) throw Error("topk: k must be positive");
  if (static_cast<int>(query.size()) != space_->dim())
    throw Error("topk: query dimension mismatch");
  const double nq = norm(query);
  if (nq == 0.0) throw Error("topk: zero query vector");

  std::vector<WordId> skip(exclude.begin(), exclude.end());
  std::sort(skip.begin(), skip.end());

  // Min-heap on `better`: the front is the weakest kept candidate.
  std::vector<Neighbor> heap;
  heap.reserve(k + 1);
  for (std::size_t i = 0; i < norms_.size(); ++i) {
    if (norms_[i] == 0.0) continue;
    const auto id = static_cast<WordId>(i);
    if (!skip.empty() && std::binary_search(skip.begin(), skip.end(), id))
      continue;
    const Neighbor cand{id, scaled(dot(query, space_->row(id)), nq, norms_[i],
                                   cfg_.scale)};
    if (heap.size() < k) {
      heap.push_back(cand);
      std::push_heap(heap.begin(), heap.end(), better);
    } else if (better(cand, heap.front())) {
      std::pop_heap(heap.begin(), heap.end(), better);
      heap.back() = cand;
      std::push_heap(heap.begin(), heap.end(), better);
    }
  }
  std::sort(heap.begin(), heap.end(), better);
  return heap;
}

std::vector<Neighbor> topk(std::span<const float> query,
                           const EmbeddingSpace& space, std::size_t k,
                           std::span<const WordId> exclude,
                           const SimilarityConfig& cfg) {
  return CosineIndex(space, cfg).topk(query, k, exclude);
}

NegativeTable mine_hard_negatives(const TranslationLexicon& lex,
                                  const EmbeddingSpace& src_space,
                                  const EmbeddingSpace& tgt_space,
                                  std::size_t n_negatives,
                                  const SimilarityConfig& cfg,
                                  unsigned threads) {
  if (src_space.dim() != tgt_space.dim())
    throw Error("mine_hard_negatives: source and target dimensions differ");
  NegativeTable table;
  table.n_negatives = n_negatives;
  table.entries.resize(lex.size());
  for (std::size_t i = 0; i < lex.size(); ++i) {
    const auto& p = lex.pairs()[i];
    auto s = src_space.vocab().find(p.src);
    auto g = tgt_space.vocab().find(p.tgt);
    if (!s || !g)
      throw Error("mine_hard_negatives: pair (" + p.src + ", " + p.tgt +
                  ") is not in vocabulary; filter the lexicon first");
    table.entries[i].src = *s;
    table.entries[i].gold = *g;
  }
  if (n_negatives == 0) return table;

  const CosineIndex index(tgt_space, cfg);
  parallel_for(lex.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& e = table.entries[i];
      const WordId gold[] = {e.gold};
      for (const auto& nb :
           index.topk(src_space.row(e.src), n_negatives, gold))
        e.negatives.push_back(nb.id);
    }
  });
  return table;
}

void write_negative_table(const NegativeTable& table,
                          const EmbeddingSpace& src_space,
                          const EmbeddingSpace& tgt_space,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "# n_negatives=" << table.n_negatives << '\n';
  for (const auto& e : table.entries) {
    out << src_space.vocab().word(e.src) << '\t'
        << tgt_space.vocab().word(e.gold) << '\t';
    for (std::size_t k = 0; k < e.negatives.size(); ++k) {
      if (k) out << ',';
      out << tgt_space.vocab().word(e.negatives[k]);
    }
    out << '\n';
  }
}

NegativeTable read_negative_table(const std::filesystem::path& path,
                                  const EmbeddingSpace& src_space,
                                  const EmbeddingSpace& tgt_space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  NegativeTable table;
  std::string line;
  std::size_t line_no = 0;
  const std::string marker = "# n_negatives=";
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind(marker, 0) == 0)
        table.n_negatives = std::stoul(line.substr(marker.size()));
      continue;
    }
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() == 2) cols.emplace_back();
    if (cols.size() != 3)
      throw FormatError("expected 3 tab-separated columns", line_no);
    auto s = src_space.vocab().find(cols[0]);
    auto g = tgt_space.vocab().find(cols[1]);
    if (!s || !g) throw FormatError("pair not in vocabulary", line_no);
    NegativeEntry e{*s, *g, {}};
    std::stringstream negs(cols[2]);
    std::string w;
    while (std::getline(negs, w, ',')) {
      if (w.empty()) continue;
      auto id = tgt_space.vocab().find(w);
      if (!id) throw FormatError("negative '" + w + "' not in vocabulary",
                                 line_no);
      e.negatives.push_back(*id);
    }
    table.entries.push_back(std::move(e));
  }
  return table;
}

}  // namespace lexalign
