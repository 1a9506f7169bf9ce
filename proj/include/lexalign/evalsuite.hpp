#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lexalign/embed_store.hpp"
#include "lexalign/lexicon.hpp"
#include "lexalign/retrieve.hpp"

namespace lexalign {

struct BliItem {
  std::string src;
  std::vector<std::string> gold;
  std::vector<std::string> predictions;  // top max(ks)
  std::size_t gold_rank = 0;             // 1-based; 0 = not retrieved
  bool in_vocab = true;
};

struct XlsimItem {
  std::string src;
  std::string tgt;
  double gold = 0.0;
  double similarity = 0.0;
};

struct EvalReport {
  std::string task;  // "bli" or "xlsim"
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<BliItem> bli_items;
  std::vector<XlsimItem> xlsim_items;
  std::size_t skipped_oov = 0;

  /// Throws Error when the metric is absent.
  double metric(const std::string& name) const;
};

/// Precision@k for each k and MRR over unique source words, each credited
/// once if any gold target is retrieved from the full target vocabulary.
/// OOV source words count as wrong ("P@k"); "P@k_covered" restricts to
/// source words that could be queried.
EvalReport bli_evaluate(const EmbeddingSpace& src_space,
                        const EmbeddingSpace& tgt_space,
                        const TranslationLexicon& test,
                        const std::vector<std::size_t>& ks,
                        const SimilarityConfig& cfg, unsigned threads = 1);

/// Pearson correlation of average-tie ranks; nullopt when either side has
/// zero rank variance.
std::optional<double> spearman(std::span<const double> xs,
                               std::span<const double> ys);

/// Spearman between gold scores and (unscaled) cosine similarities.
EvalReport xlsim_evaluate(const EmbeddingSpace& src_space,
                          const EmbeddingSpace& tgt_space,
                          const ScoredWordPairs& gold);

/// "metric\tvalue" lines.
std::string format_report(const EvalReport& report);
std::string format_report_items(const EvalReport& report);
void write_report(const EvalReport& report, const std::filesystem::path& path);
void write_report_items(const EvalReport& report,
                        const std::filesystem::path& path);

}  // namespace lexalign
