#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lexalign/embed_store.hpp"
#include "lexalign/lexicon.hpp"
#include "lexalign/retrieve.hpp"

namespace lexalign {

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t n_negatives = 10;
  double scale = 20.0;
  std::size_t epochs = 5;
  double learning_rate = 2e-5;
  double weight_decay = 0.01;
  std::uint64_t seed = 0;

  // AdamW moment constants.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
  SimilarityConfig similarity() const { return {scale}; }
};

/// Trainable square map shared by both languages. The adapted vector of a
/// word with base row x is unit(A x).
struct AdapterState {
  Eigen::MatrixXd weights;
  Eigen::MatrixXd first_moment;
  Eigen::MatrixXd second_moment;
  std::uint64_t step = 0;

  static AdapterState identity(int dim);
  int dim() const { return static_cast<int>(weights.rows()); }
};

/// Explicit vectors for one batch, one per row. `hard_negatives[i]` holds
/// the negatives of pair i (possibly zero rows).
struct MnegBatch {
  Eigen::MatrixXd src;
  Eigen::MatrixXd tgt;
  std::vector<Eigen::MatrixXd> hard_negatives;
};

/// Multiple-negatives ranking loss summed over the batch:
///   - sum_i S(w_i, v_i)
///   + sum_i log sum_{j != i} exp S(w_i, v_j)
///   + sum_i log sum_k exp S(w_i, n_{k,i})
/// with S = C * cos. Empty inner sums contribute nothing.
double mneg_loss(const MnegBatch& batch, const SimilarityConfig& cfg);

/// Word ids for one batch; `negatives[i]` are target-space ids.
struct BatchIds {
  std::vector<WordId> src;
  std::vector<WordId> tgt;
  std::vector<std::vector<WordId>> negatives;
};

struct LossGradient {
  double loss = 0.0;
  Eigen::MatrixXd gradient;  // dL/dA
};

/// Loss of the adapted batch and its exact gradient with respect to the
/// adapter weights.
LossGradient mneg_loss_and_gradient(const BatchIds& batch,
                                    const EmbeddingSpace& src_space,
                                    const EmbeddingSpace& tgt_space,
                                    const Eigen::MatrixXd& weights,
                                    const SimilarityConfig& cfg);

Eigen::MatrixXd mneg_gradient(const BatchIds& batch,
                              const EmbeddingSpace& src_space,
                              const EmbeddingSpace& tgt_space,
                              const AdapterState& adapter,
                              const SimilarityConfig& cfg);

/// One decoupled-weight-decay Adam update.
void adamw_step(AdapterState& state, const Eigen::MatrixXd& gradient,
                const TrainConfig& cfg);

struct TrainResult {
  AdapterState adapter;
  std::vector<double> epoch_mean_loss;  // mean of per-batch loss sums
};

/// Seeded per-epoch shuffling, batches of cfg.batch_size (short final batch
/// kept), one AdamW step per batch. `negatives` must have been mined on the
/// same (pre-training) spaces and line up with `lex`.
TrainResult train(const TranslationLexicon& lex,
                  const EmbeddingSpace& src_space,
                  const EmbeddingSpace& tgt_space,
                  const NegativeTable& negatives, const TrainConfig& cfg);

/// Rows unit(A x); the result is normalized.
EmbeddingSpace adapt_space(const EmbeddingSpace& space,
                           const Eigen::MatrixXd& weights,
                           unsigned threads = 1);

/// CSV "epoch,mean_loss".
void write_loss_log(const std::vector<double>& losses,
                    const std::filesystem::path& path);

}  // namespace lexalign
