#pragma once

#include <cstdint>

#include "lexalign/embed_store.hpp"
#include "lexalign/lexicon.hpp"

namespace lexalign {

enum class MapKind : std::uint8_t { orthonormal_rows, general };

/// A d1 x d2 map applied to row vectors: y = x * matrix.
struct LinearMap {
  Eigen::MatrixXd matrix;
  MapKind kind = MapKind::general;
  bool degenerate = false;

  int src_dim() const { return static_cast<int>(matrix.rows()); }
  int dst_dim() const { return static_cast<int>(matrix.cols()); }
};

/// Row-orthonormal W minimizing ||XW - Y||_F, computed as U V^T from the
/// thin SVD of X^T Y. Requires X.rows() == Y.rows() >= 1 and
/// X.cols() <= Y.cols(). Rank-deficient X^T Y yields a valid minimizer with
/// `degenerate` set.
LinearMap solve_procrustes(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// Maps every row through `map`. The output is not normalized.
EmbeddingSpace apply_map(const EmbeddingSpace& space, const LinearMap& map,
                         unsigned threads = 1);

struct ClweResult {
  EmbeddingSpace src;  // mapped and re-normalized
  EmbeddingSpace tgt;  // re-normalized
  LinearMap map;
};

/// Square orthogonal Procrustes on the seed pairs. Both spaces must be
/// normalized and of equal dimension; `train` must be filtered to vocab.
ClweResult induce_clwe(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                       const TranslationLexicon& train, unsigned threads = 1);

/// One shared static -> encoder map for a language pair, fitted on the
/// decoupled anchors (clwe(w), f(w)) of both sides of the dictionary.
LinearMap fit_static_to_encoder(const EmbeddingSpace& static_src,
                                const EmbeddingSpace& static_tgt,
                                const EmbeddingSpace& enc_src,
                                const EmbeddingSpace& enc_tgt,
                                const TranslationLexicon& lex);

struct InterpolationConfig {
  double lambda = 0.3;
  void validate() const;
};

/// (1 - lambda) * unit(static_vec * W) + lambda * unit(enc_vec). The result
/// is deliberately left unnormalized.
Eigen::VectorXd interpolate(std::span<const float> static_vec,
                            std::span<const float> enc_vec,
                            const LinearMap& map,
                            const InterpolationConfig& cfg);

/// Row-wise interpolate over two spaces that share an identical vocabulary.
EmbeddingSpace interpolate_space(const EmbeddingSpace& static_space,
                                 const EmbeddingSpace& encoder_space,
                                 const LinearMap& map,
                                 const InterpolationConfig& cfg,
                                 unsigned threads = 1);

}  // namespace lexalign
