#include "lexalign/align.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace lexalign {

LinearMap solve_procrustes(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() < 1) throw Error("procrustes: need at least one observation");
  if (X.rows() != Y.rows())
    throw Error("procrustes: X has " + std::to_string(X.rows()) +
                " rows but Y has " + std::to_string(Y.rows()));
  if (X.cols() > Y.cols())
    throw Error("procrustes: source dimension exceeds target dimension");

  const Eigen::MatrixXd cross = X.transpose() * Y;  // d1 x d2
  Eigen::BDCSVD<Eigen::MatrixXd> svd(cross,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  LinearMap map;
  map.kind = MapKind::orthonormal_rows;
  map.matrix = svd.matrixU() * svd.matrixV().transpose();

  const auto& sv = svd.singularValues();
  const double threshold = static_cast<double>(std::max(cross.rows(), cross.cols())) *
                           std::numeric_limits<double>::epsilon() *
                           (sv.size() > 0 ? sv(0) : 0.0);
  map.degenerate = sv.size() == 0 || sv(0) == 0.0 ||
                   sv(sv.size() - 1) <= threshold;
  return map;
}

EmbeddingSpace apply_map(const EmbeddingSpace& space, const LinearMap& map,
                         unsigned threads) {
  if (space.dim() != map.src_dim())
    throw Error("apply_map: space dimension " + std::to_string(space.dim()) +
                " does not match map source dimension " +
                std::to_string(map.src_dim()));
  RowMatrixF out(static_cast<Eigen::Index>(space.size()), map.dst_dim());
  parallel_for(space.size(), threads, [&](std::size_t begin, std::size_t end) {
    Eigen::RowVectorXd x(space.dim());
    for (std::size_t i = begin; i < end; ++i) {
      const auto r = space.row(static_cast<WordId>(i));
      for (int j = 0; j < space.dim(); ++j) x(j) = r[j];
      const Eigen::RowVectorXd y = x * map.matrix;
      out.row(static_cast<Eigen::Index>(i)) = y.cast<float>();
    }
  });
  return EmbeddingSpace(space.vocab(), std::move(out), false);
}

namespace {

Eigen::RowVectorXd to_double(std::span<const float> v) {
  Eigen::RowVectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace

ClweResult induce_clwe(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                       const TranslationLexicon& train, unsigned threads) {
  if (train.empty()) throw Error("induce_clwe: empty training lexicon");
  if (src.dim() != tgt.dim())
    throw Error("induce_clwe: source and target dimensions differ");
  if (!src.normalized() || !tgt.normalized())
    throw Error("induce_clwe: spaces must be l2-normalized");

  const auto n = static_cast<Eigen::Index>(train.size());
  Eigen::MatrixXd X(n, src.dim()), Y(n, tgt.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = train.pairs()[static_cast<std::size_t>(i)];
    auto xs = src.lookup(p.src);
    auto ys = tgt.lookup(p.tgt);
    if (!xs || !ys)
      throw Error("induce_clwe: pair (" + p.src + ", " + p.tgt +
                  ") is not in vocabulary; filter the lexicon first");
    X.row(i) = to_double(*xs);
    Y.row(i) = to_double(*ys);
  }
  LinearMap map = solve_procrustes(X, Y);
  EmbeddingSpace mapped = l2_normalize(apply_map(src, map, threads));
  return {std::move(mapped), l2_normalize(tgt), std::move(map)};
}

LinearMap fit_static_to_encoder(const EmbeddingSpace& static_src,
                                const EmbeddingSpace& static_tgt,
                                const EmbeddingSpace& enc_src,
                                const EmbeddingSpace& enc_tgt,
                                const TranslationLexicon& lex) {
  if (static_src.dim() != static_tgt.dim() || enc_src.dim() != enc_tgt.dim())
    throw Error("fit_static_to_encoder: language dimensions differ");
  const auto anchors = decouple_pairs(lex);
  const int d1 = static_src.dim();
  if (anchors.size() < static_cast<std::size_t>(d1))
    throw Error("underdetermined mapping: " + std::to_string(anchors.size()) +
                " anchors for source dimension " + std::to_string(d1));

  const auto n = static_cast<Eigen::Index>(anchors.size());
  Eigen::MatrixXd X(n, d1), Y(n, enc_src.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = anchors[static_cast<std::size_t>(i)];
    const bool src_side = a.side == Side::src;
    auto xs = (src_side ? static_src : static_tgt).lookup(a.word);
    auto ys = (src_side ? enc_src : enc_tgt).lookup(a.word);
    if (!xs || !ys)
      throw Error("fit_static_to_encoder: anchor '" + a.word +
                  "' missing from a space; filter the lexicon first");
    const Eigen::RowVectorXd x = to_double(*xs);
    const Eigen::RowVectorXd y = to_double(*ys);
    if (x.norm() == 0.0 || y.norm() == 0.0)
      throw Error("fit_static_to_encoder: zero vector for '" + a.word + "'");
    X.row(i) = x / x.norm();
    Y.row(i) = y / y.norm();
  }
  return solve_procrustes(X, Y);
}

void InterpolationConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ConfigError("lambda must lie in [0, 1], got " +
                      std::to_string(lambda));
}

Eigen::VectorXd interpolate(std::span<const float> static_vec,
                            std::span<const float> enc_vec,
                            const LinearMap& map,
                            const InterpolationConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(static_vec.size()) != map.src_dim() ||
      static_cast<int>(enc_vec.size()) != map.dst_dim())
    throw Error("interpolate: vector dimensions do not match the map");
  const Eigen::RowVectorXd mapped = to_double(static_vec) * map.matrix;
  const Eigen::RowVectorXd enc = to_double(enc_vec);
  const double ms = mapped.norm();
  const double me = enc.norm();
  if (ms == 0.0) throw Error("interpolate: static vector maps to zero");
  if (me == 0.0) throw Error("interpolate: zero encoder vector");
  return ((1.0 - cfg.lambda) * (mapped / ms) + cfg.lambda * (enc / me))
      .transpose();
}

EmbeddingSpace interpolate_space(const EmbeddingSpace& static_space,
                                 const EmbeddingSpace& encoder_space,
                                 const LinearMap& map,
                                 const InterpolationConfig& cfg,
                                 unsigned threads) {
  cfg.validate();
  const auto& a = static_space.vocab().words();
  const auto& b = encoder_space.vocab().words();
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    if (a[i] != b[i])
      throw Error("interpolate_space: vocabularies diverge at position " +
                  std::to_string(i) + " ('" + a[i] + "' vs '" + b[i] + "')");
  }
  if (a.size() != b.size())
    throw Error("interpolate_space: vocabularies differ in size (" +
                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                ")");

  RowMatrixF out(static_cast<Eigen::Index>(a.size()), map.dst_dim());
  parallel_for(a.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto id = static_cast<WordId>(i);
      const Eigen::VectorXd v = interpolate(static_space.row(id),
                                            encoder_space.row(id), map, cfg);
      out.row(static_cast<Eigen::Index>(i)) = v.transpose().cast<float>();
    }
  });
  return EmbeddingSpace(static_space.vocab(), std::move(out), false);
}

}  // namespace lexalign
