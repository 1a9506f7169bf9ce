#include "lexalign/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace lexalign {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(scale > 0.0)) throw ConfigError("scale must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
}

AdapterState AdapterState::identity(int dim) {
  AdapterState s;
  s.weights = Eigen::MatrixXd::Identity(dim, dim);
  s.first_moment = Eigen::MatrixXd::Zero(dim, dim);
  s.second_moment = Eigen::MatrixXd::Zero(dim, dim);
  return s;
}

namespace {

// log(sum(exp(values))) with max subtraction.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& values) {
  const double m = values.maxCoeff();
  return m + std::log((values.array() - m).exp().sum());
}

Eigen::MatrixXd unit_rows(const Eigen::MatrixXd& m, Eigen::VectorXd* norms) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  if (norms) norms->resize(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n == 0.0) throw Error("mneg: zero vector in batch");
    out.row(i) = m.row(i) / n;
    if (norms) (*norms)(i) = n;
  }
  return out;
}

// Gradient through v = r / |r|: (g - (v.g) v) / |r|, row-wise.
Eigen::MatrixXd through_normalization(const Eigen::MatrixXd& grad_unit,
                                      const Eigen::MatrixXd& unit,
                                      const Eigen::VectorXd& norms) {
  Eigen::MatrixXd out(grad_unit.rows(), grad_unit.cols());
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const double radial = unit.row(i).dot(grad_unit.row(i));
    out.row(i) = (grad_unit.row(i) - radial * unit.row(i)) / norms(i);
  }
  return out;
}

LossGradient loss_and_gradient(const Eigen::MatrixXd& X,
                               const Eigen::MatrixXd& Y,
                               const std::vector<Eigen::MatrixXd>& Z,
                               const Eigen::MatrixXd& A, double c) {
  const Eigen::Index b = X.rows();
  Eigen::VectorXd nu, nt;
  const Eigen::MatrixXd U = unit_rows(X * A.transpose(), &nu);
  const Eigen::MatrixXd T = unit_rows(Y * A.transpose(), &nt);
  const Eigen::MatrixXd S = c * (U * T.transpose());

  LossGradient out;
  out.loss = -S.diagonal().sum();

  // In-batch softmax over j != i.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(b, b);
  if (b > 1) {
    for (Eigen::Index i = 0; i < b; ++i) {
      double m = -std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < b; ++j)
        if (j != i) m = std::max(m, S(i, j));
      double z = 0.0;
      for (Eigen::Index j = 0; j < b; ++j)
        if (j != i) z += std::exp(S(i, j) - m);
      for (Eigen::Index j = 0; j < b; ++j)
        if (j != i) P(i, j) = std::exp(S(i, j) - m) / z;
      out.loss += m + std::log(z);
    }
  }

  Eigen::MatrixXd grad_u = c * (P * T - T);
  Eigen::MatrixXd grad_t = c * (P.transpose() * U - U);
  Eigen::MatrixXd grad_a = Eigen::MatrixXd::Zero(A.rows(), A.cols());

  for (Eigen::Index i = 0; i < b; ++i) {
    const auto& zi = Z[static_cast<std::size_t>(i)];
    if (zi.rows() == 0) continue;
    Eigen::VectorXd nn;
    const Eigen::MatrixXd N = unit_rows(zi * A.transpose(), &nn);
    const Eigen::VectorXd s = c * (N * U.row(i).transpose());
    const double lse = log_sum_exp(s);
    out.loss += lse;
    const Eigen::VectorXd q = (s.array() - lse).exp();
    grad_u.row(i) += c * (q.transpose() * N);
    const Eigen::MatrixXd grad_n = c * (q * U.row(i));
    grad_a += through_normalization(grad_n, N, nn).transpose() * zi;
  }

  grad_a += through_normalization(grad_u, U, nu).transpose() * X;
  grad_a += through_normalization(grad_t, T, nt).transpose() * Y;
  out.gradient = std::move(grad_a);
  return out;
}

Eigen::MatrixXd gather(const EmbeddingSpace& space,
                       std::span<const WordId> ids) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(ids.size()), space.dim());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    const auto row = space.row(ids[r]);
    for (int j = 0; j < space.dim(); ++j)
      m(static_cast<Eigen::Index>(r), j) = row[j];
  }
  return m;
}

}  // namespace

double mneg_loss(const MnegBatch& batch, const SimilarityConfig& cfg) {
  cfg.validate();
  const Eigen::Index b = batch.src.rows();
  if (batch.tgt.rows() != b || batch.src.cols() != batch.tgt.cols())
    throw Error("mneg_loss: source and target batches disagree in shape");
  if (!batch.hard_negatives.empty() &&
      batch.hard_negatives.size() != static_cast<std::size_t>(b))
    throw Error("mneg_loss: need one hard-negative block per pair");

  const Eigen::MatrixXd U = unit_rows(batch.src, nullptr);
  const Eigen::MatrixXd T = unit_rows(batch.tgt, nullptr);
  const double c = cfg.scale;

  double loss = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) loss -= c * U.row(i).dot(T.row(i));

  if (b > 1) {
    Eigen::VectorXd s(b - 1);
    for (Eigen::Index i = 0; i < b; ++i) {
      Eigen::Index k = 0;
      for (Eigen::Index j = 0; j < b; ++j)
        if (j != i) s(k++) = c * U.row(i).dot(T.row(j));
      loss += log_sum_exp(s);
    }
  }

  for (std::size_t i = 0; i < batch.hard_negatives.size(); ++i) {
    const auto& neg = batch.hard_negatives[i];
    if (neg.rows() == 0) continue;
    if (neg.cols() != U.cols())
      throw Error("mneg_loss: hard negative dimension mismatch");
    const Eigen::MatrixXd N = unit_rows(neg, nullptr);
    const Eigen::VectorXd s =
        c * (N * U.row(static_cast<Eigen::Index>(i)).transpose());
    loss += log_sum_exp(s);
  }
  return loss;
}

LossGradient mneg_loss_and_gradient(const BatchIds& batch,
                                    const EmbeddingSpace& src_space,
                                    const EmbeddingSpace& tgt_space,
                                    const Eigen::MatrixXd& weights,
                                    const SimilarityConfig& cfg) {
  cfg.validate();
  if (batch.src.size() != batch.tgt.size() || batch.src.empty())
    throw Error("mneg: batch must hold at least one aligned pair");
  if (!batch.negatives.empty() && batch.negatives.size() != batch.src.size())
    throw Error("mneg: need one negative list per pair");
  if (src_space.dim() != tgt_space.dim() || weights.rows() != src_space.dim() ||
      weights.cols() != src_space.dim())
    throw Error("mneg: adapter shape does not match the spaces");

  const Eigen::MatrixXd X = gather(src_space, batch.src);
  const Eigen::MatrixXd Y = gather(tgt_space, batch.tgt);
  std::vector<Eigen::MatrixXd> Z(batch.src.size());
  for (std::size_t i = 0; i < batch.negatives.size(); ++i)
    Z[i] = gather(tgt_space, batch.negatives[i]);
  for (auto& z : Z)
    if (z.cols() == 0) z.resize(0, src_space.dim());
  return loss_and_gradient(X, Y, Z, weights, cfg.scale);
}

Eigen::MatrixXd mneg_gradient(const BatchIds& batch,
                              const EmbeddingSpace& src_space,
                              const EmbeddingSpace& tgt_space,
                              const AdapterState& adapter,
                              const SimilarityConfig& cfg) {
  return mneg_loss_and_gradient(batch, src_space, tgt_space, adapter.weights,
                                cfg)
      .gradient;
}

void adamw_step(AdapterState& state, const Eigen::MatrixXd& gradient,
                const TrainConfig& cfg) {
  state.step += 1;
  const double t = static_cast<double>(state.step);
  state.weights *= 1.0 - cfg.learning_rate * cfg.weight_decay;
  state.first_moment =
      cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * gradient;
  state.second_moment = cfg.beta2 * state.second_moment +
                        (1.0 - cfg.beta2) * gradient.cwiseProduct(gradient);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  state.weights.array() -=
      cfg.learning_rate * (state.first_moment.array() / bc1) /
      ((state.second_moment.array() / bc2).sqrt() + cfg.eps);
}

TrainResult train(const TranslationLexicon& lex,
                  const EmbeddingSpace& src_space,
                  const EmbeddingSpace& tgt_space,
                  const NegativeTable& negatives, const TrainConfig& cfg) {
  cfg.validate();
  if (lex.empty()) throw Error("train: empty lexicon");
  if (src_space.dim() != tgt_space.dim())
    throw Error("train: source and target dimensions differ");
  if (negatives.entries.size() != lex.size())
    throw Error("train: negative table has " +
                std::to_string(negatives.entries.size()) + " entries for " +
                std::to_string(lex.size()) + " pairs");
  for (std::size_t i = 0; i < lex.size(); ++i) {
    const auto& e = negatives.entries[i];
    const auto& p = lex.pairs()[i];
    if (src_space.vocab().find(p.src) != e.src ||
        tgt_space.vocab().find(p.tgt) != e.gold)
      throw Error("train: negative table does not line up with the lexicon "
                  "at pair " + std::to_string(i));
  }

  TrainResult result{AdapterState::identity(src_space.dim()), {}};
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(lex.size());
  const SimilarityConfig sim = cfg.similarity();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      BatchIds batch;
      for (std::size_t k = start; k < end; ++k) {
        const auto& e = negatives.entries[order[k]];
        batch.src.push_back(e.src);
        batch.tgt.push_back(e.gold);
        batch.negatives.push_back(e.negatives);
      }
      const LossGradient lg = mneg_loss_and_gradient(
          batch, src_space, tgt_space, result.adapter.weights, sim);
      adamw_step(result.adapter, lg.gradient, cfg);
      total += lg.loss;
      ++batches;
    }
    result.epoch_mean_loss.push_back(total / static_cast<double>(batches));
  }
  return result;
}

EmbeddingSpace adapt_space(const EmbeddingSpace& space,
                           const Eigen::MatrixXd& weights, unsigned threads) {
  if (weights.rows() != space.dim() || weights.cols() != space.dim())
    throw Error("adapt_space: adapter shape does not match the space");
  RowMatrixF out(static_cast<Eigen::Index>(space.size()), space.dim());
  parallel_for(space.size(), threads, [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd x(space.dim());
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = space.row(static_cast<WordId>(i));
      for (int j = 0; j < space.dim(); ++j) x(j) = row[j];
      const Eigen::VectorXd r = weights * x;
      const double n = r.norm();
      if (n == 0.0)
        throw Error("adapt_space: zero vector for word " +
                    space.vocab().word(static_cast<WordId>(i)));
      out.row(static_cast<Eigen::Index>(i)) = (r / n).transpose().cast<float>();
    }
  });
  return EmbeddingSpace(space.vocab(), std::move(out), true);
}

void write_loss_log(const std::vector<double>& losses,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,mean_loss\n";
  char buf[64];
  for (std::size_t e = 0; e < losses.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%.17g", losses[e]);
    out << (e + 1) << ',' << buf << '\n';
  }
}

}  // namespace lexalign
