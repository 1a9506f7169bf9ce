#pragma once

// Brute-force reference computations. These deliberately avoid the library's
// search, loss and ranking code paths.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lexalign/embed_store.hpp"
#include "lexalign/retrieve.hpp"

namespace oracle {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const Vec& a, const Vec& b) {
  return dot(a, b) / std::sqrt(dot(a, a)) / std::sqrt(dot(b, b));
}

// Scores every target through the public scaled_cosine, then fully sorts.
inline std::vector<lexalign::Neighbor> full_sort_topk(
    std::span<const float> query, const lexalign::EmbeddingSpace& space,
    std::size_t k, const std::vector<lexalign::WordId>& exclude,
    const lexalign::SimilarityConfig& cfg) {
  std::vector<lexalign::Neighbor> all;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto id = static_cast<lexalign::WordId>(i);
    if (std::find(exclude.begin(), exclude.end(), id) != exclude.end())
      continue;
    if (lexalign::norm(space.row(id)) == 0.0) continue;
    all.push_back({id, lexalign::scaled_cosine(query, space.row(id), cfg)});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

// The contrastive loss by direct summation: no max-subtraction, no matrices.
inline double mneg_loss(const std::vector<Vec>& src, const std::vector<Vec>& tgt,
                        const std::vector<std::vector<Vec>>& negs, double c) {
  const std::size_t b = src.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) loss -= c * cosine(src[i], tgt[i]);
  for (std::size_t i = 0; i < b; ++i) {
    double z = 0.0;
    bool any = false;
    for (std::size_t j = 0; j < b; ++j) {
      if (j == i) continue;
      z += std::exp(c * cosine(src[i], tgt[j]));
      any = true;
    }
    if (any) loss += std::log(z);
  }
  for (std::size_t i = 0; i < negs.size(); ++i) {
    if (negs[i].empty()) continue;
    double z = 0.0;
    for (const auto& n : negs[i]) z += std::exp(c * cosine(src[i], n));
    loss += std::log(z);
  }
  return loss;
}

inline Vec apply(const Eigen::MatrixXd& a, const Vec& x) {
  Vec out(a.rows(), 0.0);
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c) out[r] += a(r, c) * x[c];
  return out;
}

// Loss as a function of the adapter, vectors adapted as A x.
inline double adapted_loss(const Eigen::MatrixXd& a, const std::vector<Vec>& src,
                           const std::vector<Vec>& tgt,
                           const std::vector<std::vector<Vec>>& negs,
                           double c) {
  std::vector<Vec> s, t;
  std::vector<std::vector<Vec>> n(negs.size());
  for (const auto& x : src) s.push_back(apply(a, x));
  for (const auto& x : tgt) t.push_back(apply(a, x));
  for (std::size_t i = 0; i < negs.size(); ++i)
    for (const auto& x : negs[i]) n[i].push_back(apply(a, x));
  return mneg_loss(s, t, n, c);
}

inline Eigen::MatrixXd central_difference(
    const Eigen::MatrixXd& a, const std::vector<Vec>& src,
    const std::vector<Vec>& tgt, const std::vector<std::vector<Vec>>& negs,
    double c, double h = 1e-5) {
  Eigen::MatrixXd g(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index col = 0; col < a.cols(); ++col) {
      Eigen::MatrixXd plus = a, minus = a;
      plus(r, col) += h;
      minus(r, col) -= h;
      g(r, col) = (adapted_loss(plus, src, tgt, negs, c) -
                   adapted_loss(minus, src, tgt, negs, c)) /
                  (2.0 * h);
    }
  }
  return g;
}

// Average-tie ranks by counting, O(n^2).
inline Vec counting_ranks(const Vec& v) {
  Vec r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) less += 1;
      if (w == v[i]) equal += 1;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline std::optional<double> spearman(const Vec& x, const Vec& y) {
  const Vec rx = counting_ranks(x), ry = counting_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  if (dx == 0 || dy == 0) return std::nullopt;
  return num / std::sqrt(dx * dy);
}

}  // namespace oracle
