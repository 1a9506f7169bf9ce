#include "lexalign/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

namespace lexalign {

double EvalReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  throw Error("report has no metric '" + name + "'");
}

EvalReport bli_evaluate(const EmbeddingSpace& src_space,
                        const EmbeddingSpace& tgt_space,
                        const TranslationLexicon& test,
                        const std::vector<std::size_t>& ks_in,
                        const SimilarityConfig& cfg, unsigned threads) {
  if (test.empty()) throw Error("bli_evaluate: empty test set");
  if (src_space.dim() != tgt_space.dim())
    throw Error("bli_evaluate: source and target dimensions differ");
  std::vector<std::size_t> ks = ks_in;
  if (ks.empty()) ks = {1};
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() == 0) throw Error("bli_evaluate: k must be positive");
  const std::size_t max_k = ks.back();

  // Group gold targets per source word, first-occurrence order.
  EvalReport report;
  report.task = "bli";
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<WordId>> gold_ids;
  for (const auto& p : test.pairs()) {
    auto [it, fresh] = slot.try_emplace(p.src, report.bli_items.size());
    if (fresh) {
      report.bli_items.push_back({p.src, {}, {}, 0, true});
      gold_ids.emplace_back();
    }
    auto& item = report.bli_items[it->second];
    item.gold.push_back(p.tgt);
    if (auto id = tgt_space.vocab().find(p.tgt))
      gold_ids[it->second].push_back(*id);
  }

  const CosineIndex index(tgt_space, cfg);
  auto& items = report.bli_items;
  parallel_for(items.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& item = items[i];
      auto query = src_space.lookup(item.src);
      if (!query) {
        item.in_vocab = false;
        continue;
      }
      const auto hits = index.topk(*query, max_k);
      const auto& gold = gold_ids[i];
      for (std::size_t r = 0; r < hits.size(); ++r) {
        item.predictions.push_back(tgt_space.vocab().word(hits[r].id));
        if (item.gold_rank == 0 &&
            std::find(gold.begin(), gold.end(), hits[r].id) != gold.end())
          item.gold_rank = r + 1;
      }
    }
  });

  std::size_t covered = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!items[i].in_vocab)
      ++report.skipped_oov;
    else if (!gold_ids[i].empty())
      ++covered;
  }

  const auto n = static_cast<double>(items.size());
  std::vector<double> hits_at(ks.size(), 0.0);
  double rr = 0.0;
  for (const auto& item : items) {
    if (item.gold_rank == 0) continue;
    rr += 1.0 / static_cast<double>(item.gold_rank);
    for (std::size_t j = 0; j < ks.size(); ++j)
      if (item.gold_rank <= ks[j]) hits_at[j] += 1.0;
  }
  for (std::size_t j = 0; j < ks.size(); ++j)
    report.metrics.emplace_back("P@" + std::to_string(ks[j]), hits_at[j] / n);
  report.metrics.emplace_back("MRR", rr / n);
  const double nc = covered ? static_cast<double>(covered) : 1.0;
  for (std::size_t j = 0; j < ks.size(); ++j)
    report.metrics.emplace_back("P@" + std::to_string(ks[j]) + "_covered",
                                covered ? hits_at[j] / nc : 0.0);
  report.metrics.emplace_back("MRR_covered", covered ? rr / nc : 0.0);
  report.metrics.emplace_back("n_queries", n);
  report.metrics.emplace_back("n_covered", static_cast<double>(covered));
  report.metrics.emplace_back("skipped_oov",
                              static_cast<double>(report.skipped_oov));
  return report;
}

namespace {

std::vector<double> fractional_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    // Positions i..j (0-based) share the average 1-based rank.
    const double avg = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> xs,
                               std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw Error("spearman: inputs differ in length");
  if (xs.size() < 2) throw Error("spearman: need at least two observations");
  const auto rx = fractional_ranks(xs);
  const auto ry = fractional_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

EvalReport xlsim_evaluate(const EmbeddingSpace& src_space,
                          const EmbeddingSpace& tgt_space,
                          const ScoredWordPairs& gold) {
  EvalReport report;
  report.task = "xlsim";
  const SimilarityConfig unscaled{1.0};
  std::vector<double> golds, sims;
  for (const auto& t : gold.triples) {
    auto u = src_space.lookup(t.src);
    auto v = tgt_space.lookup(t.tgt);
    if (!u || !v) {
      ++report.skipped_oov;
      continue;
    }
    const double sim = scaled_cosine(*u, *v, unscaled);
    report.xlsim_items.push_back({t.src, t.tgt, t.score, sim});
    golds.push_back(t.score);
    sims.push_back(sim);
  }
  if (golds.size() < 2)
    throw Error("xlsim_evaluate: fewer than two scorable pairs");
  const auto rho = spearman(sims, golds);
  report.metrics.emplace_back("spearman", rho ? *rho : std::nan(""));
  report.metrics.emplace_back("n_pairs", static_cast<double>(golds.size()));
  report.metrics.emplace_back("skipped_oov",
                              static_cast<double>(report.skipped_oov));
  return report;
}

std::string format_report(const EvalReport& report) {
  std::string out = "task\t" + report.task + "\n";
  for (const auto& [name, value] : report.metrics)
    out += name + "\t" + format_number(value) + "\n";
  return out;
}

std::string format_report_items(const EvalReport& report) {
  auto join = [](const std::vector<std::string>& words) {
    std::string s;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) s += ',';
      s += words[i];
    }
    return s;
  };
  std::string out;
  if (report.task == "bli") {
    out = "src\tgold\tpredictions\tgold_rank\tin_vocab\n";
    for (const auto& it : report.bli_items)
      out += it.src + "\t" + join(it.gold) + "\t" + join(it.predictions) +
             "\t" + std::to_string(it.gold_rank) + "\t" +
             (it.in_vocab ? "1" : "0") + "\n";
  } else {
    out = "src\ttgt\tgold\tsimilarity\n";
    for (const auto& it : report.xlsim_items)
      out += it.src + "\t" + it.tgt + "\t" + format_number(it.gold) + "\t" +
             format_number(it.similarity) + "\n";
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  write_text(path, format_report(report));
}

void write_report_items(const EvalReport& report,
                        const std::filesystem::path& path) {
  write_text(path, format_report_items(report));
}

}  // namespace lexalign
