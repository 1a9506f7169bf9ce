#include <doctest.h>

#include <random>
#include <set>

#include "lexalign/retrieve.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace lexalign;

namespace {

EmbeddingSpace toy() {
  return parse_text_embeddings("3 2\nt0 1 0\nt1 0 1\nt2 0.6 0.8\n");
}

}  // namespace

TEST_CASE("scaled_cosine examples") {
  const SimilarityConfig c{20.0};
  const std::vector<float> e1{1, 0}, e2{0, 1}, v{0.6f, 0.8f}, z{0, 0};
  CHECK(scaled_cosine(e1, e1, c) == 20.0);
  CHECK(scaled_cosine(e1, e2, c) == 0.0);
  CHECK(scaled_cosine(e1, v, c) == doctest::Approx(12.0).epsilon(1e-7));
  CHECK_THROWS_AS(scaled_cosine(e1, z, c), Error);
  const std::vector<float> three{1, 0, 0};
  CHECK_THROWS_AS(scaled_cosine(e1, three, c), Error);
  CHECK_THROWS_AS((SimilarityConfig{0.0}.validate()), Error);
}

TEST_CASE("scaled_cosine is invariant to positive rescaling") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> a(0.01, 100.0);
  for (int t = 0; t < 200; ++t) {
    const auto g = fixture::gaussian(2, 16, rng);
    std::vector<float> u(16), v(16), su(16);
    const double s = a(rng);
    for (int j = 0; j < 16; ++j) {
      u[j] = float(g(0, j));
      v[j] = float(g(1, j));
      su[j] = float(g(0, j) * s);
    }
    CHECK(std::abs(scaled_cosine(u, v, {}) - scaled_cosine(su, v, {})) < 1e-5);
  }
}

TEST_CASE("topk examples") {
  auto s = toy();
  const std::vector<float> q{1, 0};
  auto r = topk(q, s, 2, {}, {});
  REQUIRE(r.size() == 2);
  CHECK(r[0].id == 0);
  CHECK(r[0].score == 20.0);
  CHECK(r[1].id == 2);
  CHECK(r[1].score == doctest::Approx(12.0));

  const std::vector<WordId> ex{0};
  auto e = topk(q, s, 2, ex, {});
  REQUIRE(e.size() == 2);
  CHECK(e[0].id == 2);
  CHECK(e[1].id == 1);
  CHECK(e[1].score == 0.0);

  CHECK(topk(q, s, 10, {}, {}).size() == 3);
  const std::vector<float> z{0, 0};
  CHECK_THROWS_AS(topk(z, s, 1, {}, {}), Error);
  CHECK_THROWS_AS(topk(q, s, 0, {}, {}), Error);
}

TEST_CASE("topk breaks ties by lower id and skips zero rows") {
  auto s = parse_text_embeddings("4 2\na 0 1\nz 0 0\nb 0 2\nc 1 0\n");
  const std::vector<float> q{0, 1};
  auto r = topk(q, s, 4, {}, {});
  REQUIRE(r.size() == 3);
  CHECK(r[0].id == 0);
  CHECK(r[1].id == 2);
  CHECK(r[0].score == r[1].score);
  CHECK(r[2].id == 3);
}

TEST_CASE("topk matches the full-sort oracle") {
  std::mt19937_64 rng(61);
  auto s = fixture::make_space("w", fixture::gaussian(1000, 64, rng), false);
  CosineIndex index(s, {});
  for (int t = 0; t < 30; ++t) {
    const auto g = fixture::gaussian(1, 64, rng);
    std::vector<float> q(64);
    for (int j = 0; j < 64; ++j) q[j] = float(g(0, j));
    std::vector<WordId> ex;
    if (t % 2) ex = {3, 17, 400};
    for (std::size_t k : {1, 5, 10, 1000}) {
      auto got = index.topk(q, k, ex);
      auto want = oracle::full_sort_topk(q, s, k, ex, {});
      CHECK(got == want);
      for (std::size_t i = 1; i < got.size(); ++i)
        CHECK(got[i - 1].score >= got[i].score);
    }
  }
}

TEST_CASE("mine_hard_negatives toy") {
  auto tgt = toy();
  auto src = parse_text_embeddings("1 2\na 1 0\n");
  TranslationLexicon lex({{"a", "t0"}}, LexiconRole::train);
  auto table = mine_hard_negatives(lex, src, tgt, 2, {});
  REQUIRE(table.entries.size() == 1);
  CHECK(table.entries[0].gold == 0);
  CHECK(table.entries[0].negatives == std::vector<WordId>{2, 1});

  auto single = parse_text_embeddings("1 2\nt0 1 0\n");
  auto one = mine_hard_negatives(lex, src, single, 10, {});
  CHECK(one.entries[0].negatives.empty());

  TranslationLexicon oov({{"a", "nope"}}, LexiconRole::train);
  CHECK_THROWS_AS(mine_hard_negatives(oov, src, tgt, 2, {}), Error);
}

TEST_CASE("one entry per pair, each excluding only its own gold") {
  auto tgt = toy();
  auto src = parse_text_embeddings("1 2\na 1 0\n");
  TranslationLexicon lex({{"a", "t0"}, {"a", "t2"}}, LexiconRole::train);
  auto table = mine_hard_negatives(lex, src, tgt, 1, {});
  REQUIRE(table.entries.size() == 2);
  CHECK(table.entries[0].negatives == std::vector<WordId>{2});
  CHECK(table.entries[1].negatives == std::vector<WordId>{0});
}

TEST_CASE("negative tables satisfy their invariants") {
  auto d = fixture::make_bli({.words = 800, .dim = 16, .train_pairs = 600,
                              .test_pairs = 0, .seed = 67});
  auto t1 = mine_hard_negatives(d.train, d.enc_src, d.enc_tgt, 10, {}, 1);
  auto t3 = mine_hard_negatives(d.train, d.enc_src, d.enc_tgt, 10, {}, 3);
  REQUIRE(t1.entries.size() == d.train.size());
  for (std::size_t i = 0; i < t1.entries.size(); ++i) {
    const auto& e = t1.entries[i];
    CHECK(e.negatives.size() == 10);
    CHECK(std::find(e.negatives.begin(), e.negatives.end(), e.gold) ==
          e.negatives.end());
    CHECK(std::set<WordId>(e.negatives.begin(), e.negatives.end()).size() ==
          e.negatives.size());
    CHECK(e.negatives == t3.entries[i].negatives);
  }
}

TEST_CASE("negative table TSV round-trip") {
  fixture::TempDir dir("negs");
  auto d = fixture::make_bli({.words = 100, .dim = 8, .train_pairs = 40,
                              .test_pairs = 0, .seed = 71});
  auto t = mine_hard_negatives(d.train, d.enc_src, d.enc_tgt, 5, {});
  write_negative_table(t, d.enc_src, d.enc_tgt, dir / "n.tsv");
  auto back = read_negative_table(dir / "n.tsv", d.enc_src, d.enc_tgt);
  CHECK(back.n_negatives == 5);
  REQUIRE(back.entries.size() == t.entries.size());
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    CHECK(back.entries[i].src == t.entries[i].src);
    CHECK(back.entries[i].gold == t.entries[i].gold);
    CHECK(back.entries[i].negatives == t.entries[i].negatives);
  }
  const std::string first = fixture::read_file(dir / "n.tsv");
  CHECK(first.find('\t') != std::string::npos);

  fixture::write_file(dir / "bad.tsv", "# n_negatives=2\na\n");
  CHECK_THROWS_AS(read_negative_table(dir / "bad.tsv", d.enc_src, d.enc_tgt),
                  Error);
}
