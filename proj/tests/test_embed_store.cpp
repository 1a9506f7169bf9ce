#include <doctest.h>

#include <cmath>
#include <random>

#include "lexalign/binary_io.hpp"
#include "lexalign/embed_store.hpp"
#include "support/fixtures.hpp"

using namespace lexalign;

namespace {

std::vector<float> row_of(const EmbeddingSpace& s, std::string_view w) {
  auto r = s.lookup(w);
  REQUIRE(r.has_value());
  return {r->begin(), r->end()};
}

}  // namespace

TEST_CASE("load reads header and rows in file order") {
  auto s = parse_text_embeddings("2 3\na 1 0 0\nb 0 1 0\n");
  REQUIRE(s.size() == 2);
  CHECK(s.dim() == 3);
  CHECK(s.vocab().words() == std::vector<std::string>{"a", "b"});
  CHECK(row_of(s, "a") == std::vector<float>{1, 0, 0});
  CHECK(row_of(s, "b") == std::vector<float>{0, 1, 0});
  CHECK_FALSE(s.normalized());
  CHECK(s.stats.declared_count == 2);
}

TEST_CASE("max_words truncates in file order") {
  auto s = parse_text_embeddings("2 3\na 1 0 0\nb 0 1 0\n", 1);
  CHECK(s.vocab().words() == std::vector<std::string>{"a"});
  CHECK(s.matrix().rows() == 1);
}

TEST_CASE("short row is a format error naming the line") {
  try {
    parse_text_embeddings("2 3\na 1 0\nb 0 1 0\n");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("2 values, expected 3") !=
          std::string::npos);
  }
}

TEST_CASE("too many values is a format error") {
  CHECK_THROWS_AS(parse_text_embeddings("1 2\na 1 2 3\n"), FormatError);
}

TEST_CASE("malformed headers") {
  CHECK_THROWS_AS(parse_text_embeddings(""), FormatError);
  CHECK_THROWS_AS(parse_text_embeddings("3\na 1 2 3\n"), FormatError);
  CHECK_THROWS_AS(parse_text_embeddings("x 3\n"), FormatError);
  CHECK_THROWS_AS(parse_text_embeddings("1 0\n"), FormatError);
}

TEST_CASE("non-numeric values are rejected") {
  CHECK_THROWS_AS(parse_text_embeddings("1 2\na 1 zz\n"), FormatError);
  CHECK_THROWS_AS(parse_text_embeddings("1 2\na 1 nan\n"), FormatError);
}

TEST_CASE("duplicates keep the first occurrence and are counted") {
  auto s = parse_text_embeddings("3 2\na 1 0\na 5 5\nb 0 1\n");
  CHECK(s.vocab().words() == std::vector<std::string>{"a", "b"});
  CHECK(row_of(s, "a") == std::vector<float>{1, 0});
  CHECK(s.stats.duplicates == 1);
}

TEST_CASE("words containing a space are skipped and counted") {
  auto s = parse_text_embeddings("3 2\nnew york 1 0\nb 0 1\nc 1 1\n");
  CHECK(s.vocab().words() == std::vector<std::string>{"b", "c"});
  CHECK(s.stats.rejected_words == 1);
}

TEST_CASE("CRLF line endings and blank lines") {
  auto s = parse_text_embeddings("2 2\r\na 1 0\r\n\r\nb 0 1\r\n");
  CHECK(s.size() == 2);
  CHECK(row_of(s, "b") == std::vector<float>{0, 1});
}

TEST_CASE("l2_normalize") {
  SUBCASE("3-4-5") {
    auto s = l2_normalize(parse_text_embeddings("1 2\nw 3 4\n"));
    CHECK(s.normalized());
    CHECK(row_of(s, "w")[0] == doctest::Approx(0.6).epsilon(1e-7));
    CHECK(row_of(s, "w")[1] == doctest::Approx(0.8).epsilon(1e-7));
  }
  SUBCASE("already unit") {
    auto s = l2_normalize(parse_text_embeddings("1 3\nw 1 0 0\n"));
    CHECK(row_of(s, "w") == std::vector<float>{1, 0, 0});
  }
  SUBCASE("zero row names the word") {
    try {
      l2_normalize(parse_text_embeddings("2 2\nok 1 0\nw 0 0\n"));
      FAIL("expected Error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()) == "zero vector for word w");
    }
  }
}

TEST_CASE("l2_normalize is idempotent") {
  std::mt19937_64 rng(3);
  auto s = l2_normalize(
      fixture::make_space("w", fixture::gaussian(200, 17, rng, 3.0), false));
  auto t = l2_normalize(s);
  CHECK((s.matrix() - t.matrix()).cwiseAbs().maxCoeff() <= 1e-6f);
}

TEST_CASE("lookup") {
  auto s = parse_text_embeddings("2 3\na 1 0 0\nb 0 1 0\n");
  CHECK(row_of(s, "a") == std::vector<float>{1, 0, 0});
  CHECK_FALSE(s.lookup("zzz").has_value());
  auto n = l2_normalize(parse_text_embeddings("1 2\nw 3 4\n"));
  CHECK(row_of(n, "w")[0] == doctest::Approx(0.6));
}

TEST_CASE("vocabulary ids are dense and consistent") {
  std::mt19937_64 rng(5);
  auto s = fixture::make_space("w", fixture::gaussian(300, 4, rng));
  CHECK(static_cast<std::size_t>(s.matrix().rows()) == s.vocab().size());
  for (std::size_t i = 0; i < s.size(); ++i)
    CHECK(*s.vocab().find(s.vocab().word(static_cast<WordId>(i))) ==
          static_cast<WordId>(i));
  CHECK_THROWS_AS(Vocabulary({"a", "a"}), Error);
}

TEST_CASE("space constructor validates its invariants") {
  RowMatrixF m(2, 2);
  m << 1, 0, 0, 1;
  CHECK_THROWS_AS(EmbeddingSpace(Vocabulary({"a"}), m), Error);
  RowMatrixF bad(1, 2);
  bad << 3, 4;
  CHECK_THROWS_AS(EmbeddingSpace(Vocabulary({"a"}), bad, true), Error);
}

TEST_CASE("text round-trip keeps 6 significant digits") {
  std::mt19937_64 rng(11);
  auto s = fixture::make_space("w", fixture::gaussian(100, 9, rng, 10.0), false);
  auto back = parse_text_embeddings(format_text_embeddings(s));
  REQUIRE(back.vocab() == s.vocab());
  for (Eigen::Index i = 0; i < s.matrix().rows(); ++i)
    for (Eigen::Index j = 0; j < s.matrix().cols(); ++j) {
      const double a = s.matrix()(i, j), b = back.matrix()(i, j);
      CHECK(std::abs(a - b) <= 5e-7 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("binary cache round-trip and sniffing") {
  fixture::TempDir dir("embed");
  std::mt19937_64 rng(13);
  auto s = fixture::make_space("w", fixture::gaussian(50, 6, rng));
  write_embedding_cache(s, dir / "s.lxrw");
  write_text_embeddings(s, dir / "s.vec");
  CHECK(is_container(dir / "s.lxrw"));
  CHECK_FALSE(is_container(dir / "s.vec"));

  auto c = load_embeddings(dir / "s.lxrw");
  CHECK(c.vocab() == s.vocab());
  CHECK(c.matrix() == s.matrix());
  CHECK(c.normalized());

  auto t = load_embeddings(dir / "s.vec", 10);
  CHECK(t.size() == 10);
  CHECK_FALSE(t.normalized());
  auto ct = load_embeddings(dir / "s.lxrw", 10);
  CHECK(ct.size() == 10);
  CHECK(ct.vocab().word(9) == "w9");

  CHECK_THROWS_AS(load_embeddings(dir / "missing.vec"), Error);
}

TEST_CASE("corrupt binary cache is rejected") {
  fixture::TempDir dir("embed_bad");
  std::mt19937_64 rng(1);
  auto s = fixture::make_space("w", fixture::gaussian(5, 3, rng));
  write_embedding_cache(s, dir / "s.lxrw");
  auto bytes = fixture::read_file(dir / "s.lxrw");
  fixture::write_file(dir / "t.lxrw", bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_embedding_cache(dir / "t.lxrw"), Error);
}

TEST_CASE("intersect_vocab keeps shared words in the first space's order") {
  auto a = parse_text_embeddings("3 1\nx 1\ny 2\nz 3\n");
  auto b = parse_text_embeddings("3 1\nz 30\nq 0\nx 10\n");
  auto [ia, ib] = intersect_vocab(a, b);
  CHECK(ia.vocab().words() == std::vector<std::string>{"x", "z"});
  CHECK(ib.vocab().words() == std::vector<std::string>{"x", "z"});
  CHECK(ib.matrix()(1, 0) == 30.0f);
}
