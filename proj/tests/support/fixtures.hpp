#pragma once

// Seeded synthetic bilingual data.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include <unistd.h>

#include <Eigen/Dense>

#include "lexalign/embed_store.hpp"
#include "lexalign/lexicon.hpp"

namespace fixture {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols,
                                std::mt19937_64& rng, double sigma = 1.0) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  if (sigma == 0.0) return m;
  std::normal_distribution<double> n(0.0, sigma);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

inline Eigen::MatrixXd unit_rows(Eigen::MatrixXd m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i).normalize();
  return m;
}

// d1 x d2 matrix with orthonormal rows, from the QR factor of a Gaussian.
inline Eigen::MatrixXd random_orthonormal_rows(int d1, int d2,
                                               std::mt19937_64& rng) {
  const Eigen::MatrixXd g = gaussian(d2, d1, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(d2, d1);
  return q.transpose();
}

inline lexalign::EmbeddingSpace make_space(const std::string& prefix,
                                           const Eigen::MatrixXd& rows,
                                           bool normalize = true) {
  lexalign::Vocabulary v;
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    v.add(prefix + std::to_string(i));
  lexalign::RowMatrixF m = rows.cast<float>();
  lexalign::EmbeddingSpace s(std::move(v), std::move(m), false);
  return normalize ? lexalign::l2_normalize(s) : s;
}

struct BliParams {
  int words = 2000;
  int dim = 32;
  double static_noise = 0.05;
  double encoder_noise = 0.05;
  // Weight of a per-language shared component in the encoder view; it
  // stands in for the language-identity signal of multilingual encoders.
  double language_offset = 0.0;
  std::size_t train_pairs = 500;
  std::size_t test_pairs = 200;
  std::uint64_t seed = 7;
};

// Word i of the source language ("s<i>") translates to "t<i>". The static
// target view is a random rotation of the shared base plus noise; the
// encoder view shares the base's geometry across languages.
struct BliData {
  lexalign::EmbeddingSpace static_src, static_tgt;
  lexalign::EmbeddingSpace enc_src, enc_tgt;
  lexalign::TranslationLexicon train{lexalign::LexiconRole::train};
  lexalign::TranslationLexicon test{lexalign::LexiconRole::test};
  Eigen::MatrixXd rotation;
};

inline BliData make_bli(const BliParams& p) {
  std::mt19937_64 rng(p.seed);
  const Eigen::MatrixXd base = unit_rows(gaussian(p.words, p.dim, rng));
  const Eigen::MatrixXd rotation = random_orthonormal_rows(p.dim, p.dim, rng);

  BliData d;
  d.rotation = rotation;
  d.static_src =
      make_space("s", base + gaussian(p.words, p.dim, rng, p.static_noise));
  d.static_tgt = make_space(
      "t", base * rotation + gaussian(p.words, p.dim, rng, p.static_noise));

  const Eigen::RowVectorXd lang_src =
      unit_rows(gaussian(1, p.dim, rng)) * p.language_offset;
  const Eigen::RowVectorXd lang_tgt =
      unit_rows(gaussian(1, p.dim, rng)) * p.language_offset;
  Eigen::MatrixXd es = base + gaussian(p.words, p.dim, rng, p.encoder_noise);
  Eigen::MatrixXd et = base + gaussian(p.words, p.dim, rng, p.encoder_noise);
  es.rowwise() += lang_src;
  et.rowwise() += lang_tgt;
  d.enc_src = make_space("s", es);
  d.enc_tgt = make_space("t", et);

  std::vector<int> order(p.words);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < p.train_pairs + p.test_pairs; ++i) {
    const int w = order[i];
    lexalign::WordPair pair{"s" + std::to_string(w), "t" + std::to_string(w)};
    (i < p.train_pairs ? d.train : d.test).add(pair);
  }
  return d;
}

}  // namespace fixture

namespace fixture {

// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lexalign_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_lexicon(const std::filesystem::path& path,
                          const lexalign::TranslationLexicon& lex) {
  std::string text;
  for (const auto& p : lex.pairs()) text += p.src + "\t" + p.tgt + "\n";
  write_file(path, text);
}

}  // namespace fixture

namespace fixture {

// Writes the four spaces as .vec files plus train/test lexicons into `dir`.
inline void write_bli_files(const BliData& d, const std::filesystem::path& dir) {
  lexalign::write_text_embeddings(d.static_src, dir / "static_src.vec");
  lexalign::write_text_embeddings(d.static_tgt, dir / "static_tgt.vec");
  lexalign::write_text_embeddings(d.enc_src, dir / "enc_src.vec");
  lexalign::write_text_embeddings(d.enc_tgt, dir / "enc_tgt.vec");
  write_lexicon(dir / "train.tsv", d.train);
  write_lexicon(dir / "test.tsv", d.test);
}

// Config text pointing at the files of write_bli_files.
inline std::string bli_config(const std::string& stages,
                              const std::string& extra = "") {
  return "[paths]\n"
         "src_static = static_src.vec\n"
         "tgt_static = static_tgt.vec\n"
         "src_encoder = enc_src.vec\n"
         "tgt_encoder = enc_tgt.vec\n"
         "train_lexicon = train.tsv\n"
         "test_lexicon = test.tsv\n"
         "out_dir = out\n\n"
         "[stages]\n" +
         stages + "\n" + extra;
}

}  // namespace fixture
