#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lexalign/binary_io.hpp"
#include "lexalign/pipeline.hpp"

namespace py = pybind11;
using namespace lexalign;

namespace {

EmbeddingSpace make_space(std::vector<std::string> words,
                          const Eigen::MatrixXd& matrix, bool normalize) {
  EmbeddingSpace s(Vocabulary(std::move(words)), matrix.cast<float>(), false);
  return normalize ? l2_normalize(s) : s;
}

TranslationLexicon make_lexicon(
    const std::vector<std::pair<std::string, std::string>>& pairs,
    LexiconRole role) {
  TranslationLexicon lex(role);
  for (const auto& [s, t] : pairs) lex.add({s, t});
  return lex;
}

std::vector<std::pair<std::string, std::string>> pairs_of(
    const TranslationLexicon& lex) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : lex.pairs()) out.emplace_back(p.src, p.tgt);
  return out;
}

py::dict metrics_of(const EvalReport& r) {
  py::dict d;
  for (const auto& [k, v] : r.metrics) d[py::str(k)] = v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_lexalign, m) {
  m.doc() = "Cross-lingual lexical space toolkit";
  m.attr("__version__") = LEXALIGN_VERSION;

  static py::exception<Error> error(m, "LexalignError", PyExc_RuntimeError);
  static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
  static py::exception<FormatError> format_error(m, "FormatError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const FormatError& e) {
      format_error(e.what());
    } catch (const Error& e) {
      error(e.what());
    }
  });

  py::class_<EmbeddingSpace>(m, "EmbeddingSpace")
      .def(py::init(&make_space), py::arg("words"), py::arg("matrix"),
           py::arg("normalize") = false)
      .def_property_readonly("words",
                             [](const EmbeddingSpace& s) { return s.vocab().words(); })
      .def_property_readonly("matrix",
                             [](const EmbeddingSpace& s) {
                               return Eigen::MatrixXd(s.matrix().cast<double>());
                             })
      .def_property_readonly("dim", &EmbeddingSpace::dim)
      .def_property_readonly("normalized", &EmbeddingSpace::normalized)
      .def("__len__", &EmbeddingSpace::size)
      .def("__contains__",
           [](const EmbeddingSpace& s, const std::string& w) {
             return s.vocab().contains(w);
           })
      .def("lookup",
           [](const EmbeddingSpace& s,
              const std::string& w) -> std::optional<std::vector<float>> {
             auto r = s.lookup(w);
             if (!r) return std::nullopt;
             return std::vector<float>(r->begin(), r->end());
           })
      .def("__repr__", [](const EmbeddingSpace& s) {
        return "<EmbeddingSpace " + std::to_string(s.size()) + "x" +
               std::to_string(s.dim()) + (s.normalized() ? " normalized>" : ">");
      });

  m.def("load_embeddings", &load_embeddings, py::arg("path"),
        py::arg("max_words") = std::nullopt,
        "Load a .vec file or a binary cache.");
  m.def("load_text_embeddings", &load_text_embeddings, py::arg("path"),
        py::arg("max_words") = std::nullopt);
  m.def("parse_text_embeddings", &parse_text_embeddings, py::arg("text"),
        py::arg("max_words") = std::nullopt);
  m.def("write_text_embeddings", &write_text_embeddings);
  m.def("write_embedding_cache", &write_embedding_cache);
  m.def("l2_normalize", &l2_normalize);

  m.def("solve_procrustes",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
          auto w = solve_procrustes(x, y);
          return py::make_tuple(w.matrix, w.degenerate);
        },
        "Returns (W, degenerate).");
  m.def("induce_clwe",
        [](const EmbeddingSpace& src, const EmbeddingSpace& tgt,
           const std::vector<std::pair<std::string, std::string>>& pairs,
           unsigned threads) {
          auto f = filter_to_vocab(make_lexicon(pairs, LexiconRole::train), src, tgt);
          auto r = induce_clwe(src, tgt, f.lexicon, threads);
          return py::make_tuple(r.src, r.tgt, r.map.matrix);
        },
        py::arg("src"), py::arg("tgt"), py::arg("pairs"), py::arg("threads") = 1);
  m.def("fit_static_to_encoder",
        [](const EmbeddingSpace& ss, const EmbeddingSpace& st,
           const EmbeddingSpace& es, const EmbeddingSpace& et,
           const std::vector<std::pair<std::string, std::string>>& pairs) {
          return fit_static_to_encoder(
                     ss, st, es, et, make_lexicon(pairs, LexiconRole::train))
              .matrix;
        });
  m.def("interpolate_space",
        [](const EmbeddingSpace& st, const EmbeddingSpace& enc,
           const Eigen::MatrixXd& w, double lambda, unsigned threads) {
          return interpolate_space(st, enc, LinearMap{w, MapKind::general, false},
                                   InterpolationConfig{lambda}, threads);
        },
        py::arg("static_space"), py::arg("encoder_space"), py::arg("map"),
        py::arg("lam"), py::arg("threads") = 1);

  m.def("scaled_cosine",
        [](const std::vector<float>& u, const std::vector<float>& v, double c) {
          return scaled_cosine(u, v, SimilarityConfig{c});
        },
        py::arg("u"), py::arg("v"), py::arg("scale") = 20.0);
  m.def("topk",
        [](const EmbeddingSpace& space, const std::vector<float>& query,
           std::size_t k, std::vector<WordId> exclude, double scale) {
          std::sort(exclude.begin(), exclude.end());
          std::vector<std::pair<std::string, double>> out;
          for (const auto& n :
               topk(query, space, k, exclude, SimilarityConfig{scale}))
            out.emplace_back(space.vocab().word(n.id), n.score);
          return out;
        },
        py::arg("space"), py::arg("query"), py::arg("k"),
        py::arg("exclude") = std::vector<WordId>{}, py::arg("scale") = 20.0);
  m.def("mine_hard_negatives",
        [](const EmbeddingSpace& src, const EmbeddingSpace& tgt,
           const std::vector<std::pair<std::string, std::string>>& pairs,
           std::size_t n, double scale, unsigned threads) {
          auto f = filter_to_vocab(make_lexicon(pairs, LexiconRole::train), src, tgt);
          auto table = mine_hard_negatives(f.lexicon, src, tgt, n,
                                           SimilarityConfig{scale}, threads);
          py::list out;
          for (const auto& e : table.entries) {
            std::vector<std::string> negs;
            for (WordId id : e.negatives) negs.push_back(tgt.vocab().word(id));
            out.append(py::make_tuple(src.vocab().word(e.src),
                                      tgt.vocab().word(e.gold), negs));
          }
          return out;
        },
        py::arg("src"), py::arg("tgt"), py::arg("pairs"),
        py::arg("n_negatives") = 10, py::arg("scale") = 20.0,
        py::arg("threads") = 1);

  m.def("mneg_loss",
        [](const Eigen::MatrixXd& src, const Eigen::MatrixXd& tgt,
           std::vector<Eigen::MatrixXd> negatives, double scale) {
          if (negatives.empty())
            negatives.assign(src.rows(), Eigen::MatrixXd(0, src.cols()));
          return mneg_loss({src, tgt, std::move(negatives)},
                           SimilarityConfig{scale});
        },
        py::arg("src"), py::arg("tgt"),
        py::arg("negatives") = std::vector<Eigen::MatrixXd>{},
        py::arg("scale") = 20.0);
  m.def("train",
        [](const EmbeddingSpace& src, const EmbeddingSpace& tgt,
           const std::vector<std::pair<std::string, std::string>>& pairs,
           std::size_t epochs, std::size_t batch_size, double learning_rate,
           double weight_decay, std::size_t n_negatives, double scale,
           std::uint64_t seed) {
          auto f = filter_to_vocab(make_lexicon(pairs, LexiconRole::train), src, tgt);
          TrainConfig cfg;
          cfg.epochs = epochs;
          cfg.batch_size = batch_size;
          cfg.learning_rate = learning_rate;
          cfg.weight_decay = weight_decay;
          cfg.n_negatives = n_negatives;
          cfg.scale = scale;
          cfg.seed = seed;
          auto negs = mine_hard_negatives(f.lexicon, src, tgt, n_negatives,
                                          cfg.similarity());
          auto r = train(f.lexicon, src, tgt, negs, cfg);
          return py::make_tuple(r.adapter.weights, r.epoch_mean_loss);
        },
        py::arg("src"), py::arg("tgt"), py::arg("pairs"), py::arg("epochs") = 5,
        py::arg("batch_size") = 128, py::arg("learning_rate") = 2e-5,
        py::arg("weight_decay") = 0.01, py::arg("n_negatives") = 10,
        py::arg("scale") = 20.0, py::arg("seed") = 0,
        "Mines negatives, trains the adapter; returns (weights, epoch losses).");
  m.def("adapt_space", &adapt_space, py::arg("space"), py::arg("weights"),
        py::arg("threads") = 1);

  m.def("bli_evaluate",
        [](const EmbeddingSpace& src, const EmbeddingSpace& tgt,
           const std::vector<std::pair<std::string, std::string>>& pairs,
           std::vector<std::size_t> ks, double scale, unsigned threads) {
          return metrics_of(bli_evaluate(src, tgt,
                                         make_lexicon(pairs, LexiconRole::test),
                                         ks, SimilarityConfig{scale}, threads));
        },
        py::arg("src"), py::arg("tgt"), py::arg("pairs"),
        py::arg("ks") = std::vector<std::size_t>{1, 5}, py::arg("scale") = 20.0,
        py::arg("threads") = 1);
  m.def("xlsim_evaluate",
        [](const EmbeddingSpace& src, const EmbeddingSpace& tgt,
           const std::vector<std::tuple<std::string, std::string, double>>& gold) {
          ScoredWordPairs g;
          for (const auto& [s, t, v] : gold) g.triples.push_back({s, t, v});
          return metrics_of(xlsim_evaluate(src, tgt, g));
        });
  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) {
    return spearman(x, y);
  });

  m.def("load_lexicon",
        [](const std::filesystem::path& p) {
          return pairs_of(load_lexicon(p, LexiconRole::train));
        });
  m.def("remove_test_leakage",
        [](const std::vector<std::pair<std::string, std::string>>& train,
           const std::vector<std::pair<std::string, std::string>>& test) {
          auto r = remove_test_leakage(make_lexicon(train, LexiconRole::train),
                                       make_lexicon(test, LexiconRole::test));
          return py::make_tuple(pairs_of(r.lexicon), r.removed);
        });

  m.def("ingest",
        [](const std::filesystem::path& vec, const std::filesystem::path& out,
           std::optional<std::size_t> max_words, bool normalize) {
          auto st = cmd_ingest({vec, out, max_words, normalize});
          py::dict d;
          d["declared_count"] = st.declared_count;
          d["duplicates"] = st.duplicates;
          d["rejected_words"] = st.rejected_words;
          return d;
        },
        py::arg("vec"), py::arg("out"), py::arg("max_words") = std::nullopt,
        py::arg("normalize") = true);
  m.def("run",
        [](const std::filesystem::path& config) {
          RunSummary s;
          {
            py::gil_scoped_release release;
            s = cmd_run(RunConfig::load(config));
          }
          py::dict d;
          d["reports"] = s.reports;
          d["artifacts"] = s.artifacts;
          d["manifest"] = s.manifest;
          return d;
        },
        "Run a pipeline config file; returns the written paths.");
}
