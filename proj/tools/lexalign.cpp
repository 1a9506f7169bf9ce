// lexalign: command-line front end for building and evaluating aligned
// cross-lingual lexical spaces.
//
// Exit codes: 0 ok, 1 runtime error, 2 usage or configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "lexalign/binary_io.hpp"
#include "lexalign/pipeline.hpp"

namespace fs = std::filesystem;
using namespace lexalign;

namespace {

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  fs::path out_dir;
  bool seed_set = false;
  bool threads_set = false;

  fs::path output(const fs::path& p) const {
    if (p.empty() || p.is_absolute() || out_dir.empty()) return p;
    return out_dir / p;
  }
  void prepare() const {
    if (!out_dir.empty()) fs::create_directories(out_dir);
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Random seed")
      ->each([&c](const std::string&) { c.seed_set = true; });
  app->add_option("--threads", c.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->each([&c](const std::string&) { c.threads_set = true; });
  app->add_option("--out-dir", c.out_dir,
                  "Directory for relative output paths");
}

EmbeddingSpace load_space(const fs::path& p) {
  EmbeddingSpace s = load_embeddings(p);
  return s.normalized() ? s : l2_normalize(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lexalign: cross-lingual lexical space toolkit"};
  app.require_subcommand(1);
  Common common;

  // ingest
  IngestOptions ingest;
  std::size_t ingest_max = 0;
  bool no_normalize = false;
  auto* c_ingest = app.add_subcommand("ingest", "Convert a .vec file to a normalized binary cache");
  c_ingest->add_option("--vec", ingest.vec, "Input .vec file")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--max", ingest_max, "Keep the first N words (0 = all)");
  c_ingest->add_option("--out", ingest.out, "Output cache")->required();
  c_ingest->add_flag("--no-normalize", no_normalize, "Store rows as read");
  add_common(c_ingest, common);

  // induce
  fs::path ind_src, ind_tgt, ind_train, ind_out_src, ind_out_tgt, ind_out_map;
  auto* c_induce = app.add_subcommand("induce", "Induce a static CLWE space with orthogonal Procrustes");
  c_induce->add_option("--src", ind_src)->required()->check(CLI::ExistingFile);
  c_induce->add_option("--tgt", ind_tgt)->required()->check(CLI::ExistingFile);
  c_induce->add_option("--train", ind_train)->required()->check(CLI::ExistingFile);
  c_induce->add_option("--out-src", ind_out_src)->required();
  c_induce->add_option("--out-tgt", ind_out_tgt)->required();
  c_induce->add_option("--out-map", ind_out_map);
  add_common(c_induce, common);

  // mine
  fs::path mine_src, mine_tgt, mine_train, mine_out;
  std::size_t mine_n = 10;
  double mine_scale = 20.0;
  auto* c_mine = app.add_subcommand("mine", "Mine hard negatives on the pre-training spaces");
  c_mine->add_option("--src", mine_src)->required()->check(CLI::ExistingFile);
  c_mine->add_option("--tgt", mine_tgt)->required()->check(CLI::ExistingFile);
  c_mine->add_option("--train", mine_train)->required()->check(CLI::ExistingFile);
  c_mine->add_option("--negatives", mine_n, "Negatives per pair");
  c_mine->add_option("--scale", mine_scale, "Cosine scale C");
  c_mine->add_option("--out", mine_out)->required();
  add_common(c_mine, common);

  // train
  fs::path tr_src, tr_tgt, tr_negs, tr_out, tr_log, tr_out_src, tr_out_tgt;
  TrainConfig tcfg;
  auto* c_train = app.add_subcommand("train", "Contrastive fine-tuning of a linear adapter");
  c_train->add_option("--src", tr_src)->required()->check(CLI::ExistingFile);
  c_train->add_option("--tgt", tr_tgt)->required()->check(CLI::ExistingFile);
  c_train->add_option("--negatives", tr_negs, "Table written by `mine`")->required()->check(CLI::ExistingFile);
  c_train->add_option("--batch", tcfg.batch_size);
  c_train->add_option("--epochs", tcfg.epochs);
  c_train->add_option("--lr", tcfg.learning_rate);
  c_train->add_option("--wd", tcfg.weight_decay);
  c_train->add_option("--scale", tcfg.scale);
  c_train->add_option("--out", tr_out, "Adapter checkpoint")->required();
  c_train->add_option("--loss-log", tr_log);
  c_train->add_option("--out-src", tr_out_src, "Adapted source space");
  c_train->add_option("--out-tgt", tr_out_tgt, "Adapted target space");
  add_common(c_train, common);

  // map
  fs::path map_ss, map_st, map_es, map_et, map_train, map_out;
  auto* c_map = app.add_subcommand("map", "Fit the static-to-encoder map");
  c_map->add_option("--src-static", map_ss)->required()->check(CLI::ExistingFile);
  c_map->add_option("--tgt-static", map_st)->required()->check(CLI::ExistingFile);
  c_map->add_option("--src-enc", map_es)->required()->check(CLI::ExistingFile);
  c_map->add_option("--tgt-enc", map_et)->required()->check(CLI::ExistingFile);
  c_map->add_option("--train", map_train)->required()->check(CLI::ExistingFile);
  c_map->add_option("--out", map_out)->required();
  add_common(c_map, common);

  // interpolate
  fs::path ip_static, ip_enc, ip_map, ip_out;
  double ip_lambda = 0.3;
  auto* c_interp = app.add_subcommand("interpolate", "Interpolate a static and an encoder space");
  c_interp->add_option("--static", ip_static)->required()->check(CLI::ExistingFile);
  c_interp->add_option("--enc", ip_enc)->required()->check(CLI::ExistingFile);
  c_interp->add_option("--map", ip_map)->required()->check(CLI::ExistingFile);
  c_interp->add_option("--lambda", ip_lambda)->check(CLI::Range(0.0, 1.0));
  c_interp->add_option("--out", ip_out)->required();
  add_common(c_interp, common);

  // eval-bli
  fs::path eb_src, eb_tgt, eb_test, eb_out, eb_items;
  std::vector<std::size_t> eb_ks{1, 5};
  double eb_scale = 20.0;
  auto* c_eb = app.add_subcommand("eval-bli", "Bilingual lexicon induction P@k / MRR");
  c_eb->add_option("--src", eb_src)->required()->check(CLI::ExistingFile);
  c_eb->add_option("--tgt", eb_tgt)->required()->check(CLI::ExistingFile);
  c_eb->add_option("--test", eb_test)->required()->check(CLI::ExistingFile);
  c_eb->add_option("--ks", eb_ks)->delimiter(',');
  c_eb->add_option("--scale", eb_scale);
  c_eb->add_option("--out", eb_out, "Report TSV (default: stdout)");
  c_eb->add_option("--items", eb_items, "Per-item TSV");
  add_common(c_eb, common);

  // eval-xlsim
  fs::path ex_src, ex_tgt, ex_gold, ex_out, ex_items;
  auto* c_ex = app.add_subcommand("eval-xlsim", "Cross-lingual word similarity (Spearman)");
  c_ex->add_option("--src", ex_src)->required()->check(CLI::ExistingFile);
  c_ex->add_option("--tgt", ex_tgt)->required()->check(CLI::ExistingFile);
  c_ex->add_option("--gold", ex_gold)->required()->check(CLI::ExistingFile);
  c_ex->add_option("--out", ex_out, "Report TSV (default: stdout)");
  c_ex->add_option("--items", ex_items, "Per-item TSV");
  add_common(c_ex, common);

  // sweep
  SweepOptions sw;
  std::string sw_task = "bli";
  auto* c_sweep = app.add_subcommand("sweep", "Evaluate a list of interpolation factors");
  c_sweep->add_option("--src-static", sw.src_static)->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--tgt-static", sw.tgt_static)->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--src-enc", sw.src_encoder)->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--tgt-enc", sw.tgt_encoder)->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--map", sw.map)->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--test", sw.test, "Test lexicon or scored pairs")->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--lambdas", sw.lambdas)->delimiter(',')->required();
  c_sweep->add_option("--task", sw_task)->check(CLI::IsMember({"bli", "xlsim"}));
  c_sweep->add_option("--ks", sw.ks)->delimiter(',');
  c_sweep->add_option("--scale", sw.similarity.scale);
  c_sweep->add_option("--out", sw.out)->required();
  add_common(c_sweep, common);

  // run
  fs::path run_config;
  auto* c_run = app.add_subcommand("run", "Run a full pipeline from a config file");
  c_run->add_option("--config", run_config)->required()->check(CLI::ExistingFile);
  add_common(c_run, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    common.prepare();
    const unsigned threads = common.threads;

    if (*c_ingest) {
      if (ingest_max > 0) ingest.max_words = ingest_max;
      ingest.normalize = !no_normalize;
      ingest.out = common.output(ingest.out);
      const LoadStats st = cmd_ingest(ingest);
      std::cerr << "ingested " << ingest.vec << " -> " << ingest.out
                << " (duplicates " << st.duplicates << ", rejected "
                << st.rejected_words << ")\n";
    } else if (*c_induce) {
      const auto src = load_space(ind_src);
      const auto tgt = load_space(ind_tgt);
      auto f = filter_to_vocab(load_lexicon(ind_train, LexiconRole::train), src, tgt);
      std::cerr << "training pairs: " << f.lexicon.size() << " (dropped "
                << f.dropped << ")\n";
      const ClweResult r = induce_clwe(src, tgt, f.lexicon, threads);
      write_embedding_cache(r.src, common.output(ind_out_src));
      write_embedding_cache(r.tgt, common.output(ind_out_tgt));
      if (!ind_out_map.empty()) write_linear_map(r.map, common.output(ind_out_map));
    } else if (*c_mine) {
      const auto src = load_space(mine_src);
      const auto tgt = load_space(mine_tgt);
      auto f = filter_to_vocab(load_lexicon(mine_train, LexiconRole::train), src, tgt);
      const NegativeTable t = mine_hard_negatives(f.lexicon, src, tgt, mine_n,
                                                  SimilarityConfig{mine_scale}, threads);
      write_negative_table(t, src, tgt, common.output(mine_out));
    } else if (*c_train) {
      const auto src = load_space(tr_src);
      const auto tgt = load_space(tr_tgt);
      const NegativeTable negs = read_negative_table(tr_negs, src, tgt);
      TranslationLexicon lex(LexiconRole::train);
      for (const auto& e : negs.entries)
        lex.add({src.vocab().word(e.src), tgt.vocab().word(e.gold)});
      tcfg.seed = common.seed;
      tcfg.n_negatives = negs.n_negatives;
      const TrainResult r = train(lex, src, tgt, negs, tcfg);
      write_adapter(r.adapter, common.output(tr_out));
      if (!tr_log.empty()) write_loss_log(r.epoch_mean_loss, common.output(tr_log));
      if (!tr_out_src.empty())
        write_embedding_cache(adapt_space(src, r.adapter.weights, threads),
                              common.output(tr_out_src));
      if (!tr_out_tgt.empty())
        write_embedding_cache(adapt_space(tgt, r.adapter.weights, threads),
                              common.output(tr_out_tgt));
    } else if (*c_map) {
      auto [ss, es] = intersect_vocab(load_space(map_ss), load_space(map_es));
      auto [st, et] = intersect_vocab(load_space(map_st), load_space(map_et));
      auto f = filter_to_vocab(load_lexicon(map_train, LexiconRole::train), ss, st);
      const LinearMap m = fit_static_to_encoder(ss, st, es, et, f.lexicon);
      if (m.degenerate) std::cerr << "warning: degenerate mapping problem\n";
      write_linear_map(m, common.output(map_out));
    } else if (*c_interp) {
      auto [s, e] = intersect_vocab(load_space(ip_static), load_space(ip_enc));
      const EmbeddingSpace out = interpolate_space(
          s, e, read_linear_map(ip_map), InterpolationConfig{ip_lambda}, threads);
      write_embedding_cache(out, common.output(ip_out));
    } else if (*c_eb) {
      const EvalReport r =
          bli_evaluate(load_space(eb_src), load_space(eb_tgt),
                       load_lexicon(eb_test, LexiconRole::test), eb_ks,
                       SimilarityConfig{eb_scale}, threads);
      if (eb_out.empty()) std::cout << format_report(r);
      else write_report(r, common.output(eb_out));
      if (!eb_items.empty()) write_report_items(r, common.output(eb_items));
    } else if (*c_ex) {
      const EvalReport r = xlsim_evaluate(load_space(ex_src), load_space(ex_tgt),
                                          load_scored_pairs(ex_gold));
      if (ex_out.empty()) std::cout << format_report(r);
      else write_report(r, common.output(ex_out));
      if (!ex_items.empty()) write_report_items(r, common.output(ex_items));
    } else if (*c_sweep) {
      sw.task = sw_task == "bli" ? SweepTask::bli : SweepTask::xlsim;
      sw.threads = threads;
      sw.out = common.output(sw.out);
      cmd_sweep_lambda(sw);
    } else if (*c_run) {
      RunConfig cfg = RunConfig::load(run_config);
      if (common.seed_set) cfg.seed = common.seed;
      if (common.threads_set) cfg.threads = common.threads;
      if (!common.out_dir.empty()) cfg.paths.out_dir = fs::absolute(common.out_dir);
      const RunSummary s = cmd_run(cfg);
      for (const auto& p : s.reports) std::cout << p.string() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
