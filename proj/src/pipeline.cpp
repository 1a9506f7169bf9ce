#include "lexalign/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include "lexalign/binary_io.hpp"

namespace lexalign {

namespace pt = boost::property_tree;

namespace {

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

template <typename T>
T parse_value(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ConfigError(key + ": cannot parse '" + text + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(parse_value<T>(key, item));
  }
  return out;
}

template <typename T>
std::string join_list(const std::vector<T>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    if constexpr (std::is_floating_point_v<T>)
      s += format_number(values[i]);
    else
      s += std::to_string(values[i]);
  }
  return s;
}

fs::path resolve(const fs::path& base, const std::string& text) {
  if (text.empty()) return {};
  fs::path p(text);
  return p.is_absolute() ? p : base / p;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

EmbeddingSpace load_normalized(const fs::path& path,
                               std::optional<std::size_t> max_words) {
  EmbeddingSpace s = load_embeddings(path, max_words);
  return s.normalized() ? s : l2_normalize(s);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

struct SpacePair {
  EmbeddingSpace src;
  EmbeddingSpace tgt;
};

// Interpolated pair for one lambda over the shared vocabulary.
SpacePair interpolate_pair(const SpacePair& stat, const SpacePair& enc,
                           const LinearMap& map, double lambda,
                           unsigned threads) {
  const InterpolationConfig cfg{lambda};
  return {interpolate_space(stat.src, enc.src, map, cfg, threads),
          interpolate_space(stat.tgt, enc.tgt, map, cfg, threads)};
}

// Restricts static and encoder spaces to shared words per language.
std::pair<SpacePair, SpacePair> common_vocab(const SpacePair& stat,
                                             const SpacePair& enc) {
  auto [ss, es] = intersect_vocab(stat.src, enc.src);
  auto [st, et] = intersect_vocab(stat.tgt, enc.tgt);
  return {SpacePair{std::move(ss), std::move(st)},
          SpacePair{std::move(es), std::move(et)}};
}

std::string sweep_csv(const std::string& metric,
                      const std::vector<SweepRow>& rows) {
  std::string out = "lambda," + metric + "\n";
  for (const auto& r : rows)
    out += format_number(r.lambda) + "," + format_number(r.value) + "\n";
  return out;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text, const fs::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  RunConfig c;
  static const std::vector<std::string> ignored = {"manifest", "inputs",
                                                   "outputs"};
  for (const auto& [section, body] : tree) {
    if (std::find(ignored.begin(), ignored.end(), section) != ignored.end())
      continue;
    if (body.empty() && !body.data().empty())
      throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      const std::string v = node.get_value<std::string>();
      const std::string name = section + "." + key;
      if (section == "paths") {
        const fs::path p = resolve(base_dir, v);
        if (key == "src_static") c.paths.src_static = p;
        else if (key == "tgt_static") c.paths.tgt_static = p;
        else if (key == "src_encoder") c.paths.src_encoder = p;
        else if (key == "tgt_encoder") c.paths.tgt_encoder = p;
        else if (key == "train_lexicon") c.paths.train_lexicon = p;
        else if (key == "test_lexicon") c.paths.test_lexicon = p;
        else if (key == "xlsim_gold") c.paths.xlsim_gold = p;
        else if (key == "out_dir") c.paths.out_dir = p;
        else throw ConfigError("config: unknown key " + name);
      } else if (section == "stages") {
        const bool b = parse_bool(name, v);
        if (key == "induce_clwe") c.stages.induce_clwe = b;
        else if (key == "mine") c.stages.mine = b;
        else if (key == "train") c.stages.train = b;
        else if (key == "interpolate") c.stages.interpolate = b;
        else if (key == "eval_bli") c.stages.eval_bli = b;
        else if (key == "eval_xlsim") c.stages.eval_xlsim = b;
        else if (key == "static_aligned") c.stages.static_aligned = b;
        else if (key == "save_spaces") c.stages.save_spaces = b;
        else throw ConfigError("config: unknown key " + name);
      } else if (section == "train") {
        if (key == "batch_size") c.train.batch_size = parse_value<std::size_t>(name, v);
        else if (key == "n_negatives") c.train.n_negatives = parse_value<std::size_t>(name, v);
        else if (key == "epochs") c.train.epochs = parse_value<std::size_t>(name, v);
        else if (key == "learning_rate") c.train.learning_rate = parse_value<double>(name, v);
        else if (key == "weight_decay") c.train.weight_decay = parse_value<double>(name, v);
        else throw ConfigError("config: unknown key " + name);
      } else if (section == "similarity") {
        if (key == "scale") c.similarity.scale = parse_value<double>(name, v);
        else throw ConfigError("config: unknown key " + name);
      } else if (section == "interpolate") {
        if (key == "lambdas") c.lambdas = parse_list<double>(name, v);
        else throw ConfigError("config: unknown key " + name);
      } else if (section == "eval") {
        if (key == "ks") c.ks = parse_list<std::size_t>(name, v);
        else throw ConfigError("config: unknown key " + name);
      } else if (section == "run") {
        if (key == "seed") c.seed = parse_value<std::uint64_t>(name, v);
        else if (key == "threads") c.threads = parse_value<unsigned>(name, v);
        else if (key == "max_words") c.max_words = parse_value<std::size_t>(name, v);
        else throw ConfigError("config: unknown key " + name);
      } else {
        throw ConfigError("config: unknown section [" + section + "]");
      }
    }
  }
  c.train.scale = c.similarity.scale;
  c.train.seed = c.seed;
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), fs::absolute(path).parent_path());
}

void RunConfig::validate() const {
  const auto& p = paths;
  const auto& s = stages;
  const bool has_static = !p.src_static.empty() && !p.tgt_static.empty();
  const bool has_encoder = !p.src_encoder.empty() && !p.tgt_encoder.empty();

  require(!p.out_dir.empty(), "paths.out_dir is required");
  require(!s.train || s.mine, "stage 'train' requires stage 'mine'");
  if (s.induce_clwe)
    require(has_static && !p.train_lexicon.empty(),
            "stage 'induce_clwe' needs static spaces and a train lexicon");
  if (s.mine)
    require(has_encoder && !p.train_lexicon.empty(),
            "stage 'mine' needs encoder spaces and a train lexicon");
  if (s.interpolate) {
    require(has_static && has_encoder && !p.train_lexicon.empty(),
            "stage 'interpolate' needs static and encoder spaces and a train "
            "lexicon");
    require(s.induce_clwe || s.static_aligned,
            "stage 'interpolate' needs aligned static spaces: enable "
            "'induce_clwe' or set 'static_aligned'");
    require(!lambdas.empty(), "stage 'interpolate' needs a lambda list");
  }
  if (s.eval_bli) {
    require(!p.test_lexicon.empty(), "stage 'eval_bli' needs a test lexicon");
    require(has_encoder || (has_static && (s.induce_clwe || s.static_aligned)),
            "stage 'eval_bli' has no space to evaluate");
  }
  if (s.eval_xlsim) {
    require(!p.xlsim_gold.empty(), "stage 'eval_xlsim' needs xlsim_gold");
    require(has_encoder || (has_static && (s.induce_clwe || s.static_aligned)),
            "stage 'eval_xlsim' has no space to evaluate");
  }
  for (double l : lambdas)
    require(l >= 0.0 && l <= 1.0, "lambda " + format_number(l) +
                                      " outside [0, 1]");
  require(!ks.empty(), "eval.ks must not be empty");
  for (auto k : ks) require(k > 0, "eval.ks entries must be positive");
  train.validate();
  similarity.validate();
  for (const fs::path* in :
       {&p.src_static, &p.tgt_static, &p.src_encoder, &p.tgt_encoder,
        &p.train_lexicon, &p.test_lexicon, &p.xlsim_gold}) {
    if (!in->empty())
      require(fs::exists(*in), "input does not exist: " + in->string());
  }
}

std::string RunConfig::to_ini() const {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::ostringstream o;
  o << "[paths]\n";
  auto path = [&](const char* key, const fs::path& v) {
    if (!v.empty()) o << key << " = " << v.string() << '\n';
  };
  path("src_static", paths.src_static);
  path("tgt_static", paths.tgt_static);
  path("src_encoder", paths.src_encoder);
  path("tgt_encoder", paths.tgt_encoder);
  path("train_lexicon", paths.train_lexicon);
  path("test_lexicon", paths.test_lexicon);
  path("xlsim_gold", paths.xlsim_gold);
  path("out_dir", paths.out_dir);
  o << "\n[stages]\n"
    << "induce_clwe = " << b(stages.induce_clwe) << '\n'
    << "mine = " << b(stages.mine) << '\n'
    << "train = " << b(stages.train) << '\n'
    << "interpolate = " << b(stages.interpolate) << '\n'
    << "eval_bli = " << b(stages.eval_bli) << '\n'
    << "eval_xlsim = " << b(stages.eval_xlsim) << '\n'
    << "static_aligned = " << b(stages.static_aligned) << '\n'
    << "save_spaces = " << b(stages.save_spaces) << '\n';
  o << "\n[train]\n"
    << "batch_size = " << train.batch_size << '\n'
    << "n_negatives = " << train.n_negatives << '\n'
    << "epochs = " << train.epochs << '\n'
    << "learning_rate = " << format_number(train.learning_rate) << '\n'
    << "weight_decay = " << format_number(train.weight_decay) << '\n';
  o << "\n[similarity]\nscale = " << format_number(similarity.scale) << '\n';
  if (!lambdas.empty())
    o << "\n[interpolate]\nlambdas = " << join_list(lambdas) << '\n';
  o << "\n[eval]\nks = " << join_list(ks) << '\n';
  o << "\n[run]\nseed = " << seed << "\nthreads = " << threads << '\n';
  if (max_words) o << "max_words = " << *max_words << '\n';
  return o.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(
      EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0)
      EVP_DigestUpdate(ctx.get(), buf.data(),
                       static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

RunSummary cmd_run(const RunConfig& config) {
  config.validate();
  const auto& P = config.paths;
  const auto& S = config.stages;
  const unsigned threads = config.threads;
  const SimilarityConfig sim = config.similarity;
  TrainConfig tcfg = config.train;
  tcfg.scale = sim.scale;
  tcfg.seed = config.seed;

  fs::create_directories(P.out_dir);
  RunSummary summary;
  std::vector<std::pair<std::string, std::string>> notes;
  auto out = [&](const std::string& name) { return P.out_dir / name; };
  auto artifact = [&](const fs::path& p) { summary.artifacts.push_back(p); };
  auto report = [&](const fs::path& p) { summary.reports.push_back(p); };

  // Inputs.
  std::optional<TranslationLexicon> train_lex;
  if (!P.train_lexicon.empty())
    train_lex = load_lexicon(P.train_lexicon, LexiconRole::train);
  std::optional<TranslationLexicon> test_lex;
  if (S.eval_bli) test_lex = load_lexicon(P.test_lexicon, LexiconRole::test);
  std::optional<ScoredWordPairs> gold;
  if (S.eval_xlsim) {
    gold = load_scored_pairs(P.xlsim_gold);
    if (train_lex) {
      auto leak = remove_test_leakage(*train_lex, *gold);
      notes.emplace_back("xlsim_leak_removed", std::to_string(leak.removed));
      train_lex = std::move(leak.lexicon);
    }
  }

  const bool has_static = !P.src_static.empty() && !P.tgt_static.empty();
  const bool has_encoder = !P.src_encoder.empty() && !P.tgt_encoder.empty();
  std::optional<SpacePair> stat, enc;
  if (has_static && (S.induce_clwe || S.static_aligned))
    stat = SpacePair{load_normalized(P.src_static, config.max_words),
                     load_normalized(P.tgt_static, config.max_words)};
  if (has_encoder)
    enc = SpacePair{load_normalized(P.src_encoder, config.max_words),
                    load_normalized(P.tgt_encoder, config.max_words)};

  auto evaluate = [&](const SpacePair& spaces, const std::string& tag,
                      std::optional<double> lambda,
                      std::vector<SweepRow>* bli_rows,
                      std::vector<SweepRow>* xlsim_rows) {
    if (S.eval_bli) {
      const EvalReport r = bli_evaluate(spaces.src, spaces.tgt, *test_lex,
                                        config.ks, sim, threads);
      const auto path = out("bli_" + tag + ".tsv");
      write_report(r, path);
      write_report_items(r, out("bli_" + tag + ".items.tsv"));
      report(path);
      if (lambda && bli_rows) bli_rows->push_back({*lambda, r.metric("P@1")});
    }
    if (S.eval_xlsim) {
      const EvalReport r = xlsim_evaluate(spaces.src, spaces.tgt, *gold);
      const auto path = out("xlsim_" + tag + ".tsv");
      write_report(r, path);
      write_report_items(r, out("xlsim_" + tag + ".items.tsv"));
      report(path);
      if (lambda && xlsim_rows)
        xlsim_rows->push_back({*lambda, r.metric("spearman")});
    }
  };

  // Static CLWE induction.
  if (S.induce_clwe) {
    auto f = filter_to_vocab(*train_lex, stat->src, stat->tgt);
    notes.emplace_back("clwe_train_pairs", std::to_string(f.lexicon.size()));
    notes.emplace_back("clwe_train_dropped", std::to_string(f.dropped));
    ClweResult clwe = induce_clwe(stat->src, stat->tgt, f.lexicon, threads);
    write_embedding_cache(clwe.src, out("clwe_src.lxrw"));
    write_embedding_cache(clwe.tgt, out("clwe_tgt.lxrw"));
    write_linear_map(clwe.map, out("clwe_map.lxrw"));
    artifact(out("clwe_src.lxrw"));
    artifact(out("clwe_tgt.lxrw"));
    artifact(out("clwe_map.lxrw"));
    stat = SpacePair{std::move(clwe.src), std::move(clwe.tgt)};
  }
  if (stat) evaluate(*stat, "clwe", std::nullopt, nullptr, nullptr);

  // Hard negatives are mined on the encoder spaces before any training.
  std::optional<TranslationLexicon> enc_lex;
  NegativeTable negatives;
  if (S.mine) {
    auto f = filter_to_vocab(*train_lex, enc->src, enc->tgt);
    notes.emplace_back("encoder_train_pairs", std::to_string(f.lexicon.size()));
    notes.emplace_back("encoder_train_dropped", std::to_string(f.dropped));
    enc_lex = std::move(f.lexicon);
    negatives = mine_hard_negatives(*enc_lex, enc->src, enc->tgt,
                                    tcfg.n_negatives, sim, threads);
    write_negative_table(negatives, enc->src, enc->tgt, out("negatives.tsv"));
    artifact(out("negatives.tsv"));
  }

  if (S.train) {
    TrainResult tr = train(*enc_lex, enc->src, enc->tgt, negatives, tcfg);
    write_adapter(tr.adapter, out("adapter.lxrw"));
    write_loss_log(tr.epoch_mean_loss, out("loss.csv"));
    artifact(out("adapter.lxrw"));
    artifact(out("loss.csv"));
    enc = SpacePair{adapt_space(enc->src, tr.adapter.weights, threads),
                    adapt_space(enc->tgt, tr.adapter.weights, threads)};
    if (S.save_spaces) {
      write_embedding_cache(enc->src, out("adapted_src.lxrw"));
      write_embedding_cache(enc->tgt, out("adapted_tgt.lxrw"));
      artifact(out("adapted_src.lxrw"));
      artifact(out("adapted_tgt.lxrw"));
    }
  }
  if (enc) evaluate(*enc, "encoder", std::nullopt, nullptr, nullptr);

  if (S.interpolate) {
    auto [cs, ce] = common_vocab(*stat, *enc);
    auto f = filter_to_vocab(*train_lex, cs.src, cs.tgt);
    LinearMap map =
        fit_static_to_encoder(cs.src, cs.tgt, ce.src, ce.tgt, f.lexicon);
    write_linear_map(map, out("static_to_encoder_map.lxrw"));
    artifact(out("static_to_encoder_map.lxrw"));
    notes.emplace_back("map_degenerate", map.degenerate ? "true" : "false");

    std::vector<double> lambdas = config.lambdas;
    std::sort(lambdas.begin(), lambdas.end());
    lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
    std::vector<SweepRow> bli_rows, xlsim_rows;
    for (double lambda : lambdas) {
      const SpacePair mixed = interpolate_pair(cs, ce, map, lambda, threads);
      const std::string tag = "lambda_" + format_number(lambda);
      evaluate(mixed, tag, lambda, &bli_rows, &xlsim_rows);
      if (S.save_spaces) {
        write_embedding_cache(mixed.src, out("interp_src_" + tag + ".lxrw"));
        write_embedding_cache(mixed.tgt, out("interp_tgt_" + tag + ".lxrw"));
        artifact(out("interp_src_" + tag + ".lxrw"));
        artifact(out("interp_tgt_" + tag + ".lxrw"));
      }
    }
    if (!bli_rows.empty()) {
      write_text(out("lambda_sweep_bli.csv"), sweep_csv("P@1", bli_rows));
      report(out("lambda_sweep_bli.csv"));
    }
    if (!xlsim_rows.empty()) {
      write_text(out("lambda_sweep_xlsim.csv"),
                 sweep_csv("spearman", xlsim_rows));
      report(out("lambda_sweep_xlsim.csv"));
    }
  }

  // Manifest: the resolved configuration plus content hashes. Feeding it
  // back to `run` reproduces every artifact.
  std::ostringstream m;
  m << "[manifest]\ntool = lexalign\nversion = " << LEXALIGN_VERSION
    << "\nseed = " << config.seed << '\n';
  for (const auto& [k, v] : notes) m << k << " = " << v << '\n';
  m << '\n' << config.to_ini() << "\n[inputs]\n";
  const std::pair<const char*, const fs::path*> inputs[] = {
      {"src_static", &P.src_static},       {"tgt_static", &P.tgt_static},
      {"src_encoder", &P.src_encoder},     {"tgt_encoder", &P.tgt_encoder},
      {"train_lexicon", &P.train_lexicon}, {"test_lexicon", &P.test_lexicon},
      {"xlsim_gold", &P.xlsim_gold}};
  for (const auto& [name, path] : inputs)
    if (!path->empty()) m << name << " = " << sha256_file(*path) << '\n';
  m << "\n[outputs]\n";
  std::vector<fs::path> outputs = summary.artifacts;
  outputs.insert(outputs.end(), summary.reports.begin(), summary.reports.end());
  for (const auto& o : outputs)
    m << o.filename().string() << " = " << sha256_file(o) << '\n';
  summary.manifest = out("manifest.ini");
  write_text(summary.manifest, m.str());
  return summary;
}

LoadStats cmd_ingest(const IngestOptions& options) {
  if (!fs::exists(options.vec))
    throw Error("no such file: " + options.vec.string());
  EmbeddingSpace space = load_text_embeddings(options.vec, options.max_words);
  const LoadStats stats = space.stats;
  if (options.normalize) space = l2_normalize(space);
  if (options.out.has_parent_path())
    fs::create_directories(options.out.parent_path());
  write_embedding_cache(space, options.out);
  return stats;
}

std::vector<SweepRow> cmd_sweep_lambda(const SweepOptions& o) {
  if (o.lambdas.empty()) throw Error("sweep: empty lambda list");
  for (double l : o.lambdas) InterpolationConfig{l}.validate();

  const SpacePair stat{load_normalized(o.src_static, std::nullopt),
                       load_normalized(o.tgt_static, std::nullopt)};
  const SpacePair enc{load_normalized(o.src_encoder, std::nullopt),
                      load_normalized(o.tgt_encoder, std::nullopt)};
  const LinearMap map = read_linear_map(o.map);
  auto [cs, ce] = common_vocab(stat, enc);

  std::optional<TranslationLexicon> test;
  std::optional<ScoredWordPairs> gold;
  if (o.task == SweepTask::bli)
    test = load_lexicon(o.test, LexiconRole::test);
  else
    gold = load_scored_pairs(o.test);

  std::vector<double> lambdas = o.lambdas;
  std::sort(lambdas.begin(), lambdas.end());
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());

  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    const SpacePair mixed = interpolate_pair(cs, ce, map, lambda, o.threads);
    if (o.task == SweepTask::bli)
      rows.push_back({lambda, bli_evaluate(mixed.src, mixed.tgt, *test, o.ks,
                                           o.similarity, o.threads)
                                  .metric("P@1")});
    else
      rows.push_back(
          {lambda, xlsim_evaluate(mixed.src, mixed.tgt, *gold).metric("spearman")});
  }
  if (!o.out.empty())
    write_text(o.out,
               sweep_csv(o.task == SweepTask::bli ? "P@1" : "spearman", rows));
  return rows;
}

}  // namespace lexalign
