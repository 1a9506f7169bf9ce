#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lexalign/align.hpp"
#include "lexalign/contrast.hpp"
#include "lexalign/evalsuite.hpp"
#include "lexalign/retrieve.hpp"

namespace lexalign {

namespace fs = std::filesystem;

/// Declarative description of one end-to-end run, read from an INI-style
/// file:
///
///   [paths]       src_static tgt_static src_encoder tgt_encoder
///                 train_lexicon test_lexicon xlsim_gold out_dir
///   [stages]      induce_clwe mine train interpolate eval_bli eval_xlsim
///                 static_aligned save_spaces
///   [train]       batch_size n_negatives epochs learning_rate weight_decay
///   [similarity]  scale
///   [interpolate] lambdas (comma list)
///   [eval]        ks (comma list)
///   [run]         seed threads max_words
///
/// Relative paths resolve against the config file's directory.
struct RunConfig {
  struct Paths {
    fs::path src_static, tgt_static;
    fs::path src_encoder, tgt_encoder;
    fs::path train_lexicon, test_lexicon, xlsim_gold;
    fs::path out_dir;
  } paths;

  struct Stages {
    bool induce_clwe = false;
    bool mine = false;
    bool train = false;
    bool interpolate = false;
    bool eval_bli = true;
    bool eval_xlsim = false;
    bool static_aligned = false;  // static inputs are already a CLWE space
    bool save_spaces = false;     // write adapted/interpolated spaces
  } stages;

  TrainConfig train;
  SimilarityConfig similarity;
  std::vector<double> lambdas;
  std::vector<std::size_t> ks{1, 5};
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::optional<std::size_t> max_words;

  static RunConfig parse(const std::string& text, const fs::path& base_dir);
  static RunConfig load(const fs::path& path);

  /// Checks stage dependencies, value ranges and that every referenced
  /// input exists. Throws ConfigError before any work is done.
  void validate() const;

  /// Canonical INI text; re-parsing it yields the same configuration.
  std::string to_ini() const;
};

struct RunSummary {
  std::vector<fs::path> reports;
  std::vector<fs::path> artifacts;
  fs::path manifest;
};

/// Executes the enabled stages in dependency order:
/// induce_clwe -> mine -> train -> map -> interpolate per lambda -> eval.
RunSummary cmd_run(const RunConfig& config);

struct IngestOptions {
  fs::path vec;
  fs::path out;
  std::optional<std::size_t> max_words;
  bool normalize = true;
};

/// .vec -> normalized binary cache.
LoadStats cmd_ingest(const IngestOptions& options);

enum class SweepTask { bli, xlsim };

struct SweepOptions {
  fs::path src_static, tgt_static;  // aligned static CLWE spaces
  fs::path src_encoder, tgt_encoder;
  fs::path map;                     // static -> encoder map
  fs::path test;                    // lexicon (bli) or scored pairs (xlsim)
  fs::path out;                     // CSV
  std::vector<double> lambdas;
  SweepTask task = SweepTask::bli;
  std::vector<std::size_t> ks{1, 5};
  SimilarityConfig similarity;
  unsigned threads = 1;
};

struct SweepRow {
  double lambda;
  double value;
};

/// CSV "lambda,<metric>" sorted by lambda; the metric is P@1 for BLI and
/// spearman for XLSIM.
std::vector<SweepRow> cmd_sweep_lambda(const SweepOptions& options);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

}  // namespace lexalign
