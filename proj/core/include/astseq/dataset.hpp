#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "astseq/augmentation.hpp"
#include "astseq/encoder.hpp"
#include "astseq/io_align.hpp"
#include "astseq/vocabulary.hpp"

namespace astseq {

enum class UnkPolicy { SkipFile, Keep };

struct TargetOptions {
  double p1 = 0.05;  // S1 token drop probability
  double p2 = 0.2;   // S2 token drop probability
  UnkPolicy unk = UnkPolicy::SkipFile;
};

struct Target {
  std::vector<int> ids;  // [S1', PAD, S2', PAD, S3, PAD, S4, EOS]
  std::size_t s1_total = 0, s1_kept = 0;
  std::size_t s2_total = 0, s2_kept = 0;
  std::size_t unks = 0;
};

/// Drops each S1 token with probability p1 and each S2 token with p2,
/// seeded; S3, S4 and the separators are never touched. Throws
/// UnkPolicyViolation under UnkPolicy::SkipFile when any token is unknown.
Target assemble_target(const SubsequenceBundle& b, const Vocabulary& v, const TargetOptions& opts,
                       std::uint64_t seed);
Target assemble_target(const IdBundle& ids, const TargetOptions& opts, std::uint64_t seed);

struct TargetSegments {
  std::vector<int> s1, s2, s3, s4;
};

/// Splits at the three PADs and the final EOS. Throws std::invalid_argument
/// when the layout is wrong.
TargetSegments split_target(const std::vector<int>& target);

struct TrainingRecord {
  std::string description;
  std::vector<std::vector<int>> io_content;
  std::vector<std::vector<int>> io_syntax;
  std::vector<int> target;
  /// Free-form provenance: source path, options, seed, name map.
  std::map<std::string, std::string> meta;

  friend bool operator==(const TrainingRecord&, const TrainingRecord&) = default;
};

/// One JSON object, no trailing newline.
std::string record_to_json(const TrainingRecord& r);
TrainingRecord record_from_json(std::string_view line);

struct PrepOptions {
  EncodeOptions encode{true, true};
  TargetOptions target;
  std::uint64_t seed = 0;
  std::size_t max_io_samples = 0;  // 0 keeps every example
  unsigned jobs = 1;
};

struct PrepSummary {
  std::size_t files = 0;
  std::size_t accepted = 0;
  std::size_t skipped = 0;
  std::map<std::string, std::size_t> reasons;
  std::size_t target_tokens = 0;
  std::size_t unk_tokens = 0;  // kept under UnkPolicy::Keep
  /// (path, reason) for every skipped file.
  std::vector<std::pair<std::string, std::string>> skipped_files;

  std::string to_text() const;
};

/// A directory holding description.txt is an instance: its io.json holds
/// the examples and every .py below it is a solution. Any other .py file is
/// a standalone program with no description or examples.
struct CorpusItem {
  std::filesystem::path path;      // the .py file
  std::string relpath;             // relative to the corpus root, '/'-separated
  const Instance* instance = nullptr;
};

struct Corpus {
  std::vector<Instance> instances;
  std::vector<CorpusItem> items;  // sorted by relpath
};

/// Throws std::runtime_error when the root is missing or an instance's
/// io.json is unreadable.
Corpus scan_corpus(const std::filesystem::path& root);

std::vector<IOSample> read_io_json(const std::filesystem::path& file);
void write_io_json(const std::filesystem::path& file, const std::vector<IOSample>& io);
Instance load_instance(const std::filesystem::path& dir);

/// Frame vocabulary over every program in the corpus plus the I/O literals
/// of its instances. `skipped` indexes into scan_corpus(root).items.
VocabBuild build_corpus_vocab(const std::filesystem::path& root, std::uint64_t min_count,
                              const EncodeOptions& opts, unsigned jobs = 1);

struct PrepResult {
  std::vector<TrainingRecord> records;
  PrepSummary summary;
};

PrepResult prep_corpus(const std::filesystem::path& root, const Vocabulary& vocab, const PrepOptions& opts);

/// Per-record seed: the path's FNV-1a digest mixed with the run seed.
std::uint64_t record_seed(std::string_view relpath, std::uint64_t seed);

// ---- length statistics ----

enum class Baseline { Subword, Whitespace, Char };
std::string_view baseline_name(Baseline b);
Baseline parse_baseline(std::string_view name);  // std::invalid_argument

/// Token count of raw source under a baseline tokenizer.
/// subword: whitespace dropped, every punctuation character (underscore
/// included) a token, letter runs split at lower-to-upper case changes and
/// letter/digit boundaries.
std::size_t baseline_length(Baseline b, std::string_view source);
std::vector<std::string> subword_tokens(std::string_view source);

struct LengthStats {
  std::string tokenizer;
  std::size_t n = 0;
  double mean = 0, median = 0, stddev = 0;
};

LengthStats summarize(std::string name, std::vector<double> values);

struct StatsResult {
  std::vector<std::string> files;                // encoded files, sorted
  std::vector<std::size_t> codec;                // |S3| + |S4| per file
  std::vector<std::vector<std::size_t>> baseline;  // per baseline, per file
  std::vector<Baseline> baselines;
  std::vector<LengthStats> table;  // codec first, then baselines
  std::size_t skipped = 0;

  /// Table-1 style rows: tokenizer, mean, median, std.
  std::string to_text() const;
};

/// Files that fail to encode are left out of every row, so the comparison
/// stays paired.
StatsResult stats(const std::vector<std::pair<std::string, std::string>>& files,
                  const std::vector<Baseline>& baselines, const EncodeOptions& opts, unsigned jobs = 1);

/// Sorted relative paths and contents of every .py file below root.
std::vector<std::pair<std::string, std::string>> read_py_files(const std::filesystem::path& root);

std::string read_file(const std::filesystem::path& p);

}  // namespace astseq
