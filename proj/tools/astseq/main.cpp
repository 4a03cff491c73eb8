#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "astseq/augmentation.hpp"
#include "astseq/bundle.hpp"
#include "astseq/dataset.hpp"
#include "astseq/decoder.hpp"
#include "astseq/encoder.hpp"
#include "astseq/error.hpp"
#include "astseq/io_align.hpp"
#include "astseq/parallel.hpp"
#include "astseq/vocabulary.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace astseq;

namespace {

// Bad input from the user: missing files, unparsable programs, malformed
// bundles. Everything else that escapes is an internal error.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  try {
    return read_file(path);
  } catch (const std::runtime_error& e) {
    throw InputError(e.what());
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

struct CodecFlags {
  bool keep_names = false;
  bool keep_docs = false;
  std::size_t pool_size = 64;

  void add(CLI::App* app) {
    app->add_flag("--keep-names", keep_names, "do not replace user-defined names");
    app->add_flag("--keep-docs", keep_docs, "do not strip docstrings");
    app->add_option("--pool-size", pool_size, "candidates per name-pool category")->capture_default_str();
  }
  EncodeOptions options() const {
    EncodeOptions o;
    o.replace_names = !keep_names;
    o.strip_docs = !keep_docs;
    o.pool = NamePool::make(pool_size);
    return o;
  }
};

std::string pad_or(const std::optional<Special>& pad, const std::string& text) {
  return pad ? std::string(special_name(*pad)) : text;
}

std::string histogram_bucket(std::uint64_t c) {
  if (c <= 2) return std::to_string(c);
  std::uint64_t lo = 3, hi = 4;
  while (c > hi) {
    lo = hi + 1;
    hi = hi * 2;
  }
  return std::to_string(lo) + "-" + std::to_string(hi);
}

Vocabulary load_vocab(const std::string& path) {
  std::istringstream in(slurp(path));
  try {
    return Vocabulary::load(in);
  } catch (const std::runtime_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Syntax-tree codec and dataset tool for Python source"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();
  app.add_option("--jobs", jobs, "worker threads for file-level work (0 = all cores)")->capture_default_str();

  // encode
  auto* enc = app.add_subcommand("encode", "encode a Python file into an S1-S4 bundle");
  std::string enc_in, enc_out;
  CodecFlags enc_flags;
  enc->add_option("--in", enc_in, "source file, - for stdin")->required();
  enc->add_option("--out", enc_out, "bundle file (default stdout)");
  enc_flags.add(enc);

  // decode
  auto* dec = app.add_subcommand("decode", "rebuild source from a bundle's S3/S4");
  std::string dec_in, dec_out;
  dec->add_option("--in", dec_in, "bundle file, - for stdin")->required();
  dec->add_option("--out", dec_out, "source file (default stdout)");

  // roundtrip
  auto* rt = app.add_subcommand("roundtrip", "check encode/decode identity per file");
  std::string rt_in, rt_dir, rt_report;
  CodecFlags rt_flags;
  auto* rt_in_opt = rt->add_option("--in", rt_in, "one source file");
  rt->add_option("--dir", rt_dir, "every .py file below this directory")->excludes(rt_in_opt);
  rt->add_option("--report", rt_report, "per-file ok/fail lines (default stdout)");
  rt_flags.add(rt);

  // vocab
  auto* voc = app.add_subcommand("vocab", "build or inspect a vocabulary");
  voc->require_subcommand(1);
  auto* vb = voc->add_subcommand("build", "sweep a corpus for frame tokens");
  std::string vb_dir, vb_out;
  std::string vb_min = "1";
  CodecFlags vb_flags;
  vb->add_option("--dir", vb_dir, "corpus directory (instance I/O literals are swept too)")->required();
  vb->add_option("--out", vb_out, "vocabulary file")->required();
  vb->add_option("--min-count", vb_min, "keep frames seen at least this often ('inf' keeps none)")
      ->capture_default_str();
  vb_flags.add(vb);
  auto* vr = voc->add_subcommand("report", "frame-token frequency table");
  std::string vr_in;
  std::size_t vr_top = 20;
  vr->add_option("--vocab", vr_in, "vocabulary file")->required();
  vr->add_option("--top", vr_top, "rows of the ranked table (0 = all)")->capture_default_str();

  // align
  auto* al = app.add_subcommand("align", "align the I/O examples of one instance");
  std::string al_in, al_vocab, al_out;
  al->add_option("--in", al_in, "io.json: [{\"inputs\": [...], \"outputs\": [...]}, ...]")->required();
  al->add_option("--vocab", al_vocab, "emit ids from this vocabulary instead of token text");
  al->add_option("--out", al_out, "output JSON (default stdout)");

  // augment
  auto* au = app.add_subcommand("augment", "grow an instance's I/O examples with a reference program");
  std::string au_inst, au_out, au_python;
  AugmentOptions au_opts;
  RunnerConfig au_cfg;
  au->add_option("--instance", au_inst, "instance directory (description.txt, io.json, *.py)")->required();
  au->add_option("--out", au_out, "io.json to write (default stdout)");
  au->add_option("--min-pairs", au_opts.min_pairs, "target number of I/O pairs")->capture_default_str();
  au->add_option("--max-attempts", au_opts.max_attempts, "reference runs before giving up")->capture_default_str();
  au->add_option("--time-limit", au_cfg.time_limit_s, "seconds per run")->capture_default_str();
  au->add_option("--memory-mb", au_cfg.memory_limit_mb, "address-space cap per run")->capture_default_str();
  au->add_option("--python", au_python, "interpreter command (default $ASTSEQ_PYTHON or 'python3 -I')");

  // prep
  auto* pr = app.add_subcommand("prep", "build training records from a corpus");
  std::string pr_dir, pr_vocab, pr_out, pr_summary, pr_unk = "skip";
  PrepOptions pr_opts;
  CodecFlags pr_flags;
  pr->add_option("--dir", pr_dir, "corpus directory")->required();
  pr->add_option("--vocab", pr_vocab, "vocabulary file")->required();
  pr->add_option("--out", pr_out, "records, one JSON object per line")->required();
  pr->add_option("--summary", pr_summary, "summary file (default stderr)");
  pr->add_option("--p1", pr_opts.target.p1, "S1 drop probability")->capture_default_str();
  pr->add_option("--p2", pr_opts.target.p2, "S2 drop probability")->capture_default_str();
  pr->add_option("--unk", pr_unk, "skip: drop files with unknown tokens; keep: emit UNK")
      ->check(CLI::IsMember({"skip", "keep"}))
      ->capture_default_str();
  pr->add_option("--max-samples", pr_opts.max_io_samples, "I/O examples per record (0 = all)")
      ->capture_default_str();
  pr_flags.add(pr);

  // stats
  auto* st = app.add_subcommand("stats", "sequence lengths against baseline tokenizers");
  std::string st_dir, st_per_file;
  std::vector<std::string> st_base;
  CodecFlags st_flags;
  st->add_option("--dir", st_dir, "corpus directory")->required();
  st->add_option("--baseline", st_base, "subword, whitespace or char (repeatable; default subword)");
  st->add_option("--per-file", st_per_file, "paired per-file lengths as TSV");
  st_flags.add(st);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*enc) {
      SubsequenceBundle b = encode(slurp(enc_in), enc_flags.options());
      emit(enc_out, bundle_to_text(b));
    } else if (*dec) {
      SubsequenceBundle b;
      try {
        b = bundle_from_text(slurp(dec_in));
      } catch (const std::runtime_error& e) {
        throw InputError(e.what());
      }
      emit(dec_out, decode(b.s3, b.s4));
    } else if (*rt) {
      std::vector<std::pair<std::string, std::string>> files;
      if (!rt_dir.empty()) {
        try {
          files = read_py_files(rt_dir);
        } catch (const std::runtime_error& e) {
          throw InputError(e.what());
        }
      } else if (!rt_in.empty()) {
        files.emplace_back(rt_in, slurp(rt_in));
      } else {
        throw InputError("roundtrip needs --in or --dir");
      }
      EncodeOptions o = rt_flags.options();
      std::vector<RoundtripReport> reps(files.size());
      parallel_for(files.size(), jobs, [&](std::size_t i) { reps[i] = roundtrip_check(files[i].second, o); });
      std::ostringstream os;
      std::size_t ok = 0;
      for (std::size_t i = 0; i < files.size(); ++i) {
        if (reps[i].ok) {
          ++ok;
          os << "ok\t" << files[i].first << '\n';
        } else {
          os << "fail\t" << files[i].first << '\t' << reps[i].diagnostics << '\n';
        }
      }
      os << "# " << ok << "/" << files.size() << " files round-trip\n";
      emit(rt_report, os.str());
      if (!rt_report.empty()) std::cerr << ok << "/" << files.size() << " files round-trip\n";
      return ok == files.size() ? 0 : 1;
    } else if (*vb) {
      std::uint64_t min_count = kNeverKeep;
      if (vb_min != "inf") {
        try {
          min_count = std::stoull(vb_min);
        } catch (const std::exception&) {
          throw InputError("--min-count must be a number or 'inf'");
        }
      }
      Corpus corpus;
      VocabBuild build;
      try {
        corpus = scan_corpus(vb_dir);
        build = build_corpus_vocab(vb_dir, min_count, vb_flags.options(), jobs);
      } catch (const std::runtime_error& e) {
        throw InputError(e.what());
      }
      emit(vb_out, build.vocab.to_string());
      std::cerr << "swept " << build.files - build.skipped.size() << " of " << build.files << " files; "
                << build.vocab.frame_size() << " frame tokens kept of " << build.histogram.size()
                << " distinct; vocabulary size " << build.vocab.size() << '\n';
      for (const auto& [i, why] : build.skipped)
        std::cerr << "skipped\t" << corpus.items[i].relpath << '\t' << why << '\n';
    } else if (*vr) {
      Vocabulary v = load_vocab(vr_in);
      auto rows = frequency_report(v);
      TailSummary t = tail_summary(v.frames());
      std::ostringstream os;
      os << "# frames " << t.distinct << " total " << t.total << " count<=2 " << t.rare << " ("
         << (t.distinct ? 100.0 * t.rare_fraction : 0.0) << "%)\n";
      os << "rank\tcount\ttoken\n";
      std::size_t n = vr_top == 0 ? rows.size() : std::min(vr_top, rows.size());
      for (std::size_t i = 0; i < n; ++i)
        os << rows[i].rank << '\t' << rows[i].count << '\t' << (rows[i].text.empty() ? "(empty)" : escape_token(rows[i].text)) << '\n';
      os << "# count\tdistinct_tokens\n";
      std::vector<std::pair<std::string, std::size_t>> hist;
      for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
        std::string b = histogram_bucket(it->count);
        if (hist.empty() || hist.back().first != b)
          hist.emplace_back(b, 1);
        else
          ++hist.back().second;
      }
      for (const auto& [b, c] : hist) os << b << '\t' << c << '\n';
      std::cout << os.str();
    } else if (*al) {
      std::vector<IOSample> io;
      try {
        io = read_io_json(al_in);
      } catch (const std::exception& e) {
        throw InputError(e.what());
      }
      if (io.empty()) throw InputError(al_in + ": no examples");
      AlignedIOMatrix m = align(io);
      nlohmann::json j;
      j["slots"] = nlohmann::json::array();
      for (const auto& s : m.slots) j["slots"].push_back({s.begin, s.end});
      if (!al_vocab.empty()) {
        IdGrid g = to_ids(m, load_vocab(al_vocab));
        j["content"] = g.content;
        j["syntax"] = g.syntax;
        j["unks"] = g.unks;
      } else {
        for (std::size_t r = 0; r < m.rows(); ++r) {
          nlohmann::json c = nlohmann::json::array(), s = nlohmann::json::array();
          for (std::size_t k = 0; k < m.cols(); ++k) {
            c.push_back(pad_or(m.content[r][k].pad, m.content[r][k].token.text));
            s.push_back(pad_or(m.syntax[r][k].pad, m.syntax[r][k].text));
          }
          j["content"].push_back(std::move(c));
          j["syntax"].push_back(std::move(s));
        }
      }
      emit(al_out, j.dump(1) + "\n");
    } else if (*au) {
      Instance inst;
      try {
        inst = load_instance(au_inst);
      } catch (const std::exception& e) {
        throw InputError(e.what());
      }
      if (inst.program.empty()) throw InputError(au_inst + ": no reference program (*.py)");
      if (!au_python.empty()) {
        std::istringstream ws(au_python);
        au_cfg.interpreter.clear();
        for (std::string w; ws >> w;) au_cfg.interpreter.push_back(w);
      }
      au_opts.seed = seed;
      au_opts.jobs = jobs;
      AugmentResult res;
      int code = 0;
      try {
        res = augment_instance(inst, default_mixture(), au_cfg, au_opts);
      } catch (const BudgetExhausted& e) {
        std::cerr << "warning: " << e.what() << '\n';
        res = e.partial();
        code = 1;
      } catch (const SchemaMismatch& e) {
        throw InputError(e.what());
      }
      if (au_out.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& s : res.instance.io) j.push_back({{"inputs", s.inputs}, {"outputs", s.outputs}});
        std::cout << j.dump(1) << '\n';
      } else {
        write_io_json(au_out, res.instance.io);
      }
      const auto& r = res.report;
      std::cerr << res.instance.io.size() << " pairs; runs " << r.attempts << ", failed " << r.failed_runs
                << ", duplicate inputs " << r.duplicates << ", dropped for balance " << r.dropped
                << ", seed mismatches " << r.seed_mismatches << '\n';
      return code;
    } else if (*pr) {
      Vocabulary v = load_vocab(pr_vocab);
      pr_opts.encode = pr_flags.options();
      pr_opts.target.unk = pr_unk == "keep" ? UnkPolicy::Keep : UnkPolicy::SkipFile;
      pr_opts.seed = seed;
      pr_opts.jobs = jobs;
      PrepResult res;
      try {
        res = prep_corpus(pr_dir, v, pr_opts);
      } catch (const std::runtime_error& e) {
        throw InputError(e.what());
      }
      std::ostringstream os;
      for (const auto& r : res.records) os << record_to_json(r) << '\n';
      emit(pr_out, os.str());
      std::string summary = res.summary.to_text();
      for (const auto& [p, why] : res.summary.skipped_files) summary += "skip\t" + p + '\t' + why + '\n';
      if (pr_summary.empty())
        std::cerr << summary;
      else
        emit(pr_summary, summary);
    } else if (*st) {
      std::vector<Baseline> bases;
      for (const auto& b : st_base) {
        try {
          bases.push_back(parse_baseline(b));
        } catch (const std::invalid_argument& e) {
          throw InputError(e.what());
        }
      }
      if (bases.empty()) bases.push_back(Baseline::Subword);
      std::vector<std::pair<std::string, std::string>> files;
      try {
        files = read_py_files(st_dir);
      } catch (const std::runtime_error& e) {
        throw InputError(e.what());
      }
      StatsResult r = stats(files, bases, st_flags.options(), jobs);
      std::cout << r.to_text();
      if (!st_per_file.empty()) {
        std::ostringstream os;
        os << "file\tcodec";
        for (auto b : bases) os << '\t' << baseline_name(b);
        os << '\n';
        for (std::size_t i = 0; i < r.files.size(); ++i) {
          os << r.files[i] << '\t' << r.codec[i];
          for (std::size_t k = 0; k < bases.size(); ++k) os << '\t' << r.baseline[k][i];
          os << '\n';
        }
        emit(st_per_file, os.str());
      }
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const astseq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
