#include "astseq/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "astseq/decoder.hpp"
#include "astseq/error.hpp"
#include "astseq/parallel.hpp"
#include "astseq/parser.hpp"
#include "json.hpp"

namespace astseq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kPad = static_cast<int>(Special::Pad);
constexpr int kEos = static_cast<int>(Special::Eos);

std::string reason_of(const std::exception& e) {
  if (dynamic_cast<const SyntaxError*>(&e)) return "SyntaxError";
  if (dynamic_cast<const UnsupportedConstruct*>(&e)) return "UnsupportedConstruct";
  if (dynamic_cast<const PoolExhausted*>(&e)) return "PoolExhausted";
  if (dynamic_cast<const UnkPolicyViolation*>(&e)) return "UNK";
  if (dynamic_cast<const MalformedSerialization*>(&e)) return "MalformedSerialization";
  if (dynamic_cast<const MalformedTree*>(&e)) return "MalformedTree";
  if (dynamic_cast<const SchemaMismatch*>(&e) || dynamic_cast<const SlotArityMismatch*>(&e)) return "BadIO";
  return "Error";
}

std::string join_name_map(const std::vector<std::pair<std::string, std::string>>& m) {
  std::string out;
  for (const auto& [a, b] : m) {
    if (!out.empty()) out += ' ';
    out += a + ':' + b;
  }
  return out;
}

bool is_punct(unsigned char c) { return c < 0x80 && !std::isalnum(c) && !std::isspace(c); }

}  // namespace

Target assemble_target(const IdBundle& ids, const TargetOptions& opts, std::uint64_t seed) {
  if (opts.p1 < 0 || opts.p1 > 1 || opts.p2 < 0 || opts.p2 > 1)
    throw std::invalid_argument("dropout probabilities must lie in [0,1]");
  Target t;
  const int unk = static_cast<int>(Special::Unk);
  for (const auto* seq : {&ids.s1, &ids.s2, &ids.s3, &ids.s4})
    t.unks += static_cast<std::size_t>(std::count(seq->begin(), seq->end(), unk));
  if (t.unks && opts.unk == UnkPolicy::SkipFile)
    throw UnkPolicyViolation(std::to_string(t.unks) + " unknown tokens");

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution drop1(opts.p1), drop2(opts.p2);
  t.ids.reserve(ids.s1.size() + ids.s2.size() + ids.s3.size() + ids.s4.size() + 4);
  t.s1_total = ids.s1.size();
  for (int id : ids.s1)
    if (!drop1(rng)) {
      t.ids.push_back(id);
      ++t.s1_kept;
    }
  t.ids.push_back(kPad);
  t.s2_total = ids.s2.size();
  for (int id : ids.s2)
    if (!drop2(rng)) {
      t.ids.push_back(id);
      ++t.s2_kept;
    }
  t.ids.push_back(kPad);
  t.ids.insert(t.ids.end(), ids.s3.begin(), ids.s3.end());
  t.ids.push_back(kPad);
  t.ids.insert(t.ids.end(), ids.s4.begin(), ids.s4.end());
  t.ids.push_back(kEos);
  return t;
}

Target assemble_target(const SubsequenceBundle& b, const Vocabulary& v, const TargetOptions& opts,
                       std::uint64_t seed) {
  return assemble_target(encode_ids(b, v).ids, opts, seed);
}

TargetSegments split_target(const std::vector<int>& target) {
  if (target.empty() || target.back() != kEos) throw std::invalid_argument("target must end with EOS");
  TargetSegments s;
  std::vector<int>* seg[] = {&s.s1, &s.s2, &s.s3, &s.s4};
  int k = 0;
  for (std::size_t i = 0; i + 1 < target.size(); ++i) {
    int id = target[i];
    if (id == kEos) throw std::invalid_argument("EOS before the end of the target");
    if (id == kPad) {
      if (++k > 3) throw std::invalid_argument("more than three PAD separators");
      continue;
    }
    seg[k]->push_back(id);
  }
  if (k != 3) throw std::invalid_argument("expected three PAD separators, found " + std::to_string(k));
  return s;
}

std::string record_to_json(const TrainingRecord& r) {
  json j;
  j["description"] = r.description;
  j["io_content"] = r.io_content;
  j["io_syntax"] = r.io_syntax;
  j["target"] = r.target;
  j["meta"] = r.meta;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

TrainingRecord record_from_json(std::string_view line) {
  json j = json::parse(line);
  TrainingRecord r;
  r.description = j.at("description").get<std::string>();
  r.io_content = j.at("io_content").get<std::vector<std::vector<int>>>();
  r.io_syntax = j.at("io_syntax").get<std::vector<std::vector<int>>>();
  r.target = j.at("target").get<std::vector<int>>();
  r.meta = j.at("meta").get<std::map<std::string, std::string>>();
  return r;
}

std::string PrepSummary::to_text() const {
  std::ostringstream os;
  os << "files\t" << files << "\naccepted\t" << accepted << "\nskipped\t" << skipped << '\n';
  for (const auto& [k, n] : reasons) os << "skipped." << k << '\t' << n << '\n';
  os << "target_tokens\t" << target_tokens << "\nunk_tokens\t" << unk_tokens << '\n';
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<IOSample> read_io_json(const fs::path& file) {
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const json::exception& e) {
    throw std::runtime_error(file.string() + ": " + e.what());
  }
  std::vector<IOSample> out;
  for (const auto& e : j) {
    IOSample s;
    s.inputs = e.at("inputs").get<std::vector<std::string>>();
    s.outputs = e.at("outputs").get<std::vector<std::string>>();
    out.push_back(std::move(s));
  }
  return out;
}

void write_io_json(const fs::path& file, const std::vector<IOSample>& io) {
  json j = json::array();
  for (const auto& s : io) j.push_back({{"inputs", s.inputs}, {"outputs", s.outputs}});
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(1) << '\n';
}

Instance load_instance(const fs::path& dir) {
  Instance inst;
  inst.name = dir.filename().string();
  inst.description = read_file(dir / "description.txt");
  while (!inst.description.empty() && (inst.description.back() == '\n' || inst.description.back() == '\r'))
    inst.description.pop_back();
  if (fs::exists(dir / "io.json")) inst.io = read_io_json(dir / "io.json");
  std::vector<fs::path> py;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".py") py.push_back(e.path());
  std::sort(py.begin(), py.end());
  if (!py.empty()) inst.program = read_file(py.front());
  return inst;
}

Corpus scan_corpus(const fs::path& root) {
  if (!fs::is_directory(root)) throw std::runtime_error("not a directory: " + root.string());
  Corpus c;
  std::vector<fs::path> inst_dirs, py;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    if (e.path().filename() == "description.txt") inst_dirs.push_back(e.path().parent_path());
    if (e.path().extension() == ".py") py.push_back(e.path());
  }
  std::sort(inst_dirs.begin(), inst_dirs.end());
  c.instances.reserve(inst_dirs.size());
  for (const auto& d : inst_dirs) c.instances.push_back(load_instance(d));
  for (const auto& p : py) {
    CorpusItem it{p, fs::relative(p, root).generic_string(), nullptr};
    // innermost instance directory that contains the file
    std::size_t best = 0;
    for (std::size_t i = 0; i < inst_dirs.size(); ++i) {
      auto rel = fs::relative(p, inst_dirs[i]).generic_string();
      if (rel.rfind("..", 0) == 0) continue;
      std::size_t depth = inst_dirs[i].generic_string().size();
      if (depth >= best) {
        best = depth;
        it.instance = &c.instances[i];
      }
    }
    c.items.push_back(std::move(it));
  }
  std::sort(c.items.begin(), c.items.end(), [](const auto& a, const auto& b) { return a.relpath < b.relpath; });
  return c;
}

std::uint64_t record_seed(std::string_view relpath, std::uint64_t seed) {
  std::uint64_t h = ast::fnv1a(relpath);
  // splitmix64 finalizer so nearby seeds give unrelated streams
  std::uint64_t z = h ^ (seed + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

VocabBuild build_corpus_vocab(const fs::path& root, std::uint64_t min_count, const EncodeOptions& opts,
                              unsigned jobs) {
  Corpus corpus = scan_corpus(root);
  std::vector<std::string> sources(corpus.items.size());
  for (std::size_t i = 0; i < sources.size(); ++i) sources[i] = read_file(corpus.items[i].path);
  std::vector<std::string> literals;
  for (const auto& inst : corpus.instances)
    for (const auto& s : inst.io) literals.push_back(io_literal(s));
  return build_frame_vocab(sources, min_count, opts, jobs, literals);
}

PrepResult prep_corpus(const fs::path& root, const Vocabulary& vocab, const PrepOptions& opts) {
  Corpus corpus = scan_corpus(root);
  const std::size_t n = corpus.items.size();
  std::vector<std::optional<TrainingRecord>> recs(n);
  std::vector<std::string> reason(n);
  std::vector<std::size_t> unks(n, 0);

  parallel_for(n, opts.jobs, [&](std::size_t i) {
    const CorpusItem& it = corpus.items[i];
    std::string source;
    try {
      source = read_file(it.path);
    } catch (const std::exception&) {
      reason[i] = "IOError";
      return;
    }
    try {
      ast::SyntaxTree tree = parse(source);
      RenameResult tr = transform(tree.root, opts.encode);
      SubsequenceBundle b = encode_tree(tr.tree, opts.encode);
      b.name_map = tr.name_map;
      if (!(decode_tree(b.s3, b.s4) == tr.tree)) {
        reason[i] = "RoundtripMismatch";
        return;
      }
      std::uint64_t seed = record_seed(it.relpath, opts.seed);
      Target t = assemble_target(b, vocab, opts.target, seed);

      TrainingRecord r;
      if (it.instance) {
        r.description = it.instance->description;
        std::vector<IOSample> io = it.instance->io;
        if (opts.max_io_samples && io.size() > opts.max_io_samples) io.resize(opts.max_io_samples);
        if (!io.empty()) {
          IdGrid g;
          try {
            g = to_ids(align(io), vocab);
          } catch (const Error&) {
            reason[i] = "BadIO";
            return;
          }
          if (g.unks > 0 && opts.target.unk == UnkPolicy::SkipFile)
            throw UnkPolicyViolation(std::to_string(g.unks) + " unknown I/O tokens");
          t.unks += g.unks;
          r.io_content = std::move(g.content);
          r.io_syntax = std::move(g.syntax);
        }
        r.meta["instance"] = it.instance->name;
      }
      r.target = std::move(t.ids);
      r.meta["source"] = it.relpath;
      r.meta["seed"] = std::to_string(seed);
      std::ostringstream p;
      p << opts.target.p1 << ' ' << opts.target.p2;
      r.meta["dropout"] = p.str();
      r.meta["replace_names"] = opts.encode.replace_names ? "1" : "0";
      r.meta["strip_docs"] = opts.encode.strip_docs ? "1" : "0";
      r.meta["name_map"] = join_name_map(b.name_map);
      r.meta["s1_kept"] = std::to_string(t.s1_kept) + "/" + std::to_string(t.s1_total);
      r.meta["s2_kept"] = std::to_string(t.s2_kept) + "/" + std::to_string(t.s2_total);
      unks[i] = t.unks;
      recs[i] = std::move(r);
    } catch (const Error& e) {
      reason[i] = reason_of(e);
    } catch (const std::invalid_argument& e) {
      reason[i] = "BadIO";
    }
  });

  PrepResult out;
  out.summary.files = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (recs[i]) {
      ++out.summary.accepted;
      out.summary.target_tokens += recs[i]->target.size();
      out.summary.unk_tokens += unks[i];
      out.records.push_back(std::move(*recs[i]));
    } else {
      ++out.summary.skipped;
      ++out.summary.reasons[reason[i]];
      out.summary.skipped_files.emplace_back(corpus.items[i].relpath, reason[i]);
    }
  }
  return out;
}

// ---- statistics ----

std::string_view baseline_name(Baseline b) {
  switch (b) {
    case Baseline::Subword: return "subword";
    case Baseline::Whitespace: return "whitespace";
    case Baseline::Char: return "char";
  }
  return "?";
}

Baseline parse_baseline(std::string_view name) {
  for (Baseline b : {Baseline::Subword, Baseline::Whitespace, Baseline::Char})
    if (baseline_name(b) == name) return b;
  throw std::invalid_argument("unknown baseline '" + std::string(name) + "'");
}

std::vector<std::string> subword_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto cls = [](unsigned char c) {
    if (c >= 0x80) return 1;  // UTF-8 bytes stay with letters
    if (std::isdigit(c)) return 2;
    if (std::isupper(c)) return 3;
    return 1;
  };
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (is_punct(c)) {
      out.emplace_back(1, s[i++]);
      continue;
    }
    std::size_t j = i + 1;
    while (j < s.size()) {
      unsigned char d = static_cast<unsigned char>(s[j]);
      if (std::isspace(d) || is_punct(d)) break;
      unsigned char p = static_cast<unsigned char>(s[j - 1]);
      int a = cls(p), b = cls(d);
      bool split = (a == 2) != (b == 2) || (a == 1 && b == 3);
      if (split) break;
      ++j;
    }
    out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::size_t baseline_length(Baseline b, std::string_view source) {
  switch (b) {
    case Baseline::Subword: return subword_tokens(source).size();
    case Baseline::Whitespace: {
      std::size_t n = 0;
      bool in = false;
      for (char c : source) {
        bool sp = std::isspace(static_cast<unsigned char>(c));
        if (!sp && !in) ++n;
        in = !sp;
      }
      return n;
    }
    case Baseline::Char: {
      std::size_t n = 0;
      for (char c : source)
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
      return n;
    }
  }
  return 0;
}

LengthStats summarize(std::string name, std::vector<double> v) {
  LengthStats s;
  s.tokenizer = std::move(name);
  s.n = v.size();
  if (v.empty()) return s;
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double sq = 0;
  for (double x : v) sq += (x - s.mean) * (x - s.mean);
  s.stddev = v.size() > 1 ? std::sqrt(sq / static_cast<double>(v.size() - 1)) : 0.0;
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  s.median = v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2.0;
  return s;
}

StatsResult stats(const std::vector<std::pair<std::string, std::string>>& files,
                  const std::vector<Baseline>& baselines, const EncodeOptions& opts, unsigned jobs) {
  std::vector<std::optional<std::size_t>> codec(files.size());
  parallel_for(files.size(), jobs, [&](std::size_t i) {
    try {
      SubsequenceBundle b = encode(files[i].second, opts);
      codec[i] = b.s3.size() + b.s4.size();
    } catch (const Error&) {
    }
  });
  StatsResult r;
  r.baselines = baselines;
  r.baseline.resize(baselines.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!codec[i]) {
      ++r.skipped;
      continue;
    }
    r.files.push_back(files[i].first);
    r.codec.push_back(*codec[i]);
    for (std::size_t k = 0; k < baselines.size(); ++k)
      r.baseline[k].push_back(baseline_length(baselines[k], files[i].second));
  }
  auto as_double = [](const std::vector<std::size_t>& v) { return std::vector<double>(v.begin(), v.end()); };
  r.table.push_back(summarize("codec (|S3|+|S4|)", as_double(r.codec)));
  for (std::size_t k = 0; k < baselines.size(); ++k)
    r.table.push_back(summarize(std::string(baseline_name(baselines[k])), as_double(r.baseline[k])));
  return r;
}

std::string StatsResult::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "tokenizer\tfiles\tmean\tmedian\tstd\n";
  for (const auto& s : table)
    os << s.tokenizer << '\t' << s.n << '\t' << s.mean << '\t' << s.median << '\t' << s.stddev << '\n';
  if (skipped) os << "# " << skipped << " files could not be encoded and are excluded from every row\n";
  return os.str();
}

std::vector<std::pair<std::string, std::string>> read_py_files(const fs::path& root) {
  if (!fs::is_directory(root)) throw std::runtime_error("not a directory: " + root.string());
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().extension() == ".py")
      out.emplace_back(fs::relative(e.path(), root).generic_string(), read_file(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace astseq
