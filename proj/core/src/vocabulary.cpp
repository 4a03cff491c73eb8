#include "astseq/vocabulary.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "astseq/builtins.hpp"
#include "astseq/error.hpp"
#include "astseq/io_align.hpp"
#include "astseq/parallel.hpp"

namespace astseq {

namespace {

constexpr std::array<std::string_view, kNumSpecials> kSpecialNames = {
    "<PAD>", "<EOS>", "<ALIGN_PAD>", "<WAIT_PAD>", "<UNK>"};

constexpr std::string_view kMagic = "astseq-vocab";
constexpr int kFormatVersion = 1;

std::string accessory_key(AccessoryCategory c, std::string_view text) {
  std::string k(1, static_cast<char>('0' + static_cast<int>(c)));
  k += '\0';
  k += text;
  return k;
}

bool frame_order(const FrameCount& a, const FrameCount& b) {
  if (a.count != b.count) return a.count > b.count;
  return a.text < b.text;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t t = line.find('\t', start);
    out.push_back(line.substr(start, t == std::string_view::npos ? t : t - start));
    if (t == std::string_view::npos) return out;
    start = t + 1;
  }
}

std::uint64_t parse_u64(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::runtime_error(std::string("vocabulary file: bad ") + what + " '" + std::string(s) + "'");
  return v;
}

std::string_view header_value(std::string_view field, std::string_view key) {
  if (field.size() <= key.size() || field.substr(0, key.size()) != key || field[key.size()] != '=')
    throw std::runtime_error("vocabulary file: expected header field " + std::string(key));
  return field.substr(key.size() + 1);
}

}  // namespace

std::string_view special_name(Special s) { return kSpecialNames.at(static_cast<int>(s)); }

std::vector<AccessoryEntry> build_accessory_vocab(const NamePool& pool,
                                                  const std::vector<std::string>& builtins,
                                                  const std::vector<std::string>& common_floats) {
  std::vector<AccessoryEntry> out;
  std::unordered_set<std::string> names;
  auto add_name = [&](AccessoryCategory c, const std::string& n) {
    if (!names.insert(n).second) throw DuplicateEntry(std::string(category_name(c)) + " '" + n + "'");
    out.push_back({c, n});
  };
  for (const auto& n : pool.all()) add_name(AccessoryCategory::UserName, n);
  for (const auto& n : builtins) add_name(AccessoryCategory::Builtin, n);
  for (char d = '0'; d <= '9'; ++d) out.push_back({AccessoryCategory::Digit, std::string(1, d)});
  for (char c = 0x20; c < 0x7f; ++c) out.push_back({AccessoryCategory::AsciiChar, std::string(1, c)});
  std::unordered_set<std::string> floats;
  for (const auto& f : common_floats) {
    if (!floats.insert(f).second) throw DuplicateEntry("common_float '" + f + "'");
    out.push_back({AccessoryCategory::CommonFloat, f});
  }
  return out;
}

std::vector<AccessoryEntry> build_accessory_vocab(const EncodeOptions& opts) {
  return build_accessory_vocab(opts.pool, builtin_list(), opts.common_floats);
}

Vocabulary::Vocabulary(std::vector<AccessoryEntry> accessory, std::vector<FrameCount> frames,
                       std::uint64_t min_count)
    : accessory_(std::move(accessory)), min_count_(min_count) {
  std::erase_if(frames, [&](const FrameCount& f) { return f.count < min_count; });
  std::sort(frames.begin(), frames.end(), frame_order);
  frames_ = std::move(frames);
  index();
}

void Vocabulary::index() {
  frame_ids_.clear();
  accessory_ids_.clear();
  int id = kNumSpecials;
  for (const auto& a : accessory_) {
    if (!accessory_ids_.emplace(accessory_key(a.category, a.text), id++).second)
      throw DuplicateEntry(std::string(category_name(a.category)) + " '" + a.text + "'");
  }
  for (const auto& f : frames_) {
    if (!frame_ids_.emplace(f.text, id++).second)
      throw DuplicateEntry("frame '" + escape_token(f.text) + "'");
  }
}

int Vocabulary::frame_id(std::string_view text) const {
  auto it = frame_ids_.find(std::string(text));
  return it == frame_ids_.end() ? static_cast<int>(Special::Unk) : it->second;
}

int Vocabulary::accessory_id(AccessoryCategory c, std::string_view text) const {
  auto it = accessory_ids_.find(accessory_key(c, text));
  return it == accessory_ids_.end() ? static_cast<int>(Special::Unk) : it->second;
}

bool Vocabulary::has_accessory(AccessoryCategory c, std::string_view text) const {
  return accessory_ids_.count(accessory_key(c, text)) != 0;
}

TokenKind Vocabulary::kind(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= size()) throw UnknownId(id);
  if (id < kNumSpecials) return TokenKind::Special;
  if (static_cast<std::size_t>(id) < kNumSpecials + accessory_.size()) return TokenKind::Accessory;
  return TokenKind::Frame;
}

const AccessoryEntry& Vocabulary::accessory(int id) const {
  if (kind(id) != TokenKind::Accessory) throw UnknownId(id, "not an accessory token");
  return accessory_[id - kNumSpecials];
}

const FrameCount& Vocabulary::frame(int id) const {
  if (kind(id) != TokenKind::Frame) throw UnknownId(id, "not a frame token");
  return frames_[id - kNumSpecials - accessory_.size()];
}

std::string Vocabulary::text(int id) const {
  switch (kind(id)) {
    case TokenKind::Special: return std::string(kSpecialNames[id]);
    case TokenKind::Accessory: return accessory(id).text;
    case TokenKind::Frame: return frame(id).text;
  }
  return {};
}

void Vocabulary::save(std::ostream& os) const {
  os << kMagic << '\t' << kFormatVersion << "\tspecials=" << kNumSpecials
     << "\taccessory=" << accessory_.size() << "\tframes=" << frames_.size() << "\tmin_count=";
  if (min_count_ == kNeverKeep)
    os << "inf";
  else
    os << min_count_;
  os << '\n';
  int id = 0;
  for (auto n : kSpecialNames) os << id++ << "\tspecial\t" << n << "\t0\n";
  for (const auto& a : accessory_)
    os << id++ << '\t' << category_name(a.category) << '\t' << escape_token(a.text) << "\t0\n";
  for (const auto& f : frames_) os << id++ << "\tframe\t" << escape_token(f.text) << '\t' << f.count << '\n';
}

std::string Vocabulary::to_string() const {
  std::ostringstream os;
  save(os);
  return os.str();
}

Vocabulary Vocabulary::load(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("vocabulary file: empty");
  auto head = split_tabs(line);
  if (head.size() != 6 || head[0] != kMagic)
    throw std::runtime_error("vocabulary file: bad header");
  if (parse_u64(head[1], "version") != kFormatVersion)
    throw std::runtime_error("vocabulary file: unsupported version " + std::string(head[1]));
  if (parse_u64(header_value(head[2], "specials"), "specials") != kNumSpecials)
    throw std::runtime_error("vocabulary file: special token count differs");
  std::uint64_t n_acc = parse_u64(header_value(head[3], "accessory"), "accessory count");
  std::uint64_t n_frames = parse_u64(header_value(head[4], "frames"), "frame count");
  std::string_view mc = header_value(head[5], "min_count");

  Vocabulary v;
  v.min_count_ = mc == "inf" ? kNeverKeep : parse_u64(mc, "min_count");
  std::uint64_t expect = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split_tabs(line);
    if (f.size() != 4) throw std::runtime_error("vocabulary file: expected 4 fields at id " + std::to_string(expect));
    if (parse_u64(f[0], "id") != expect)
      throw std::runtime_error("vocabulary file: ids must be dense, expected " + std::to_string(expect));
    std::string text = unescape_token(f[2]);
    std::uint64_t count = parse_u64(f[3], "count");
    if (expect < static_cast<std::uint64_t>(kNumSpecials)) {
      if (f[1] != "special" || text != kSpecialNames[expect])
        throw std::runtime_error("vocabulary file: special tokens out of place");
    } else if (f[1] == "frame") {
      v.frames_.push_back({std::move(text), count});
    } else {
      if (!v.frames_.empty()) throw std::runtime_error("vocabulary file: accessory entry after frames");
      AccessoryCategory c;
      try {
        c = parse_category(f[1]);
      } catch (const std::invalid_argument&) {
        throw std::runtime_error("vocabulary file: unknown kind '" + std::string(f[1]) + "'");
      }
      v.accessory_.push_back({c, std::move(text)});
    }
    ++expect;
  }
  if (v.accessory_.size() != n_acc || v.frames_.size() != n_frames)
    throw std::runtime_error("vocabulary file: entry counts do not match header");
  v.index();
  return v;
}

Vocabulary Vocabulary::from_string(std::string_view text) {
  std::istringstream is{std::string(text)};
  return load(is);
}

std::vector<FrameCount> count_frames(const SubsequenceBundle& b) {
  std::map<std::string_view, std::uint64_t> m;
  for (const auto& t : b.s3) ++m[t.text];
  std::vector<FrameCount> out;
  out.reserve(m.size());
  for (auto& [k, c] : m) out.push_back({std::string(k), c});
  return out;
}

VocabBuild build_frame_vocab(std::span<const std::string> sources, std::uint64_t min_count,
                             const EncodeOptions& opts, unsigned jobs,
                             std::span<const std::string> literals) {
  std::vector<std::vector<FrameCount>> per_file(sources.size());
  std::vector<std::string> errors(sources.size());
  parallel_for(sources.size(), jobs, [&](std::size_t i) {
    try {
      per_file[i] = count_frames(encode(sources[i], opts));
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  VocabBuild out;
  out.files = sources.size();
  std::unordered_map<std::string, std::uint64_t> total;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (!errors[i].empty()) {
      out.skipped.emplace_back(i, std::move(errors[i]));
      continue;
    }
    for (auto& f : per_file[i]) total[f.text] += f.count;
  }
  std::vector<std::vector<FrameToken>> lit(literals.size());
  parallel_for(literals.size(), jobs, [&](std::size_t i) {
    try {
      lit[i] = tokenize_literal(literals[i]).syntax;
    } catch (const Error&) {
    }
  });
  for (const auto& frames : lit)
    for (const auto& f : frames) ++total[f.text];
  out.histogram.reserve(total.size());
  for (auto& [k, c] : total) out.histogram.push_back({k, c});
  std::sort(out.histogram.begin(), out.histogram.end(), frame_order);
  out.vocab = Vocabulary(build_accessory_vocab(opts), out.histogram, min_count);
  return out;
}

IdEncoding encode_ids(const SubsequenceBundle& b, const Vocabulary& v) {
  IdEncoding e;
  auto frames = [&](const std::vector<FrameToken>& seq, int segment, std::vector<int>& out) {
    out.reserve(seq.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
      int id = v.frame_id(seq[i].text);
      if (id == static_cast<int>(Special::Unk)) e.unks.push_back({segment, i, seq[i].text});
      out.push_back(id);
    }
  };
  frames(b.s1, 1, e.ids.s1);
  frames(b.s2, 2, e.ids.s2);
  frames(b.s3, 3, e.ids.s3);
  e.ids.s4.reserve(b.s4.size());
  for (std::size_t i = 0; i < b.s4.size(); ++i) {
    int id = v.accessory_id(b.s4[i].category, b.s4[i].text);
    if (id == static_cast<int>(Special::Unk)) e.unks.push_back({4, i, b.s4[i].text});
    e.ids.s4.push_back(id);
  }
  e.ids.name_map = b.name_map;
  return e;
}

SubsequenceBundle decode_ids(const IdBundle& ids, const Vocabulary& v) {
  SubsequenceBundle b;
  auto frames = [&](const std::vector<int>& seq, std::vector<FrameToken>& out) {
    for (int id : seq) out.push_back(FrameToken{v.frame(id).text, false, 0});
  };
  frames(ids.s1, b.s1);
  frames(ids.s2, b.s2);
  frames(ids.s3, b.s3);
  for (int id : ids.s4) {
    const auto& a = v.accessory(id);
    b.s4.push_back(AccessoryToken{a.text, a.category});
  }
  b.name_map = ids.name_map;
  return b;
}

std::vector<FrequencyRow> frequency_report(const Vocabulary& v) {
  std::vector<FrequencyRow> rows;
  rows.reserve(v.frames().size());
  std::size_t rank = 1;
  for (const auto& f : v.frames()) rows.push_back({f.text, f.count, rank++});
  return rows;
}

TailSummary tail_summary(std::span<const FrameCount> histogram, std::uint64_t rare_max) {
  TailSummary s;
  s.distinct = histogram.size();
  for (const auto& f : histogram) {
    s.total += f.count;
    if (f.count <= rare_max) ++s.rare;
  }
  s.rare_fraction = s.distinct ? static_cast<double>(s.rare) / s.distinct : 0.0;
  return s;
}

std::string escape_token(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_token(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) throw std::runtime_error("dangling backslash in token");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      default: throw std::runtime_error(std::string("bad escape \\") + s[i] + " in token");
    }
  }
  return out;
}

}  // namespace astseq
