#include "astseq/augmentation.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "astseq/literals.hpp"
#include "astseq/parallel.hpp"
#include "astseq/parser.hpp"

namespace astseq {

using ast::Node;

namespace {

constexpr std::array<std::pair<GeneratorKind, std::string_view>, 7> kGenNames = {{
    {GeneratorKind::Uniform, "uniform"},
    {GeneratorKind::QuantizedGaussian, "quantized_gaussian"},
    {GeneratorKind::AlmostSorted, "almost_sorted"},
    {GeneratorKind::AllSame, "all_same"},
    {GeneratorKind::AlmostSame, "almost_same"},
    {GeneratorKind::LengthControlled, "length_controlled"},
    {GeneratorKind::StringUniform, "string_uniform"},
}};

// ---- literal inspection -------------------------------------------------

std::optional<long long> int_value(const Node& e) {
  if (e.is("UnaryOp") && e.field("op").is("USub")) {
    auto v = int_value(e.field("operand"));
    if (v) return -*v;
    return std::nullopt;
  }
  if (!e.is("Constant")) return std::nullopt;
  const std::string& t = e.field("value").text;
  if (literals::classify(t) != literals::ConstantClass::Int) return std::nullopt;
  try {
    return std::stoll(t);
  } catch (const std::out_of_range&) {
    return std::nullopt;
  }
}

std::optional<double> float_value(const Node& e) {
  if (e.is("UnaryOp") && e.field("op").is("USub")) {
    auto v = float_value(e.field("operand"));
    if (v) return -*v;
    return std::nullopt;
  }
  if (!e.is("Constant")) return std::nullopt;
  const std::string& t = e.field("value").text;
  if (literals::classify(t) != literals::ConstantClass::Float) return std::nullopt;
  return literals::to_double(t);
}

std::optional<std::string> str_value(const Node& e) {
  if (!e.is("Constant")) return std::nullopt;
  const std::string& t = e.field("value").text;
  if (literals::classify(t) != literals::ConstantClass::Str) return std::nullopt;
  auto s = literals::parse_str_repr(t);
  if (!s) return std::nullopt;
  return literals::utf8_encode(*s);
}

struct SeedValue {
  SlotType type;
  std::vector<long long> ints;  // Int: one value; IntList: elements
  std::vector<std::string> strs;
  double f = 0;
  std::size_t length = 0;
};

SeedValue read_seed(const std::string& text) {
  Node e = parse_expression(text);
  SeedValue v{};
  if (auto i = int_value(e)) {
    v.type = SlotType::Int;
    v.ints = {*i};
    return v;
  }
  if (auto f = float_value(e)) {
    v.type = SlotType::Float;
    v.f = *f;
    return v;
  }
  if (auto s = str_value(e)) {
    v.type = SlotType::Str;
    v.strs = {*s};
    v.length = s->size();
    return v;
  }
  if (e.is("Constant")) {
    const std::string& t = e.field("value").text;
    if (t == "True" || t == "False") {
      v.type = SlotType::Bool;
      return v;
    }
  }
  if (e.is("List")) {
    const auto& elts = e.field("elts").children;
    v.length = elts.size();
    bool all_int = true, all_str = true;
    for (const auto& x : elts) {
      auto i = int_value(x);
      auto s = str_value(x);
      if (i) v.ints.push_back(*i);
      if (s) v.strs.push_back(*s);
      all_int = all_int && i.has_value();
      all_str = all_str && s.has_value();
    }
    if (all_int) {
      v.type = SlotType::IntList;
      return v;
    }
    if (all_str) {
      v.type = SlotType::StrList;
      return v;
    }
  }
  throw SchemaMismatch("unsupported input value: " + text);
}

Range widen(long long lo, long long hi, bool nonneg) {
  long long span = hi - lo;
  long long pad = std::max<long long>(span / 2, 5);
  Range r{lo - pad, hi + pad};
  if (nonneg) r.lo = std::max<long long>(r.lo, 0);
  return r;
}

// ---- drawing --------------------------------------------------------------

long long uniform_int(std::mt19937_64& rng, Range r) {
  return std::uniform_int_distribution<long long>(r.lo, r.hi)(rng);
}

long long qgauss_int(std::mt19937_64& rng, Range r) {
  double mid = (static_cast<double>(r.lo) + static_cast<double>(r.hi)) / 2.0;
  double sd = std::max(1e-9, (static_cast<double>(r.hi) - static_cast<double>(r.lo)) / 6.0);
  double x = std::round(std::normal_distribution<double>(mid, sd)(rng));
  return std::clamp(static_cast<long long>(x), r.lo, r.hi);
}

std::string list_text(const std::vector<long long>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(xs[i]);
  }
  return out + "]";
}

std::string quote(const std::string& s) { return literals::str_repr(literals::utf8_decode(s)); }

std::vector<long long> draw_ints(GeneratorKind kind, const GeneratorParams& p, Range values,
                                 std::size_t n, std::mt19937_64& rng) {
  std::vector<long long> xs(n);
  switch (kind) {
    case GeneratorKind::QuantizedGaussian:
      for (auto& x : xs) x = qgauss_int(rng, values);
      break;
    case GeneratorKind::AlmostSorted: {
      for (auto& x : xs) x = uniform_int(rng, values);
      std::sort(xs.begin(), xs.end());
      auto swaps = static_cast<std::size_t>(std::floor(p.swap_fraction * static_cast<double>(n)));
      for (std::size_t s = 0; s < swaps && n > 1; ++s) {
        std::size_t i = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
        std::swap(xs[i], xs[i + 1]);
      }
      break;
    }
    case GeneratorKind::AllSame: {
      long long c = uniform_int(rng, values);
      std::fill(xs.begin(), xs.end(), c);
      break;
    }
    case GeneratorKind::AlmostSame: {
      long long c = uniform_int(rng, values);
      std::bernoulli_distribution odd(p.exception_fraction);
      for (auto& x : xs) x = odd(rng) ? uniform_int(rng, values) : c;
      break;
    }
    default:
      for (auto& x : xs) x = uniform_int(rng, values);
  }
  return xs;
}

std::string draw_string(GeneratorKind kind, const GeneratorParams& p, const SlotSchema& slot,
                        std::size_t len, std::mt19937_64& rng) {
  const std::string& a = slot.alphabet;
  Range idx{0, static_cast<long long>(a.size()) - 1};
  std::vector<long long> picks;
  if (kind == GeneratorKind::StringUniform || kind == GeneratorKind::LengthControlled ||
      kind == GeneratorKind::Uniform)
    picks = draw_ints(GeneratorKind::Uniform, p, idx, len, rng);
  else
    picks = draw_ints(kind, p, idx, len, rng);
  std::string s;
  for (long long i : picks) s += a[static_cast<std::size_t>(i)];
  return s;
}

bool applies(GeneratorKind k, SlotType t) {
  switch (t) {
    case SlotType::Int:
    case SlotType::Float:
      return k == GeneratorKind::Uniform || k == GeneratorKind::QuantizedGaussian;
    case SlotType::Bool:
      return k == GeneratorKind::Uniform;
    case SlotType::Str:
    case SlotType::StrList:
      return k != GeneratorKind::QuantizedGaussian;
    case SlotType::IntList:
      return k != GeneratorKind::StringUniform;
  }
  return false;
}

// ---- process execution ------------------------------------------------------

void set_nonblock(int fd) { fcntl(fd, F_SETFL, fcntl(fd, F_GETFL) | O_NONBLOCK); }

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

std::string tail(const std::string& s, std::size_t n) {
  return s.size() <= n ? s : s.substr(s.size() - n);
}

}  // namespace

std::string_view generator_name(GeneratorKind k) {
  for (auto& [g, n] : kGenNames)
    if (g == k) return n;
  return "?";
}

GeneratorKind parse_generator(std::string_view name) {
  for (auto& [g, n] : kGenNames)
    if (n == name) return g;
  throw std::invalid_argument("unknown generator '" + std::string(name) + "'");
}

std::string_view slot_type_name(SlotType t) {
  switch (t) {
    case SlotType::Int: return "int";
    case SlotType::Bool: return "bool";
    case SlotType::Float: return "float";
    case SlotType::Str: return "str";
    case SlotType::IntList: return "list[int]";
    case SlotType::StrList: return "list[str]";
  }
  return "?";
}

std::vector<GeneratorSpec> default_mixture() {
  return {
      {GeneratorKind::Uniform, {}, 0.35},     {GeneratorKind::QuantizedGaussian, {}, 0.2},
      {GeneratorKind::AlmostSorted, {}, 0.15}, {GeneratorKind::AllSame, {}, 0.05},
      {GeneratorKind::AlmostSame, {}, 0.1},   {GeneratorKind::LengthControlled, {}, 0.1},
      {GeneratorKind::StringUniform, {}, 0.05},
  };
}

void validate_mixture(const std::vector<GeneratorSpec>& mixture) {
  if (mixture.empty()) throw std::invalid_argument("empty generator mixture");
  double sum = 0;
  for (const auto& g : mixture) {
    std::string name(generator_name(g.kind));
    if (!(g.weight >= 0)) throw std::invalid_argument(name + ": negative weight");
    sum += g.weight;
    const auto& p = g.params;
    if (p.swap_fraction < 0 || p.swap_fraction > 1) throw std::invalid_argument(name + ": swap_fraction outside [0,1]");
    if (p.exception_fraction < 0 || p.exception_fraction > 1)
      throw std::invalid_argument(name + ": exception_fraction outside [0,1]");
    if (p.values && p.values->lo > p.values->hi) throw std::invalid_argument(name + ": empty value range");
    if (p.lengths && (p.lengths->lo < 0 || p.lengths->lo > p.lengths->hi))
      throw std::invalid_argument(name + ": bad length range");
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("mixture weights sum to " + std::to_string(sum));
}

InputSchema infer_schema(const std::vector<IOSample>& seeds) {
  if (seeds.empty()) throw SchemaMismatch("no seed examples");
  const std::size_t n = seeds[0].inputs.size();
  std::vector<std::vector<SeedValue>> cols(n);
  for (const auto& s : seeds) {
    if (s.inputs.size() != n) throw SchemaMismatch("seed examples disagree on input count");
    for (std::size_t k = 0; k < n; ++k) cols[k].push_back(read_seed(s.inputs[k]));
  }

  InputSchema schema;
  for (std::size_t k = 0; k < n; ++k) {
    auto& col = cols[k];
    SlotSchema slot{};
    slot.type = col[0].type;
    for (const auto& v : col) {
      bool ok = v.type == slot.type;
      // an empty list reads as list[int]; let a typed sibling decide
      if (!ok && v.length == 0 && (v.type == SlotType::IntList || v.type == SlotType::StrList) &&
          (slot.type == SlotType::IntList || slot.type == SlotType::StrList)) {
        ok = true;
      }
      if (!ok && slot.type == SlotType::IntList && col[0].length == 0 && v.type == SlotType::StrList) {
        slot.type = SlotType::StrList;
        ok = true;
      }
      if (!ok) throw SchemaMismatch("slot " + std::to_string(k) + " has mixed types");
    }
    std::vector<long long> ints;
    std::vector<std::size_t> lens;
    std::set<char> chars;
    double fmin = 0, fmax = 0;
    bool first_f = true;
    for (const auto& v : col) {
      ints.insert(ints.end(), v.ints.begin(), v.ints.end());
      lens.push_back(v.type == SlotType::StrList ? v.strs.size() : v.length);
      for (const auto& s : v.strs)
        for (char c : s) chars.insert(c);
      if (v.type == SlotType::Float) {
        fmin = first_f ? v.f : std::min(fmin, v.f);
        fmax = first_f ? v.f : std::max(fmax, v.f);
        first_f = false;
      }
    }
    if (!ints.empty()) {
      auto [lo, hi] = std::minmax_element(ints.begin(), ints.end());
      slot.values = widen(*lo, *hi, *lo >= 0);
    } else {
      slot.values = {0, 9};
    }
    if (slot.type == SlotType::Str || slot.type == SlotType::StrList || slot.type == SlotType::IntList) {
      std::size_t lo = *std::min_element(lens.begin(), lens.end());
      std::size_t hi = *std::max_element(lens.begin(), lens.end());
      slot.lengths = {lo == 0 ? 0 : 1, static_cast<long long>(std::max<std::size_t>(hi * 2, lo + 4))};
    }
    if (slot.type == SlotType::StrList) {
      std::size_t hi = 1;
      for (const auto& v : col)
        for (const auto& s : v.strs) hi = std::max(hi, s.size());
      slot.values = {1, static_cast<long long>(hi)};  // element lengths
    }
    if (slot.type == SlotType::Float) {
      double span = std::max(fmax - fmin, 1.0);
      slot.fmin = fmin - span / 2;
      slot.fmax = fmax + span / 2;
    }
    if (slot.type == SlotType::Str || slot.type == SlotType::StrList) {
      bool lower = !chars.empty(), upper = !chars.empty(), digit = !chars.empty();
      for (char c : chars) {
        lower = lower && c >= 'a' && c <= 'z';
        upper = upper && c >= 'A' && c <= 'Z';
        digit = digit && c >= '0' && c <= '9';
      }
      if (lower || chars.empty())
        slot.alphabet = "abcdefghijklmnopqrstuvwxyz";
      else if (upper)
        slot.alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
      else if (digit)
        slot.alphabet = "0123456789";
      else
        slot.alphabet.assign(chars.begin(), chars.end());
      slot.alphabet.erase(std::remove_if(slot.alphabet.begin(), slot.alphabet.end(),
                                         [](char c) { return c == '\n' || c == '\r'; }),
                          slot.alphabet.end());
      if (slot.alphabet.empty()) slot.alphabet = "a";
    }
    schema.slots.push_back(slot);
  }

  // length links, first match wins
  for (std::size_t i = 0; i < n && !schema.length_slot; ++i) {
    if (schema.slots[i].type != SlotType::Int) continue;
    for (std::size_t j = 0; j < n; ++j) {
      SlotType t = schema.slots[j].type;
      if (j == i || (t != SlotType::IntList && t != SlotType::StrList && t != SlotType::Str)) continue;
      bool all = true;
      for (std::size_t r = 0; r < seeds.size() && all; ++r) {
        const auto& v = cols[j][r];
        std::size_t len = v.type == SlotType::StrList ? v.strs.size() : v.length;
        all = cols[i][r].ints[0] == static_cast<long long>(len);
      }
      if (all) {
        schema.length_slot = i;
        schema.sized_slot = j;
        break;
      }
    }
  }
  for (std::size_t j = 0; j < n && !schema.self_sized_slot; ++j) {
    if (schema.slots[j].type != SlotType::IntList) continue;
    bool all = true;
    for (std::size_t r = 0; r < seeds.size() && all; ++r) {
      const auto& xs = cols[j][r].ints;
      all = !xs.empty() && xs[0] == static_cast<long long>(xs.size()) - 1;
    }
    if (all) schema.self_sized_slot = j;
  }
  return schema;
}

std::string draw_slot(GeneratorKind kind, const GeneratorParams& p, const SlotSchema& slot,
                      std::mt19937_64& rng) {
  if (!applies(kind, slot.type)) kind = GeneratorKind::Uniform;
  Range values = p.values.value_or(slot.values);
  Range lengths = p.lengths.value_or(slot.lengths);
  switch (slot.type) {
    case SlotType::Int:
      return std::to_string(kind == GeneratorKind::QuantizedGaussian ? qgauss_int(rng, values)
                                                                     : uniform_int(rng, values));
    case SlotType::Bool:
      return std::bernoulli_distribution(0.5)(rng) ? "True" : "False";
    case SlotType::Float: {
      double lo = p.values ? static_cast<double>(p.values->lo) : slot.fmin;
      double hi = p.values ? static_cast<double>(p.values->hi) : slot.fmax;
      double x = kind == GeneratorKind::QuantizedGaussian
                     ? std::clamp(std::normal_distribution<double>((lo + hi) / 2, (hi - lo) / 6)(rng), lo, hi)
                     : std::uniform_real_distribution<double>(lo, hi)(rng);
      return literals::float_repr(std::round(x * 1000) / 1000);
    }
    case SlotType::Str: {
      auto len = static_cast<std::size_t>(uniform_int(rng, lengths));
      return quote(draw_string(kind, p, slot, len, rng));
    }
    case SlotType::IntList: {
      auto len = static_cast<std::size_t>(uniform_int(rng, lengths));
      return list_text(draw_ints(kind, p, values, len, rng));
    }
    case SlotType::StrList: {
      auto len = static_cast<std::size_t>(uniform_int(rng, lengths));
      std::string out = "[";
      for (std::size_t i = 0; i < len; ++i) {
        if (i) out += ", ";
        auto w = static_cast<std::size_t>(uniform_int(rng, slot.values));
        out += quote(draw_string(kind, p, slot, w, rng));
      }
      return out + "]";
    }
  }
  return {};
}

std::vector<std::vector<std::string>> generate_inputs(const std::vector<GeneratorSpec>& mixture,
                                                      const InputSchema& schema, std::size_t n,
                                                      std::uint64_t seed) {
  validate_mixture(mixture);
  bool usable = false;
  for (const auto& g : mixture) {
    if (g.weight <= 0) continue;
    for (const auto& s : schema.slots) usable = usable || applies(g.kind, s.type);
  }
  if (!usable && !schema.slots.empty()) throw SchemaMismatch("no generator in the mixture fits the input schema");

  std::vector<double> weights;
  for (const auto& g : mixture) weights.push_back(g.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::mt19937_64 rng(seed);

  std::vector<std::vector<std::string>> out;
  out.reserve(n);
  while (out.size() < n) {
    const GeneratorSpec& g = mixture[pick(rng)];
    // a generator that fits no slot would only duplicate uniform draws
    bool fits = schema.slots.empty();
    for (const auto& s : schema.slots) fits = fits || applies(g.kind, s.type);
    if (!fits) continue;

    std::vector<std::string> tuple(schema.slots.size());
    for (std::size_t k = 0; k < schema.slots.size(); ++k) {
      if (schema.length_slot && k == *schema.length_slot) continue;
      const SlotSchema& slot = schema.slots[k];
      if (schema.self_sized_slot && k == *schema.self_sized_slot) {
        Range lengths = g.params.lengths.value_or(slot.lengths);
        auto len = static_cast<std::size_t>(uniform_int(rng, {std::max<long long>(lengths.lo - 1, 0),
                                                              std::max<long long>(lengths.hi - 1, 0)}));
        auto xs = draw_ints(g.kind, g.params, g.params.values.value_or(slot.values), len, rng);
        xs.insert(xs.begin(), static_cast<long long>(len));
        tuple[k] = list_text(xs);
        continue;
      }
      tuple[k] = draw_slot(g.kind, g.params, slot, rng);
    }
    if (schema.length_slot) {
      // the linked count follows whatever the sized slot came out as
      Node e = parse_expression(tuple[*schema.sized_slot]);
      std::size_t len = 0;
      if (e.is("List"))
        len = e.field("elts").children.size();
      else if (auto s = str_value(e))
        len = s->size();
      tuple[*schema.length_slot] = std::to_string(len);
    }
    out.push_back(std::move(tuple));
  }
  return out;
}

std::vector<std::string> RunnerConfig::default_interpreter() {
  if (const char* env = std::getenv("ASTSEQ_PYTHON"); env && *env) {
    auto words = split_words(env);
    if (!words.empty()) return words;
  }
  return {"python3", "-I"};
}

std::string_view run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::Timeout: return "timeout";
    case RunStatus::Crash: return "crash";
    case RunStatus::OutputTooLarge: return "output_too_large";
  }
  return "?";
}

std::string render_stdin(const std::vector<std::string>& inputs) {
  std::string out;
  for (const auto& v : inputs) {
    Node e = parse_expression(v);
    if (auto s = str_value(e))
      out += *s;
    else
      out += v;
    out += '\n';
  }
  return out;
}

RunResult run_reference(const std::string& program, const std::vector<std::string>& inputs,
                        const RunnerConfig& cfg) {
  RunResult res;
  if (cfg.interpreter.empty() || cfg.time_limit_s <= 0 || cfg.memory_limit_mb == 0 || cfg.max_output_bytes == 0)
    throw std::invalid_argument("runner limits must be positive and the interpreter set");
  std::string stdin_text;
  try {
    stdin_text = render_stdin(inputs);
  } catch (const Error& e) {
    res.detail = std::string("input is not a literal: ") + e.what();
    return res;
  }

  std::vector<std::string> argv_s = cfg.interpreter;
  argv_s.push_back("-c");
  argv_s.push_back(program);
  std::vector<char*> argv;
  for (auto& a : argv_s) argv.push_back(a.data());
  argv.push_back(nullptr);

  int in_p[2], out_p[2], err_p[2];
  if (pipe2(in_p, O_CLOEXEC) || pipe2(out_p, O_CLOEXEC) || pipe2(err_p, O_CLOEXEC))
    throw std::runtime_error(std::string("pipe: ") + std::strerror(errno));

  auto cpu = static_cast<rlim_t>(std::ceil(cfg.time_limit_s)) + 1;
  auto mem = static_cast<rlim_t>(cfg.memory_limit_mb) * 1024 * 1024;
  pid_t pid = fork();
  if (pid < 0) throw std::runtime_error(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    setpgid(0, 0);
    dup2(in_p[0], 0);
    dup2(out_p[1], 1);
    dup2(err_p[1], 2);
    rlimit r{cpu, cpu};
    setrlimit(RLIMIT_CPU, &r);
    r = {mem, mem};
    setrlimit(RLIMIT_AS, &r);
    r = {0, 0};
    setrlimit(RLIMIT_FSIZE, &r);
    setrlimit(RLIMIT_CORE, &r);
    execvp(argv[0], argv.data());
    _exit(127);
  }
  close(in_p[0]);
  close(out_p[1]);
  close(err_p[1]);
  set_nonblock(in_p[1]);
  set_nonblock(out_p[0]);
  set_nonblock(err_p[0]);
  signal(SIGPIPE, SIG_IGN);

  using clock = std::chrono::steady_clock;
  auto deadline = clock::now() + std::chrono::duration<double>(cfg.time_limit_s);
  std::string out, err;
  std::size_t written = 0;
  int in_fd = in_p[1];
  bool out_open = true, err_open = true, timed_out = false, too_big = false;
  if (stdin_text.empty()) {
    close(in_fd);
    in_fd = -1;
  }
  char buf[65536];
  while (out_open || err_open) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
    if (left <= 0) {
      timed_out = true;
      break;
    }
    pollfd fds[3];
    int nf = 0;
    int out_i = -1, err_i = -1, in_i = -1;
    if (out_open) fds[out_i = nf++] = {out_p[0], POLLIN, 0};
    if (err_open) fds[err_i = nf++] = {err_p[0], POLLIN, 0};
    if (in_fd >= 0) fds[in_i = nf++] = {in_fd, POLLOUT, 0};
    int rc = poll(fds, nf, static_cast<int>(std::min<long long>(left, 1000)));
    if (rc < 0 && errno != EINTR) break;
    if (rc <= 0) continue;
    if (in_i >= 0 && fds[in_i].revents) {
      ssize_t w = write(in_fd, stdin_text.data() + written, stdin_text.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN) written = stdin_text.size();
      if (written == stdin_text.size()) {
        close(in_fd);
        in_fd = -1;
      }
    }
    auto drain = [&](int idx, int fd, std::string& dst, bool& open, std::size_t cap) {
      if (idx < 0 || !fds[idx].revents) return;
      ssize_t r = read(fd, buf, sizeof buf);
      if (r > 0) {
        dst.append(buf, static_cast<std::size_t>(r));
        if (dst.size() > cap) {
          if (&dst == &out) too_big = true;
          dst.resize(cap);
        }
      } else if (r == 0 || errno != EAGAIN) {
        open = false;
      }
    };
    drain(out_i, out_p[0], out, out_open, cfg.max_output_bytes);
    drain(err_i, err_p[0], err, err_open, 1 << 16);
    if (too_big) break;
  }
  if (in_fd >= 0) close(in_fd);
  close(out_p[0]);
  close(err_p[0]);
  if (timed_out || too_big) kill(-pid, SIGKILL);

  int status = 0;
  for (;;) {
    pid_t w = waitpid(pid, &status, timed_out || too_big ? 0 : WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) break;
    if (w == 0) {
      if (clock::now() > deadline) {
        timed_out = true;
        kill(-pid, SIGKILL);
        waitpid(pid, &status, 0);
        break;
      }
      usleep(1000);
    }
  }

  if (too_big) {
    res.status = RunStatus::OutputTooLarge;
    res.detail = "stdout exceeded " + std::to_string(cfg.max_output_bytes) + " bytes";
    return res;
  }
  if (timed_out || (WIFSIGNALED(status) && WTERMSIG(status) == SIGXCPU)) {
    res.status = RunStatus::Timeout;
    res.detail = "time limit " + std::to_string(cfg.time_limit_s) + "s";
    return res;
  }
  if (WIFSIGNALED(status)) {
    res.detail = "signal " + std::to_string(WTERMSIG(status)) + ": " + tail(err, 400);
    return res;
  }
  if (WEXITSTATUS(status) != 0) {
    res.detail = "exit " + std::to_string(WEXITSTATUS(status)) + ": " + tail(err, 400);
    return res;
  }

  std::vector<std::string> lines;
  std::istringstream is(out);
  for (std::string line; std::getline(is, line);) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto& line : lines) {
    bool literal = false;
    try {
      tokenize_literal(line);
      literal = true;
    } catch (const Error&) {
    }
    res.outputs.push_back(literal ? line : quote(line));
  }
  res.status = RunStatus::Ok;
  return res;
}

bool is_boolean_output(const IOSample& s) {
  return s.outputs.size() == 1 && (s.outputs[0] == "True" || s.outputs[0] == "False");
}

std::vector<IOSample> balance_outputs(const std::vector<IOSample>& pairs, std::uint64_t seed,
                                      std::size_t protect) {
  std::vector<std::size_t> t, f;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!is_boolean_output(pairs[i])) continue;
    (pairs[i].outputs[0] == "True" ? t : f).push_back(i);
  }
  std::vector<std::size_t>& major = t.size() > f.size() ? t : f;
  std::size_t minor = std::min(t.size(), f.size());
  std::size_t excess = major.size() > minor + 1 ? major.size() - minor - 1 : 0;
  std::vector<bool> drop(pairs.size(), false);
  if (excess) {
    std::vector<std::size_t> fresh, guarded;
    for (std::size_t i : major) (i < protect ? guarded : fresh).push_back(i);
    std::mt19937_64 rng(seed);
    std::shuffle(fresh.begin(), fresh.end(), rng);
    std::shuffle(guarded.begin(), guarded.end(), rng);
    fresh.insert(fresh.end(), guarded.begin(), guarded.end());
    for (std::size_t k = 0; k < excess; ++k) drop[fresh[k]] = true;
  }
  std::vector<IOSample> out;
  for (std::size_t i = 0; i < pairs.size(); ++i)
    if (!drop[i]) out.push_back(pairs[i]);
  return out;
}

AugmentResult augment_instance(const Instance& inst, const std::vector<GeneratorSpec>& mixture,
                               const RunnerConfig& cfg, const AugmentOptions& opts) {
  AugmentResult res{inst, {}};
  if (opts.min_pairs == 0) return res;
  if (inst.io.empty()) throw SchemaMismatch("instance '" + inst.name + "' has no seed examples");
  InputSchema schema = infer_schema(inst.io);
  validate_mixture(mixture);

  std::vector<RunResult> replay(inst.io.size());
  parallel_for(inst.io.size(), opts.jobs,
               [&](std::size_t i) { replay[i] = run_reference(inst.program, inst.io[i].inputs, cfg); });
  for (std::size_t i = 0; i < inst.io.size(); ++i)
    if (replay[i].status != RunStatus::Ok || replay[i].outputs != inst.io[i].outputs) ++res.report.seed_mismatches;

  const std::size_t n_seeds = inst.io.size();
  const bool boolean = std::all_of(inst.io.begin(), inst.io.end(), is_boolean_output);
  std::set<std::vector<std::string>> seen;
  for (const auto& s : inst.io) seen.insert(s.inputs);

  std::vector<IOSample> pairs = inst.io;
  auto have = [&] {
    if (!boolean) return pairs.size();
    return balance_outputs(pairs, opts.seed, n_seeds).size();
  };

  std::uint64_t round = 0;
  std::size_t draws = 0;
  const std::size_t max_draws = opts.max_attempts * 20;
  while (have() < opts.min_pairs && res.report.attempts < opts.max_attempts && draws < max_draws) {
    std::size_t want = opts.min_pairs - std::min(have(), opts.min_pairs);
    std::size_t batch = std::max<std::size_t>(want * (boolean ? 2 : 1), 8);
    // one stream per round keeps results independent of batch history
    std::uint64_t rseed = opts.seed ^ (0x9e3779b97f4a7c15ULL * (++round));
    auto inputs = generate_inputs(mixture, schema, batch, rseed);
    draws += inputs.size();
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (todo.size() + res.report.attempts >= opts.max_attempts) break;
      if (seen.insert(inputs[i]).second)
        todo.push_back(i);
      else
        ++res.report.duplicates;
    }
    std::vector<RunResult> runs(todo.size());
    parallel_for(todo.size(), opts.jobs,
                 [&](std::size_t k) { runs[k] = run_reference(inst.program, inputs[todo[k]], cfg); });
    for (std::size_t k = 0; k < todo.size(); ++k) {
      ++res.report.attempts;
      if (runs[k].status != RunStatus::Ok) {
        ++res.report.failed_runs;
        continue;
      }
      pairs.push_back({std::move(inputs[todo[k]]), std::move(runs[k].outputs)});
    }
  }

  if (boolean) {
    std::size_t before = pairs.size();
    pairs = balance_outputs(pairs, opts.seed, n_seeds);
    res.report.dropped = before - pairs.size();
  }
  res.instance.io = std::move(pairs);
  if (res.instance.io.size() < opts.min_pairs) throw BudgetExhausted(std::move(res), opts.min_pairs);
  return res;
}

}  // namespace astseq
