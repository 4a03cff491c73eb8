#include <algorithm>
#include <fstream>
#include <set>

#include "astseq/ast.hpp"
#include "astseq/builtins.hpp"
#include "astseq/bundle.hpp"
#include "astseq/encoder.hpp"
#include "astseq/error.hpp"
#include "astseq/parser.hpp"
#include "astseq/serialize.hpp"
#include "astseq/unparse.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace astseq;

namespace {

EncodeOptions plain() { return {}; }

EncodeOptions full() {
  EncodeOptions o;
  o.replace_names = true;
  o.strip_docs = true;
  return o;
}

std::vector<std::string> s4_texts(const SubsequenceBundle& b) {
  std::vector<std::string> out;
  for (const auto& t : b.s4) out.push_back(t.text);
  return out;
}

// Positions must be strictly increasing and point at equal S3 tokens.
bool is_indexed_sublist(const std::vector<FrameToken>& sub, const std::vector<std::size_t>& idx,
                        const std::vector<FrameToken>& s3) {
  if (sub.size() != idx.size()) return false;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= s3.size() || !(s3[idx[i]] == sub[i])) return false;
    if (i > 0 && idx[i] <= idx[i - 1]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("x = 0 matches the hand-worked golden") {
  std::ifstream in(testsupport::data_dir() / "golden" / "x_eq_0.tsv");
  REQUIRE(in);
  std::vector<std::string> s3, s4, cats;
  std::vector<std::size_t> s1;
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    std::string tag = line.substr(0, tab), rest = line.substr(tab + 1);
    if (tag == "s3") s3.push_back(rest);
    if (tag == "s1") s1.push_back(std::stoul(rest));
    if (tag == "s4") {
      auto t2 = rest.find('\t');
      cats.push_back(rest.substr(0, t2));
      s4.push_back(rest.substr(t2 + 1));
    }
  }
  auto b = encode("x = 0", plain());
  REQUIRE(b.s3.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(b.s3[i].text == s3[i]);
  CHECK(s4_texts(b) == s4);
  for (std::size_t i = 0; i < b.s4.size(); ++i) CHECK(category_name(b.s4[i].category) == cats[i]);
  CHECK(b.s1_index == s1);
  CHECK(b.s2.empty());
}

TEST_CASE("empty module") {
  auto b = encode("", plain());
  CHECK(b.s4.empty());
  REQUIRE(b.s3.size() == 1);
  CHECK(b.s3[0].text == "Module(body=[],type_ignores=[])");
  CHECK(b.s1.empty());
  CHECK(b.s2.empty());
}

TEST_CASE("outline has one token per module-level line") {
  CHECK(encode("a = 1\nb = 2\nprint(a + b)\n").s1.size() == 3);
  auto b = encode("def f(x):\n    y = x\n    y += 1\n    z = y * 2\n    w = z - 1\n    return w\n");
  REQUIRE(b.s1.size() == 1);
  CHECK(b.s1_index == std::vector<std::size_t>{0});
  CHECK(b.s3[0].newline);
  CHECK(b.s3[0].indent == 1);
}

TEST_CASE("core hint covers loop headers and bodies") {
  CHECK(encode("a = 1\nb = a + 2\nprint(b)\n").s2.empty());
  auto b = encode("for i in range(n):\n    s += i\n");
  CHECK(s4_texts(b) == std::vector<std::string>{"i", "range", "n", "s", "i"});
  CHECK(b.s2.size() == 5);
  CHECK(b.s2_index == std::vector<std::size_t>{0, 1, 2, 3, 4});

  // the statement after the loop is not part of the hint
  auto c = encode("while k:\n    k -= 1\nprint(k)\n");
  CHECK(c.s4.size() == 5);  // k k 1 print k
  CHECK(c.s2.size() == 3);
}

TEST_CASE("class bodies are hinted only inside methods") {
  auto b = encode("class A:\n    n = 1\n    def f(self):\n        return self.n\n");
  // A n 1 | f self self n
  CHECK(b.s4.size() == 7);
  CHECK(b.s2.size() == 4);
}

TEST_CASE("accessory categories") {
  auto b = encode("x = print(12, 0.5, 3.75, 'ab', True, 2j)\n");
  std::vector<std::pair<std::string, std::string>> got;
  for (const auto& t : b.s4) got.emplace_back(std::string(category_name(t.category)), t.text);
  std::vector<std::pair<std::string, std::string>> want = {
      {"user_name", "x"},  {"builtin", "print"}, {"digit", "1"},        {"digit", "2"},
      {"common_float", "0.5"}, {"ascii_char", "3"}, {"ascii_char", "."}, {"ascii_char", "7"},
      {"ascii_char", "5"}, {"ascii_char", "a"},   {"ascii_char", "b"},  {"builtin", "True"},
      {"ascii_char", "2"}, {"ascii_char", "j"}};
  CHECK(got == want);
  for (const auto& t : b.s4)
    if (t.category == AccessoryCategory::Digit) CHECK((t.text.size() == 1 && std::isdigit(t.text[0])));
}

TEST_CASE("strings are split into characters of their escaped form") {
  auto b = encode("s = 'a\\n\\xe9'\n");
  CHECK(s4_texts(b) == std::vector<std::string>{"s", "a", "\\", "n", "\\", "x", "e", "9"});
  // the frames between characters of one string are empty
  CHECK(b.s3[3].text.empty());
}

TEST_CASE("replace_names: the seventh and eighth variables") {
  const char* src =
      "a = 1\nb = 2\nc = 3\nd = 4\ne = 5\nf = 6\n"
      "student_num = a + b\nstudent_nums = [student_num, c]\n";
  auto b = encode(src, full());
  std::map<std::string, std::string> m(b.name_map.begin(), b.name_map.end());
  CHECK(m.at("student_num") == "var_7");
  CHECK(m.at("student_nums") == "var_8");
}

TEST_CASE("replace_names leaves imports, their attributes and builtins alone") {
  auto b = encode("import math\nx = math.pi\n", full());
  CHECK(s4_texts(b) == std::vector<std::string>{"math", "var_1", "math", "pi"});

  auto c = encode("s = input()\nprint(len(s))\n", full());
  CHECK(s4_texts(c) == std::vector<std::string>{"var_1", "input", "print", "len", "var_1"});
}

TEST_CASE("replace_names is consistent across every occurrence") {
  std::string src = "total = 0\n";
  for (int i = 0; i < 9; ++i) src += "total = total + " + std::to_string(i) + "\n";
  auto b = encode(src, full());
  std::size_t n = 0;
  for (const auto& t : b.s4)
    if (t.category == AccessoryCategory::UserName) {
      CHECK(t.text == "var_1");
      ++n;
    }
  CHECK(n == 19);
  CHECK(b.name_map.size() == 1);
}

TEST_CASE("replace_names categories and pool exhaustion") {
  auto b = encode("class Box:\n    def put(self, item):\n        self.item = item\n\ndef make(n):\n    return Box()\n",
                  full());
  std::map<std::string, std::string> m(b.name_map.begin(), b.name_map.end());
  CHECK(m.at("Box") == "class_1");
  CHECK(m.at("make") == "func_1");
  CHECK(m.at("n").rfind("arg_", 0) == 0);

  EncodeOptions tiny = full();
  tiny.pool = NamePool::make(2);
  CHECK_THROWS_AS(encode("a = 1\nb = 2\nc = 3\n", tiny), PoolExhausted);
  CHECK_NOTHROW(encode("a = 1\nb = 2\n", tiny));
}

TEST_CASE("replace_names skips pool candidates already used as names") {
  auto b = encode("var_1 = 3\nz = var_1\n", full());
  std::set<std::string> targets;
  for (const auto& [from, to] : b.name_map) targets.insert(to);
  CHECK(targets.size() == b.name_map.size());
  auto t = parse(unparse(serial::parse_dump(interleave(b.s3, b.s4))));
  CHECK(t.root.field("body").children.size() == 2);
}

TEST_CASE("strip_docs") {
  auto t = parse("def f():\n    \"\"\"only a docstring\"\"\"\n");
  auto s = strip_docs(t.root);
  const auto& body = s.field("body").children.at(0).field("body").children;
  REQUIRE(body.size() == 1);
  CHECK(body[0].is("Pass"));
  CHECK(parse(unparse(s)).root == s);

  auto plainmod = parse("x = 1\ny = 'not a docstring'\n");
  CHECK(strip_docs(plainmod.root) == plainmod.root);

  auto mixed = parse("\"\"\"module doc\"\"\"\nclass A:\n    'doc'\n    x = 1\n");
  auto stripped = strip_docs(mixed.root);
  CHECK(serial::dump(stripped) == serial::dump(parse("class A:\n    x = 1\n").root));
  EncodeOptions o;
  o.strip_docs = true;
  auto b = encode("\"\"\"module doc\"\"\"\nclass A:\n    'doc'\n    x = 1\n", o);
  for (const auto& t : b.s4) CHECK(t.text != "d");
}

TEST_CASE("pool names are disjoint from builtins") {
  auto pool = NamePool::make(64).all();
  for (const auto& n : pool) CHECK_FALSE(builtin_set().contains(n));
  CHECK(pool.size() == 256);
}

TEST_CASE("corpus: counts and interleave agree with the CPython oracle") {
  auto golden = testsupport::corpus_golden();
  const auto& files = testsupport::corpus();
  REQUIRE(golden.size() == files.size());
  std::size_t bad = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto b = encode(files[i].second, plain());
    const auto& g = golden[i];
    std::string glued = interleave(b.s3, b.s4);
    bool ok = b.s4.size() == g.s4 && b.s1.size() == g.s1 && b.s2.size() == g.s2 &&
              glued.size() == g.dump_len && ast::fnv1a(glued) == g.dump_fnv;
    std::size_t names = std::count_if(b.s4.begin(), b.s4.end(), [](const AccessoryToken& t) {
      return t.category == AccessoryCategory::UserName ||
             (t.category == AccessoryCategory::Builtin && serial::is_identifier(t.text) &&
              t.text != "True" && t.text != "False" && t.text != "None" && t.text != "Ellipsis");
    });
    ok = ok && names == g.s4_names;
    if (!ok) MESSAGE(g.relpath << ": s4 " << b.s4.size() << "/" << g.s4 << " s1 " << b.s1.size() << "/"
                               << g.s1 << " s2 " << b.s2.size() << "/" << g.s2 << " names " << names << "/"
                               << g.s4_names);
    bad += !ok;
  }
  CHECK(bad == 0);
}

TEST_CASE("corpus: bundle invariants under both option sets") {
  for (const auto& opts : {plain(), full()}) {
    std::size_t bad = 0;
    for (const auto& [path, src] : testsupport::corpus()) {
      auto b = encode(src, opts);
      bool ok = b.s3.size() == b.s4.size() + 1 && is_indexed_sublist(b.s1, b.s1_index, b.s3) &&
                is_indexed_sublist(b.s2, b.s2_index, b.s3);
      // every outline token opens a line at indent 1
      for (auto k : b.s1_index) ok = ok && b.s3[k].newline && b.s3[k].indent == 1;
      if (opts.replace_names) {
        std::set<std::string> from, to;
        auto pool = opts.pool.all();
        std::set<std::string> pool_set(pool.begin(), pool.end());
        for (const auto& [f, t] : b.name_map) {
          from.insert(f);
          to.insert(t);
          ok = ok && pool_set.contains(t);
        }
        ok = ok && from.size() == b.name_map.size() && to.size() == b.name_map.size();
      }
      if (!ok) MESSAGE(path);
      bad += !ok;
    }
    CHECK(bad == 0);
  }
}

TEST_CASE("encoding is deterministic") {
  for (std::size_t i = 0; i < testsupport::corpus().size(); i += 37) {
    const auto& src = testsupport::corpus()[i].second;
    CHECK(bundle_to_text(encode(src, full())) == bundle_to_text(encode(src, full())));
  }
}

TEST_CASE("bundle text round-trips") {
  auto b = encode("def f(a):\n    for i in a:\n        print(i)\n", full());
  auto back = bundle_from_text(bundle_to_text(b));
  CHECK(back == b);
  CHECK(back.s1_index == b.s1_index);
  CHECK(back.s2_index == b.s2_index);
  CHECK_THROWS(bundle_from_text("{\"format\": \"other\"}"));
  CHECK_THROWS(bundle_from_text("not json"));
}
