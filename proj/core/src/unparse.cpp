#include "astseq/unparse.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

#include "astseq/error.hpp"
#include "astseq/literals.hpp"

namespace astseq {

using ast::Node;
using ast::NodeKind;

namespace {

// Binding strength, loosest first. Expr doubles as bitwise-or.
enum Prec : int {
  kNamedExpr,
  kTuple,
  kYield,
  kTest,
  kOr,
  kAnd,
  kNot,
  kCmp,
  kExpr,
  kBXor,
  kBAnd,
  kShift,
  kArith,
  kTerm,
  kFactor,
  kPower,
  kAwait,
  kAtom,
};

struct OpInfo {
  std::string_view name;
  std::string_view symbol;
  Prec prec;
};

constexpr std::array<OpInfo, 13> kBinOps = {{
    {"Add", "+", kArith},      {"Sub", "-", kArith},      {"Mult", "*", kTerm},
    {"MatMult", "@", kTerm},   {"Div", "/", kTerm},       {"Mod", "%", kTerm},
    {"LShift", "<<", kShift},  {"RShift", ">>", kShift},  {"BitOr", "|", kExpr},
    {"BitXor", "^", kBXor},    {"BitAnd", "&", kBAnd},    {"FloorDiv", "//", kTerm},
    {"Pow", "**", kPower},
}};

constexpr std::array<OpInfo, 4> kUnaryOps = {{
    {"Invert", "~", kFactor},
    {"Not", "not", kNot},
    {"UAdd", "+", kFactor},
    {"USub", "-", kFactor},
}};

constexpr std::array<OpInfo, 10> kCmpOps = {{
    {"Eq", "==", kCmp},   {"NotEq", "!=", kCmp}, {"Lt", "<", kCmp},
    {"LtE", "<=", kCmp},  {"Gt", ">", kCmp},     {"GtE", ">=", kCmp},
    {"Is", "is", kCmp},   {"IsNot", "is not", kCmp},
    {"In", "in", kCmp},   {"NotIn", "not in", kCmp},
}};

template <std::size_t N>
const OpInfo& lookup(const std::array<OpInfo, N>& table, const Node& op) {
  for (const auto& o : table)
    if (op.kind == NodeKind::Ctor && op.text == o.name) return o;
  throw MalformedTree("unknown operator '" + op.text + "'");
}

const std::array<std::u32string_view, 4> kAllQuotes = {U"'", U"\"", U"\"\"\"", U"'''"};

bool is_none(const Node& n) { return n.kind == NodeKind::None; }

bool printable(char32_t c) {
  if (c < 0x80) return c >= 0x20 && c < 0x7F;
  if (c < 0xA0) return false;
  if (c >= 0xD800 && c <= 0xDFFF) return false;
  return c != 0x2028 && c != 0x2029 && c != 0xFEFF;
}

void escape_into(std::u32string& out, char32_t c) {
  auto hex = [&](char tag, int width) {
    static const char* digits = "0123456789abcdef";
    out += U'\\';
    out += static_cast<char32_t>(tag);
    for (int i = width - 1; i >= 0; --i) out += static_cast<char32_t>(digits[(c >> (4 * i)) & 0xF]);
  };
  switch (c) {
    case U'\\': out += U"\\\\"; return;
    case U'\n': out += U"\\n"; return;
    case U'\t': out += U"\\t"; return;
    case U'\r': out += U"\\r"; return;
    default: break;
  }
  if (c < 0x100) hex('x', 2);
  else if (c < 0x10000) hex('u', 4);
  else hex('U', 8);
}

struct Literal {
  std::u32string body;
  std::vector<std::u32string_view> quotes;
};

// Escape `value` for placement inside a string literal whose quote is still
// to be chosen from `quote_types`; narrows the usable quotes.
Literal str_literal_helper(std::u32string_view value,
                           const std::vector<std::u32string_view>& quote_types,
                           bool escape_special_whitespace) {
  Literal r;
  for (char32_t c : value) {
    if (!escape_special_whitespace && (c == U'\n' || c == U'\t')) {
      r.body += c;
    } else if (c == U'\\' || !printable(c)) {
      escape_into(r.body, c);
    } else {
      r.body += c;
    }
  }
  std::vector<std::u32string_view> possible;
  bool has_newline = r.body.find(U'\n') != std::u32string::npos;
  for (auto q : quote_types) {
    if (has_newline && q.size() != 3) continue;
    if (r.body.find(q) != std::u32string::npos) continue;
    possible.push_back(q);
  }
  if (possible.empty()) {
    // Fall back to a fully escaped single-quoted form.
    std::string repr = literals::str_repr(value);
    r.body = literals::utf8_decode(std::string_view(repr).substr(1, repr.size() - 2));
    r.quotes = {U"'"};
    return r;
  }
  if (!r.body.empty()) {
    char32_t last = r.body.back();
    std::stable_sort(possible.begin(), possible.end(),
                     [&](auto a, auto b) { return (a[0] == last) < (b[0] == last); });
    if (possible[0][0] == last) {
      r.body.insert(r.body.end() - 1, U'\\');
    }
  }
  r.quotes = std::move(possible);
  return r;
}

class Unparser {
 public:
  explicit Unparser(bool avoid_backslashes = false) : avoid_bs_(avoid_backslashes) {}

  std::string run(const Node& n) {
    traverse(n);
    return std::move(out_);
  }

  void set_prec(Prec p, const Node& n) { prec_[&n] = p; }

 private:
  // ---- output helpers --------------------------------------------------
  void write(std::string_view s) { out_ += s; }
  void write(std::u32string_view s) { out_ += literals::utf8_encode(s); }

  void fill(std::string_view text = "") {
    if (!out_.empty()) out_ += '\n';
    out_.append(static_cast<std::size_t>(indent_) * 4, ' ');
    out_ += text;
  }

  Prec prec_of(const Node& n) const {
    auto it = prec_.find(&n);
    return it == prec_.end() ? kTest : it->second;
  }

  // Emits "(" ... ")" around `body` when the context binds tighter than `p`.
  template <typename F>
  void require_parens(Prec p, const Node& n, F body) {
    bool parens = prec_of(n) > p;
    if (parens) write("(");
    body();
    if (parens) write(")");
  }

  template <typename F>
  void interleave(const std::vector<Node>& items, std::string_view sep, F each) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i > 0) write(sep);
      each(items[i]);
    }
  }

  void traverse_list(const std::vector<Node>& items) {
    interleave(items, ", ", [&](const Node& n) { traverse(n); });
  }

  void items_view(const std::vector<Node>& items) {
    if (items.size() == 1) {
      traverse(items[0]);
      write(",");
    } else {
      traverse_list(items);
    }
  }

  void block(const Node& body) {
    write(":");
    ++indent_;
    for (const auto& s : body.children) traverse(s);
    --indent_;
  }

  const std::vector<Node>& list(const Node& n, std::string_view field) const {
    return n.field(field).children;
  }

  // ---- dispatch --------------------------------------------------------
  void traverse(const Node& n) {
    if (n.kind == NodeKind::List) {
      for (const auto& c : n.children) traverse(c);
      return;
    }
    if (n.kind != NodeKind::Ctor) throw MalformedTree("cannot render bare " + n.label());
    const std::string& t = n.text;
    if (t == "Module") return traverse(n.field("body"));
    if (statement(n)) return;
    if (expression(n)) return;
    throw MalformedTree("cannot render constructor '" + t + "'");
  }

  bool statement(const Node& n) {
    const std::string& t = n.text;
    if (t == "Expr") {
      fill();
      set_prec(kYield, n.field("value"));
      traverse(n.field("value"));
    } else if (t == "Import") {
      fill("import ");
      traverse_list(list(n, "names"));
    } else if (t == "ImportFrom") {
      fill("from ");
      write(std::string(std::stoul(n.field("level").text), '.'));
      if (!is_none(n.field("module"))) write(n.field("module").text);
      write(" import ");
      traverse_list(list(n, "names"));
    } else if (t == "Assign") {
      fill();
      for (const auto& target : list(n, "targets")) {
        set_prec(kTuple, target);
        traverse(target);
        write(" = ");
      }
      traverse(n.field("value"));
    } else if (t == "AugAssign") {
      fill();
      traverse(n.field("target"));
      write(" ");
      write(lookup(kBinOps, n.field("op")).symbol);
      write("= ");
      traverse(n.field("value"));
    } else if (t == "AnnAssign") {
      fill();
      const Node& target = n.field("target");
      bool parens = n.field("simple").text == "0" && target.is("Name");
      if (parens) write("(");
      traverse(target);
      if (parens) write(")");
      write(": ");
      traverse(n.field("annotation"));
      if (!is_none(n.field("value"))) {
        write(" = ");
        traverse(n.field("value"));
      }
    } else if (t == "Return") {
      fill("return");
      if (!is_none(n.field("value"))) {
        write(" ");
        traverse(n.field("value"));
      }
    } else if (t == "Pass" || t == "Break" || t == "Continue") {
      fill(t == "Pass" ? "pass" : t == "Break" ? "break" : "continue");
    } else if (t == "Delete") {
      fill("del ");
      traverse_list(list(n, "targets"));
    } else if (t == "Assert") {
      fill("assert ");
      traverse(n.field("test"));
      if (!is_none(n.field("msg"))) {
        write(", ");
        traverse(n.field("msg"));
      }
    } else if (t == "Global" || t == "Nonlocal") {
      fill(t == "Global" ? "global " : "nonlocal ");
      interleave(list(n, "names"), ", ", [&](const Node& id) { write(id.text); });
    } else if (t == "Raise") {
      fill("raise");
      if (is_none(n.field("exc"))) {
        if (!is_none(n.field("cause"))) throw MalformedTree("raise with cause but no exception");
      } else {
        write(" ");
        traverse(n.field("exc"));
        if (!is_none(n.field("cause"))) {
          write(" from ");
          traverse(n.field("cause"));
        }
      }
    } else if (t == "Try") {
      fill("try");
      block(n.field("body"));
      for (const auto& h : list(n, "handlers")) traverse(h);
      if (!list(n, "orelse").empty()) {
        fill("else");
        block(n.field("orelse"));
      }
      if (!list(n, "finalbody").empty()) {
        fill("finally");
        block(n.field("finalbody"));
      }
    } else if (t == "ExceptHandler") {
      fill("except");
      if (!is_none(n.field("type"))) {
        write(" ");
        traverse(n.field("type"));
      }
      if (!is_none(n.field("name"))) {
        write(" as ");
        write(n.field("name").text);
      }
      block(n.field("body"));
    } else if (t == "ClassDef") {
      decorators(n);
      fill("class " + n.field("name").text);
      const auto& bases = list(n, "bases");
      const auto& kws = list(n, "keywords");
      if (!bases.empty() || !kws.empty()) {
        write("(");
        bool comma = false;
        for (const auto& b : bases) {
          if (comma) write(", ");
          comma = true;
          traverse(b);
        }
        for (const auto& k : kws) {
          if (comma) write(", ");
          comma = true;
          traverse(k);
        }
        write(")");
      }
      block(n.field("body"));
    } else if (t == "FunctionDef" || t == "AsyncFunctionDef") {
      decorators(n);
      fill(t == "FunctionDef" ? "def " : "async def ");
      write(n.field("name").text);
      write("(");
      traverse(n.field("args"));
      write(")");
      if (!is_none(n.field("returns"))) {
        write(" -> ");
        traverse(n.field("returns"));
      }
      block(n.field("body"));
    } else if (t == "For" || t == "AsyncFor") {
      fill(t == "For" ? "for " : "async for ");
      set_prec(kTuple, n.field("target"));
      traverse(n.field("target"));
      write(" in ");
      traverse(n.field("iter"));
      block(n.field("body"));
      if (!list(n, "orelse").empty()) {
        fill("else");
        block(n.field("orelse"));
      }
    } else if (t == "If") {
      fill("if ");
      traverse(n.field("test"));
      block(n.field("body"));
      const Node* cur = &n;
      while (cur->field("orelse").children.size() == 1 &&
             cur->field("orelse").children[0].is("If")) {
        cur = &cur->field("orelse").children[0];
        fill("elif ");
        traverse(cur->field("test"));
        block(cur->field("body"));
      }
      if (!cur->field("orelse").children.empty()) {
        fill("else");
        block(cur->field("orelse"));
      }
    } else if (t == "While") {
      fill("while ");
      traverse(n.field("test"));
      block(n.field("body"));
      if (!list(n, "orelse").empty()) {
        fill("else");
        block(n.field("orelse"));
      }
    } else if (t == "With" || t == "AsyncWith") {
      fill(t == "With" ? "with " : "async with ");
      traverse_list(list(n, "items"));
      block(n.field("body"));
    } else {
      return false;
    }
    return true;
  }

  void decorators(const Node& n) {
    for (const auto& d : list(n, "decorator_list")) {
      fill("@");
      traverse(d);
    }
  }

  bool expression(const Node& n) {
    const std::string& t = n.text;
    if (t == "Name") {
      write(n.field("id").text);
    } else if (t == "Constant") {
      constant(n);
    } else if (t == "JoinedStr") {
      joined_str(n);
    } else if (t == "FormattedValue") {
      // Only reachable outside a JoinedStr; render as a one-field f-string.
      Node wrapper = ast::make_ctor("JoinedStr", {ast::make_list({n})});
      joined_str(wrapper);
    } else if (t == "NamedExpr") {
      require_parens(kNamedExpr, n, [&] {
        set_prec(kAtom, n.field("target"));
        set_prec(kAtom, n.field("value"));
        traverse(n.field("target"));
        write(" := ");
        traverse(n.field("value"));
      });
    } else if (t == "Await") {
      require_parens(kAwait, n, [&] {
        write("await");
        if (!is_none(n.field("value"))) {
          write(" ");
          set_prec(kAtom, n.field("value"));
          traverse(n.field("value"));
        }
      });
    } else if (t == "Yield") {
      require_parens(kYield, n, [&] {
        write("yield");
        if (!is_none(n.field("value"))) {
          write(" ");
          set_prec(kAtom, n.field("value"));
          traverse(n.field("value"));
        }
      });
    } else if (t == "YieldFrom") {
      require_parens(kYield, n, [&] {
        write("yield from ");
        set_prec(kAtom, n.field("value"));
        traverse(n.field("value"));
      });
    } else if (t == "List") {
      write("[");
      traverse_list(list(n, "elts"));
      write("]");
    } else if (t == "ListComp") {
      write("[");
      traverse(n.field("elt"));
      traverse(n.field("generators"));
      write("]");
    } else if (t == "GeneratorExp") {
      write("(");
      traverse(n.field("elt"));
      traverse(n.field("generators"));
      write(")");
    } else if (t == "SetComp") {
      write("{");
      traverse(n.field("elt"));
      traverse(n.field("generators"));
      write("}");
    } else if (t == "DictComp") {
      write("{");
      traverse(n.field("key"));
      write(": ");
      traverse(n.field("value"));
      traverse(n.field("generators"));
      write("}");
    } else if (t == "comprehension") {
      write(n.field("is_async").text == "1" ? " async for " : " for ");
      set_prec(kTuple, n.field("target"));
      traverse(n.field("target"));
      write(" in ");
      set_prec(static_cast<Prec>(kTest + 1), n.field("iter"));
      for (const auto& c : list(n, "ifs")) set_prec(static_cast<Prec>(kTest + 1), c);
      traverse(n.field("iter"));
      for (const auto& c : list(n, "ifs")) {
        write(" if ");
        traverse(c);
      }
    } else if (t == "IfExp") {
      require_parens(kTest, n, [&] {
        set_prec(static_cast<Prec>(kTest + 1), n.field("body"));
        set_prec(static_cast<Prec>(kTest + 1), n.field("test"));
        traverse(n.field("body"));
        write(" if ");
        traverse(n.field("test"));
        write(" else ");
        set_prec(kTest, n.field("orelse"));
        traverse(n.field("orelse"));
      });
    } else if (t == "Set") {
      if (list(n, "elts").empty()) {
        write("{*()}");
      } else {
        write("{");
        traverse_list(list(n, "elts"));
        write("}");
      }
    } else if (t == "Dict") {
      write("{");
      const auto& keys = list(n, "keys");
      const auto& values = list(n, "values");
      if (keys.size() != values.size()) throw MalformedTree("Dict keys/values length differ");
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i > 0) write(", ");
        if (is_none(keys[i])) {
          write("**");
          set_prec(kExpr, values[i]);
          traverse(values[i]);
        } else {
          traverse(keys[i]);
          write(": ");
          traverse(values[i]);
        }
      }
      write("}");
    } else if (t == "Tuple") {
      const auto& elts = list(n, "elts");
      bool parens = elts.empty() || prec_of(n) > kTuple;
      if (parens) write("(");
      items_view(elts);
      if (parens) write(")");
    } else if (t == "UnaryOp") {
      const OpInfo& op = lookup(kUnaryOps, n.field("op"));
      require_parens(op.prec, n, [&] {
        write(op.symbol);
        if (op.prec != kFactor) write(" ");
        set_prec(op.prec, n.field("operand"));
        traverse(n.field("operand"));
      });
    } else if (t == "BinOp") {
      const OpInfo& op = lookup(kBinOps, n.field("op"));
      require_parens(op.prec, n, [&] {
        bool right_assoc = op.name == "Pow";
        Prec next = static_cast<Prec>(op.prec + 1);
        set_prec(right_assoc ? next : op.prec, n.field("left"));
        set_prec(right_assoc ? op.prec : next, n.field("right"));
        traverse(n.field("left"));
        write(" ");
        write(op.symbol);
        write(" ");
        traverse(n.field("right"));
      });
    } else if (t == "Compare") {
      require_parens(kCmp, n, [&] {
        const auto& ops = list(n, "ops");
        const auto& comps = list(n, "comparators");
        if (ops.size() != comps.size() || ops.empty())
          throw MalformedTree("Compare ops/comparators mismatch");
        set_prec(static_cast<Prec>(kCmp + 1), n.field("left"));
        for (const auto& c : comps) set_prec(static_cast<Prec>(kCmp + 1), c);
        traverse(n.field("left"));
        for (std::size_t i = 0; i < ops.size(); ++i) {
          write(" ");
          write(lookup(kCmpOps, ops[i]).symbol);
          write(" ");
          traverse(comps[i]);
        }
      });
    } else if (t == "BoolOp") {
      bool is_and = n.field("op").is("And");
      Prec p = is_and ? kAnd : kOr;
      const auto& values = list(n, "values");
      if (values.size() < 2) throw MalformedTree("BoolOp needs two values");
      require_parens(p, n, [&] {
        int level = p;
        interleave(values, is_and ? " and " : " or ", [&](const Node& v) {
          ++level;
          set_prec(static_cast<Prec>(std::min<int>(level, kAtom)), v);
          traverse(v);
        });
      });
    } else if (t == "Attribute") {
      const Node& value = n.field("value");
      set_prec(kAtom, value);
      traverse(value);
      if (value.is("Constant") &&
          literals::classify(value.field("value").text) == literals::ConstantClass::Int)
        write(" ");
      write(".");
      write(n.field("attr").text);
    } else if (t == "Call") {
      set_prec(kAtom, n.field("func"));
      traverse(n.field("func"));
      write("(");
      bool comma = false;
      for (const auto& a : list(n, "args")) {
        if (comma) write(", ");
        comma = true;
        traverse(a);
      }
      for (const auto& k : list(n, "keywords")) {
        if (comma) write(", ");
        comma = true;
        traverse(k);
      }
      write(")");
    } else if (t == "Subscript") {
      set_prec(kAtom, n.field("value"));
      traverse(n.field("value"));
      write("[");
      const Node& slice = n.field("slice");
      bool simple_tuple = slice.is("Tuple") && !list(slice, "elts").empty() &&
                          std::none_of(list(slice, "elts").begin(), list(slice, "elts").end(),
                                       [](const Node& e) { return e.is("Starred"); });
      if (simple_tuple)
        items_view(list(slice, "elts"));
      else
        traverse(slice);
      write("]");
    } else if (t == "Starred") {
      write("*");
      set_prec(kExpr, n.field("value"));
      traverse(n.field("value"));
    } else if (t == "Slice") {
      if (!is_none(n.field("lower"))) traverse(n.field("lower"));
      write(":");
      if (!is_none(n.field("upper"))) traverse(n.field("upper"));
      if (!is_none(n.field("step"))) {
        write(":");
        traverse(n.field("step"));
      }
    } else if (t == "Lambda") {
      require_parens(kTest, n, [&] {
        write("lambda");
        std::string params = Unparser().run(n.field("args"));
        if (!params.empty()) {
          write(" ");
          traverse(n.field("args"));
        }
        write(": ");
        set_prec(kTest, n.field("body"));
        traverse(n.field("body"));
      });
    } else if (t == "arguments") {
      arguments(n);
    } else if (t == "arg") {
      write(n.field("arg").text);
      if (!is_none(n.field("annotation"))) {
        write(": ");
        traverse(n.field("annotation"));
      }
    } else if (t == "keyword") {
      if (is_none(n.field("arg"))) {
        write("**");
      } else {
        write(n.field("arg").text);
        write("=");
      }
      traverse(n.field("value"));
    } else if (t == "alias") {
      write(n.field("name").text);
      if (!is_none(n.field("asname"))) {
        write(" as ");
        write(n.field("asname").text);
      }
    } else if (t == "withitem") {
      traverse(n.field("context_expr"));
      if (!is_none(n.field("optional_vars"))) {
        write(" as ");
        traverse(n.field("optional_vars"));
      }
    } else {
      return false;
    }
    return true;
  }

  void arguments(const Node& n) {
    bool first = true;
    auto sep = [&] {
      if (!first) write(", ");
      first = false;
    };
    std::vector<const Node*> all;
    for (const auto& a : list(n, "posonlyargs")) all.push_back(&a);
    for (const auto& a : list(n, "args")) all.push_back(&a);
    const auto& defaults = list(n, "defaults");
    if (defaults.size() > all.size()) throw MalformedTree("more defaults than arguments");
    std::size_t first_default = all.size() - defaults.size();
    std::size_t posonly = list(n, "posonlyargs").size();
    for (std::size_t i = 0; i < all.size(); ++i) {
      sep();
      traverse(*all[i]);
      if (i >= first_default) {
        write("=");
        traverse(defaults[i - first_default]);
      }
      if (i + 1 == posonly) write(", /");
    }
    const auto& kwonly = list(n, "kwonlyargs");
    const auto& kw_defaults = list(n, "kw_defaults");
    if (kwonly.size() != kw_defaults.size()) throw MalformedTree("kw_defaults length mismatch");
    const Node& vararg = n.field("vararg");
    if (!is_none(vararg) || !kwonly.empty()) {
      sep();
      write("*");
      if (!is_none(vararg)) traverse(vararg);
    }
    for (std::size_t i = 0; i < kwonly.size(); ++i) {
      write(", ");
      traverse(kwonly[i]);
      if (!is_none(kw_defaults[i])) {
        write("=");
        traverse(kw_defaults[i]);
      }
    }
    const Node& kwarg = n.field("kwarg");
    if (!is_none(kwarg)) {
      sep();
      write("**");
      traverse(kwarg);
    }
  }

  // ---- constants and strings -------------------------------------------
  void constant(const Node& n) {
    const std::string& repr = n.field("value").text;
    using literals::ConstantClass;
    ConstantClass cls = literals::classify(repr);
    if (cls == ConstantClass::Ellipsis) {
      write("...");
      return;
    }
    if (n.field("kind").kind == NodeKind::Raw) write("u");
    if (cls == ConstantClass::Float || cls == ConstantClass::Imag) {
      std::string s = repr;
      auto p = s.find("inf");
      if (p != std::string::npos) s.replace(p, 3, "1e309");
      write(s);
      return;
    }
    if (cls == ConstantClass::Str && avoid_bs_) {
      auto value = literals::parse_str_repr(repr);
      if (!value) throw MalformedTree("bad string constant " + repr);
      std::vector<std::u32string_view> quotes(kAllQuotes.begin(), kAllQuotes.end());
      Literal lit = str_literal_helper(*value, quotes, false);
      write(lit.quotes[0]);
      write(lit.body);
      write(lit.quotes[0]);
      return;
    }
    write(repr);
  }

  // Builds the unquoted body pieces of an f-string: literal text (with
  // braces doubled) flagged true, replacement fields flagged false.
  void fstring_body(const Node& joined, std::vector<std::pair<std::u32string, bool>>& parts) {
    for (const auto& v : list(joined, "values")) {
      if (v.is("Constant")) {
        auto value = literals::parse_str_repr(v.field("value").text);
        if (!value) throw MalformedTree("f-string constant must be a str");
        std::u32string s;
        for (char32_t c : *value) {
          s += c;
          if (c == U'{' || c == U'}') s += c;
        }
        parts.emplace_back(std::move(s), true);
      } else if (v.is("FormattedValue")) {
        parts.emplace_back(formatted_value(v), false);
      } else {
        throw MalformedTree("unexpected " + v.text + " inside JoinedStr");
      }
    }
  }

  std::u32string formatted_value(const Node& n) {
    std::u32string out = U"{";
    Unparser inner(true);
    inner.set_prec(static_cast<Prec>(kTest + 1), n.field("value"));
    std::string expr = inner.run(n.field("value"));
    if (!expr.empty() && expr[0] == '{') out += U' ';
    if (expr.find('\\') != std::string::npos)
      throw MalformedTree("unable to avoid backslash in f-string expression");
    out += literals::utf8_decode(expr);
    const std::string& conv = n.field("conversion").text;
    if (conv != "-1") {
      out += U'!';
      if (conv == "115") out += U's';
      else if (conv == "114") out += U'r';
      else if (conv == "97") out += U'a';
      else throw MalformedTree("unknown f-string conversion " + conv);
    }
    const Node& spec = n.field("format_spec");
    if (!is_none(spec)) {
      if (!spec.is("JoinedStr")) throw MalformedTree("format spec must be a JoinedStr");
      out += U':';
      std::vector<std::pair<std::u32string, bool>> parts;
      fstring_body(spec, parts);
      for (auto& [s, is_const] : parts) out += s;
    }
    out += U'}';
    return out;
  }

  void joined_str(const Node& n) {
    write("f");
    std::vector<std::pair<std::u32string, bool>> parts;
    fstring_body(n, parts);
    std::vector<std::u32string_view> quotes(kAllQuotes.begin(), kAllQuotes.end());
    if (avoid_bs_) {
      std::u32string whole;
      for (auto& [s, c] : parts) whole += s;
      Literal lit = str_literal_helper(whole, quotes, false);
      write(lit.quotes[0]);
      write(lit.body);
      write(lit.quotes[0]);
      return;
    }
    std::u32string body;
    for (auto& [s, is_const] : parts) {
      Literal lit = str_literal_helper(s, quotes, is_const);
      body += lit.body;
      quotes = std::move(lit.quotes);
    }
    write(quotes[0]);
    write(body);
    write(quotes[0]);
  }

  std::string out_;
  int indent_ = 0;
  bool avoid_bs_ = false;
  std::unordered_map<const Node*, Prec> prec_;
};

}  // namespace

std::string unparse(const Node& root) {
  std::string s = Unparser().run(root);
  if (!s.empty()) s += '\n';
  return s;
}

}  // namespace astseq
