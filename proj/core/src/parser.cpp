#include "astseq/parser.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <unordered_set>

#include "astseq/error.hpp"
#include "astseq/literals.hpp"
#include "lexer.hpp"

namespace astseq {

using ast::Node;
using ast::make_atom;
using ast::make_constant;
using ast::make_ctor;
using ast::make_ident;
using ast::make_int;
using ast::make_list;
using ast::make_none;
using ast::make_raw;
using detail::Tok;
using detail::Token;

namespace {

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> k = {
      "False",  "None",   "True",    "and",      "as",       "assert", "async",
      "await",  "break",  "class",   "continue", "def",      "del",    "elif",
      "else",   "except", "finally", "for",      "from",     "global", "if",
      "import", "in",     "is",      "lambda",   "nonlocal", "not",    "or",
      "pass",   "raise",  "return",  "try",      "while",    "with",   "yield"};
  return k;
}

constexpr int kMaxFStringDepth = 2;

std::optional<std::string_view> augassign_op(std::string_view op) {
  static const std::array<std::pair<std::string_view, std::string_view>, 13> ops = {{
      {"+=", "Add"},     {"-=", "Sub"},     {"*=", "Mult"},    {"@=", "MatMult"},
      {"/=", "Div"},     {"%=", "Mod"},     {"&=", "BitAnd"},  {"|=", "BitOr"},
      {"^=", "BitXor"},  {"<<=", "LShift"}, {">>=", "RShift"}, {"**=", "Pow"},
      {"//=", "FloorDiv"}}};
  for (const auto& [k, v] : ops)
    if (k == op) return v;
  return std::nullopt;
}

Node name_node(std::string id, std::string_view ctx, int line) {
  return make_ctor("Name", {make_ident(std::move(id)), make_atom(ctx)}, line);
}

Node constant_node(std::string repr, int line, Node kind = make_none()) {
  return make_ctor("Constant", {make_constant(std::move(repr)), std::move(kind)}, line);
}

class Parser {
 public:
  Parser(std::vector<Token> toks, int fstring_depth)
      : toks_(std::move(toks)), fstring_depth_(fstring_depth) {}

  Node module() {
    std::vector<Node> body;
    while (!at(Tok::End)) {
      if (at(Tok::Newline)) {
        ++p_;
        continue;
      }
      statement(1, body);
    }
    return make_ctor("Module", {make_list(std::move(body)), make_list()}, 1);
  }

  // Parenthesized expression body used for f-string fields.
  Node fstring_expression() {
    expect_op("(");
    Node e = at_kw("yield") ? yield_expr() : testlist_star_expr();
    expect_op(")");
    skip_trailing_newlines();
    if (!at(Tok::End)) fail("f-string: invalid expression");
    return e;
  }

  Node expression_only() {
    Node e = testlist_star_expr();
    skip_trailing_newlines();
    if (!at(Tok::End)) fail("invalid syntax");
    return e;
  }

 private:
  // ---- token helpers ---------------------------------------------------
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(p_ + k, toks_.size() - 1)];
  }
  bool at(Tok t) const { return peek().type == t; }
  bool at_op(std::string_view s, std::size_t k = 0) const {
    return peek(k).type == Tok::Op && peek(k).text == s;
  }
  bool at_kw(std::string_view s, std::size_t k = 0) const {
    return peek(k).type == Tok::Name && peek(k).text == s;
  }
  bool accept_op(std::string_view s) {
    if (!at_op(s)) return false;
    ++p_;
    return true;
  }
  bool accept_kw(std::string_view s) {
    if (!at_kw(s)) return false;
    ++p_;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(peek().line, peek().col, msg);
  }
  void expect_op(std::string_view s) {
    if (!accept_op(s)) fail("expected '" + std::string(s) + "'");
  }
  void expect_kw(std::string_view s) {
    if (!accept_kw(s)) fail("expected '" + std::string(s) + "'");
  }
  void expect(Tok t, const char* what) {
    if (!at(t)) fail(std::string("expected ") + what);
    ++p_;
  }
  std::string expect_name() {
    if (!at(Tok::Name) || keywords().contains(peek().text)) fail("expected name");
    return toks_[p_++].text;
  }
  void skip_trailing_newlines() {
    while (at(Tok::Newline)) ++p_;
  }
  int line() const { return peek().line; }

  bool starts_expression() const {
    const Token& t = peek();
    switch (t.type) {
      case Tok::Number:
      case Tok::String:
        return true;
      case Tok::Name:
        return !keywords().contains(t.text) || t.text == "not" ||
               t.text == "lambda" || t.text == "await" || t.text == "None" ||
               t.text == "True" || t.text == "False";
      case Tok::Op:
        return t.text == "(" || t.text == "[" || t.text == "{" || t.text == "-" ||
               t.text == "+" || t.text == "~" || t.text == "*" || t.text == "...";
      default:
        return false;
    }
  }

  // ---- statements ------------------------------------------------------
  void statement(int depth, std::vector<Node>& out) {
    std::size_t start = p_;
    try {
      compound_or_simple(depth, out);
    } catch (const SyntaxError&) {
      if ((toks_[start].type == Tok::Name) &&
          (toks_[start].text == "match" || toks_[start].text == "case") &&
          line_ends_with_colon(start))
        throw UnsupportedConstruct("match statement");
      throw;
    }
  }

  // True when the bracket opened at `open` is closed exactly at `close`.
  bool closes_group(std::size_t open, std::size_t close) const {
    int depth = 0;
    for (std::size_t i = open; i <= close; ++i) {
      if (toks_[i].type != Tok::Op) continue;
      const std::string& t = toks_[i].text;
      if (t == "(" || t == "[" || t == "{") ++depth;
      if (t == ")" || t == "]" || t == "}") {
        if (--depth == 0) return i == close;
      }
    }
    return false;
  }

  bool line_ends_with_colon(std::size_t from) const {
    std::size_t i = from;
    while (i < toks_.size() && toks_[i].type != Tok::Newline && toks_[i].type != Tok::End)
      ++i;
    return i > from && toks_[i - 1].type == Tok::Op && toks_[i - 1].text == ":";
  }

  void compound_or_simple(int depth, std::vector<Node>& out) {
    const Token& t = peek();
    if (t.type == Tok::Op && t.text == "@") {
      out.push_back(decorated(depth));
      return;
    }
    if (t.type == Tok::Name) {
      const std::string& k = t.text;
      if (k == "if") return out.push_back(if_stmt(depth));
      if (k == "while") return out.push_back(while_stmt(depth));
      if (k == "for") return out.push_back(for_stmt(depth, false));
      if (k == "try") return out.push_back(try_stmt(depth));
      if (k == "with") return out.push_back(with_stmt(depth, false));
      if (k == "def") return out.push_back(funcdef(depth, {}, false));
      if (k == "class") return out.push_back(classdef(depth, {}));
      if (k == "async") {
        ++p_;
        if (at_kw("def")) return out.push_back(funcdef(depth, {}, true));
        if (at_kw("for")) return out.push_back(for_stmt(depth, true));
        if (at_kw("with")) return out.push_back(with_stmt(depth, true));
        fail("invalid syntax");
      }
    }
    simple_stmt(depth, out);
  }

  Node finish_stmt(Node n, int depth) {
    n.indent_level = depth;
    return n;
  }

  void simple_stmt(int depth, std::vector<Node>& out) {
    while (true) {
      out.push_back(finish_stmt(small_stmt(depth), depth));
      if (accept_op(";")) {
        if (at(Tok::Newline)) break;
        continue;
      }
      break;
    }
    expect(Tok::Newline, "newline");
  }

  std::vector<Node> suite(int depth) {
    expect_op(":");
    std::vector<Node> body;
    if (at(Tok::Newline)) {
      ++p_;
      expect(Tok::Indent, "an indented block");
      while (!at(Tok::Dedent) && !at(Tok::End)) statement(depth + 1, body);
      expect(Tok::Dedent, "dedent");
    } else {
      simple_stmt(depth + 1, body);
    }
    return body;
  }

  Node small_stmt(int depth) {
    (void)depth;
    int ln = line();
    const Token& t = peek();
    if (t.type == Tok::Name) {
      const std::string& k = t.text;
      if (k == "pass") return ++p_, make_ctor("Pass", {}, ln);
      if (k == "break") return ++p_, make_ctor("Break", {}, ln);
      if (k == "continue") return ++p_, make_ctor("Continue", {}, ln);
      if (k == "return") {
        ++p_;
        Node v = starts_expression() ? testlist_star_expr() : make_none();
        return make_ctor("Return", {std::move(v)}, ln);
      }
      if (k == "raise") {
        ++p_;
        Node exc = make_none();
        Node cause = make_none();
        if (starts_expression()) {
          exc = test();
          if (accept_kw("from")) cause = test();
        }
        return make_ctor("Raise", {std::move(exc), std::move(cause)}, ln);
      }
      if (k == "global" || k == "nonlocal") {
        ++p_;
        std::vector<Node> names;
        do names.push_back(make_ident(expect_name()));
        while (accept_op(","));
        return make_ctor(k == "global" ? "Global" : "Nonlocal",
                         {make_list(std::move(names))}, ln);
      }
      if (k == "del") {
        ++p_;
        std::vector<Node> targets;
        do {
          if (!starts_expression()) break;
          Node e = expr_or_star();
          set_context(e, "Del");
          targets.push_back(std::move(e));
        } while (accept_op(","));
        if (targets.empty()) fail("invalid syntax");
        return make_ctor("Delete", {make_list(std::move(targets))}, ln);
      }
      if (k == "assert") {
        ++p_;
        Node test_e = test();
        Node msg = accept_op(",") ? test() : make_none();
        return make_ctor("Assert", {std::move(test_e), std::move(msg)}, ln);
      }
      if (k == "import") return import_name();
      if (k == "from") return import_from();
    }
    return expr_stmt();
  }

  Node import_name() {
    int ln = line();
    expect_kw("import");
    std::vector<Node> names;
    do {
      std::string dotted = expect_name();
      while (accept_op(".")) dotted += "." + expect_name();
      Node as = accept_kw("as") ? make_ident(expect_name()) : make_none();
      names.push_back(make_ctor("alias", {make_ident(dotted), std::move(as)}));
    } while (accept_op(","));
    return make_ctor("Import", {make_list(std::move(names))}, ln);
  }

  Node import_from() {
    int ln = line();
    expect_kw("from");
    long long level = 0;
    while (true) {
      if (accept_op(".")) {
        ++level;
      } else if (accept_op("...")) {
        level += 3;
      } else {
        break;
      }
    }
    Node module = make_none();
    if (!at_kw("import")) {
      std::string dotted = expect_name();
      while (accept_op(".")) dotted += "." + expect_name();
      module = make_ident(dotted);
    } else if (level == 0) {
      fail("invalid syntax");
    }
    expect_kw("import");
    std::vector<Node> names;
    if (accept_op("*")) {
      names.push_back(make_ctor("alias", {make_ident("*"), make_none()}));
    } else {
      bool paren = accept_op("(");
      do {
        if (paren && at_op(")")) break;
        std::string n = expect_name();
        Node as = accept_kw("as") ? make_ident(expect_name()) : make_none();
        names.push_back(make_ctor("alias", {make_ident(n), std::move(as)}));
      } while (accept_op(","));
      if (paren) expect_op(")");
      if (names.empty()) fail("invalid syntax");
    }
    return make_ctor("ImportFrom",
                     {std::move(module), make_list(std::move(names)), make_int(level)},
                     ln);
  }

  Node expr_stmt() {
    int ln = line();
    bool paren_start = at_op("(");
    Node first = at_kw("yield") ? yield_expr() : testlist_star_expr();
    if (at_op(":")) {
      ++p_;
      if (!first.is("Name") && !first.is("Attribute") && !first.is("Subscript"))
        fail("illegal target for annotation");
      bool simple = first.is("Name") && !paren_start;
      set_context(first, "Store");
      Node annotation = test();
      Node value = make_none();
      if (accept_op("=")) value = at_kw("yield") ? yield_expr() : testlist_star_expr();
      return make_ctor("AnnAssign",
                       {std::move(first), std::move(annotation), std::move(value),
                        make_int(simple ? 1 : 0)},
                       ln);
    }
    if (peek().type == Tok::Op) {
      if (auto op = augassign_op(peek().text)) {
        ++p_;
        if (!first.is("Name") && !first.is("Attribute") && !first.is("Subscript"))
          fail("illegal expression for augmented assignment");
        set_context(first, "Store");
        Node value = at_kw("yield") ? yield_expr() : testlist_star_expr();
        return make_ctor("AugAssign", {std::move(first), make_atom(*op), std::move(value)},
                         ln);
      }
    }
    if (at_op("=")) {
      std::vector<Node> targets;
      targets.push_back(std::move(first));
      Node value;
      while (accept_op("=")) {
        value = at_kw("yield") ? yield_expr() : testlist_star_expr();
        if (at_op("=")) targets.push_back(std::move(value));
      }
      for (auto& t : targets) set_context(t, "Store");
      return make_ctor("Assign", {make_list(std::move(targets)), std::move(value), make_none()},
                       ln);
    }
    return make_ctor("Expr", {std::move(first)}, ln);
  }

  Node decorated(int depth) {
    std::vector<Node> decorators;
    while (accept_op("@")) {
      decorators.push_back(namedexpr_test());
      expect(Tok::Newline, "newline");
    }
    if (at_kw("def")) return funcdef(depth, std::move(decorators), false);
    if (at_kw("class")) return classdef(depth, std::move(decorators));
    if (at_kw("async") && at_kw("def", 1)) {
      ++p_;
      return funcdef(depth, std::move(decorators), true);
    }
    fail("invalid syntax");
  }

  Node funcdef(int depth, std::vector<Node> decorators, bool is_async) {
    int ln = line();
    expect_kw("def");
    std::string name = expect_name();
    expect_op("(");
    Node args = arguments(true, ")");
    expect_op(")");
    Node returns = accept_op("->") ? test() : make_none();
    std::vector<Node> body = suite(depth);
    return finish_stmt(
        make_ctor(is_async ? "AsyncFunctionDef" : "FunctionDef",
                  {make_ident(name), std::move(args), make_list(std::move(body)),
                   make_list(std::move(decorators)), std::move(returns), make_none()},
                  ln),
        depth);
  }

  Node classdef(int depth, std::vector<Node> decorators) {
    int ln = line();
    expect_kw("class");
    std::string name = expect_name();
    std::vector<Node> bases;
    std::vector<Node> kws;
    if (accept_op("(")) {
      call_arguments(bases, kws);
      expect_op(")");
    }
    std::vector<Node> body = suite(depth);
    return finish_stmt(make_ctor("ClassDef",
                                 {make_ident(name), make_list(std::move(bases)),
                                  make_list(std::move(kws)), make_list(std::move(body)),
                                  make_list(std::move(decorators))},
                                 ln),
                       depth);
  }

  Node if_stmt(int depth) {
    int ln = line();
    ++p_;  // 'if' or 'elif'
    Node cond = namedexpr_test();
    std::vector<Node> body = suite(depth);
    std::vector<Node> orelse;
    if (at_kw("elif")) {
      orelse.push_back(if_stmt(depth));
    } else if (accept_kw("else")) {
      orelse = suite(depth);
    }
    return finish_stmt(make_ctor("If", {std::move(cond), make_list(std::move(body)),
                                        make_list(std::move(orelse))},
                                 ln),
                       depth);
  }

  Node while_stmt(int depth) {
    int ln = line();
    expect_kw("while");
    Node cond = namedexpr_test();
    std::vector<Node> body = suite(depth);
    std::vector<Node> orelse;
    if (accept_kw("else")) orelse = suite(depth);
    return finish_stmt(make_ctor("While", {std::move(cond), make_list(std::move(body)),
                                           make_list(std::move(orelse))},
                                 ln),
                       depth);
  }

  Node for_stmt(int depth, bool is_async) {
    int ln = line();
    expect_kw("for");
    Node target = exprlist();
    set_context(target, "Store");
    expect_kw("in");
    Node iter = testlist_star_expr();
    std::vector<Node> body = suite(depth);
    std::vector<Node> orelse;
    if (accept_kw("else")) orelse = suite(depth);
    return finish_stmt(
        make_ctor(is_async ? "AsyncFor" : "For",
                  {std::move(target), std::move(iter), make_list(std::move(body)),
                   make_list(std::move(orelse)), make_none()},
                  ln),
        depth);
  }

  Node try_stmt(int depth) {
    int ln = line();
    expect_kw("try");
    std::vector<Node> body = suite(depth);
    std::vector<Node> handlers;
    std::vector<Node> orelse;
    std::vector<Node> finalbody;
    while (at_kw("except")) {
      int hl = line();
      ++p_;
      Node type = make_none();
      Node name = make_none();
      if (!at_op(":")) {
        type = test();
        if (accept_kw("as")) name = make_ident(expect_name());
      }
      std::vector<Node> hbody = suite(depth);
      handlers.push_back(make_ctor(
          "ExceptHandler", {std::move(type), std::move(name), make_list(std::move(hbody))},
          hl));
    }
    if (!handlers.empty() && accept_kw("else")) orelse = suite(depth);
    if (accept_kw("finally")) finalbody = suite(depth);
    if (handlers.empty() && finalbody.empty()) fail("expected 'except' or 'finally' block");
    return finish_stmt(make_ctor("Try", {make_list(std::move(body)),
                                         make_list(std::move(handlers)),
                                         make_list(std::move(orelse)),
                                         make_list(std::move(finalbody))},
                                 ln),
                       depth);
  }

  Node with_stmt(int depth, bool is_async) {
    int ln = line();
    expect_kw("with");
    bool paren = at_op("(");
    std::size_t open = p_;
    std::vector<Node> items;
    try {
      do {
        Node ctx = test();
        Node vars = make_none();
        if (accept_kw("as")) {
          vars = expr_or_star();
          set_context(vars, "Store");
        }
        items.push_back(make_ctor("withitem", {std::move(ctx), std::move(vars)}));
      } while (accept_op(","));
      if (!at_op(":")) fail("invalid syntax");
    } catch (const SyntaxError&) {
      if (paren) throw UnsupportedConstruct("parenthesized context managers");
      throw;
    }
    // `with (a, b):` is one tuple item in 3.8 but two items from 3.9 on.
    if (paren && items.size() == 1 && items[0].field("optional_vars").kind == ast::NodeKind::None &&
        items[0].field("context_expr").is("Tuple") && closes_group(open, p_ - 1))
      throw UnsupportedConstruct("parenthesized context managers");
    std::vector<Node> body = suite(depth);
    return finish_stmt(make_ctor(is_async ? "AsyncWith" : "With",
                                 {make_list(std::move(items)), make_list(std::move(body)),
                                  make_none()},
                                 ln),
                       depth);
  }

  // Parameter lists for `def` (typed) and `lambda`.
  Node arguments(bool typed, std::string_view closer) {
    std::vector<Node> posonly;
    std::vector<Node> args;
    std::vector<Node> kwonly;
    std::vector<Node> kw_defaults;
    std::vector<Node> defaults;
    Node vararg = make_none();
    Node kwarg = make_none();
    bool star_seen = false;
    auto param = [&]() {
      int ln = line();
      std::string n = expect_name();
      Node annotation = make_none();
      if (typed && accept_op(":")) annotation = test();
      return make_ctor("arg", {make_ident(n), std::move(annotation), make_none()}, ln);
    };
    while (!at_op(closer)) {
      if (accept_op("**")) {
        kwarg = param();
        accept_op(",");
        if (!at_op(closer)) fail("arguments cannot follow var-keyword argument");
        break;
      }
      if (accept_op("*")) {
        if (star_seen) fail("* argument may appear only once");
        star_seen = true;
        if (!at_op(",") && !at_op(closer)) vararg = param();
      } else if (accept_op("/")) {
        if (star_seen || !posonly.empty() || args.empty())
          fail("invalid syntax");
        posonly = std::move(args);
        args.clear();
      } else {
        Node a = param();
        Node def = accept_op("=") ? test() : make_none();
        if (star_seen) {
          kwonly.push_back(std::move(a));
          kw_defaults.push_back(std::move(def));
        } else {
          if (def.kind == ast::NodeKind::None && !defaults.empty())
            fail("non-default argument follows default argument");
          args.push_back(std::move(a));
          if (def.kind != ast::NodeKind::None) defaults.push_back(std::move(def));
        }
      }
      if (!accept_op(",")) break;
    }
    if (star_seen && vararg.kind == ast::NodeKind::None && kwonly.empty())
      fail("named arguments must follow bare *");
    return make_ctor("arguments",
                     {make_list(std::move(posonly)), make_list(std::move(args)),
                      std::move(vararg), make_list(std::move(kwonly)),
                      make_list(std::move(kw_defaults)), std::move(kwarg),
                      make_list(std::move(defaults))});
  }

  // ---- expressions -----------------------------------------------------
  Node set_context_copy(Node e, std::string_view ctx) {
    set_context(e, ctx);
    return e;
  }

  void set_context(Node& e, std::string_view ctx) {
    if (e.is("Name") || e.is("Attribute") || e.is("Subscript")) {
      e.field("ctx") = make_atom(ctx);
      return;
    }
    if (e.is("Starred")) {
      if (ctx == "Del") fail("cannot delete starred");
      e.field("ctx") = make_atom(ctx);
      set_context(e.field("value"), ctx);
      return;
    }
    if (e.is("Tuple") || e.is("List")) {
      e.field("ctx") = make_atom(ctx);
      for (auto& c : e.field("elts").children) set_context(c, ctx);
      return;
    }
    fail(std::string(ctx == "Del" ? "cannot delete " : "cannot assign to ") +
         (e.kind == ast::NodeKind::Ctor ? e.text : "expression"));
  }

  Node testlist_star_expr() {
    int ln = line();
    Node first = at_op("*") ? star_expr() : test();
    if (!at_op(",")) return first;
    std::vector<Node> elts;
    elts.push_back(std::move(first));
    while (accept_op(",")) {
      if (!starts_expression()) break;
      elts.push_back(at_op("*") ? star_expr() : test());
    }
    return make_ctor("Tuple", {make_list(std::move(elts)), make_atom("Load")}, ln);
  }

  Node exprlist() {
    int ln = line();
    Node first = expr_or_star();
    if (!at_op(",")) return first;
    std::vector<Node> elts;
    elts.push_back(std::move(first));
    while (accept_op(",")) {
      if (!starts_expression() || at_kw("not")) break;
      elts.push_back(expr_or_star());
    }
    return make_ctor("Tuple", {make_list(std::move(elts)), make_atom("Load")}, ln);
  }

  Node expr_or_star() { return at_op("*") ? star_expr() : expr(); }

  Node star_expr() {
    int ln = line();
    expect_op("*");
    return make_ctor("Starred", {expr(), make_atom("Load")}, ln);
  }

  Node yield_expr() {
    int ln = line();
    expect_kw("yield");
    if (accept_kw("from")) return make_ctor("YieldFrom", {test()}, ln);
    if (!starts_expression()) return make_ctor("Yield", {make_none()}, ln);
    return make_ctor("Yield", {testlist_star_expr()}, ln);
  }

  Node namedexpr_test() {
    int ln = line();
    Node e = test();
    if (at_op(":=")) {
      ++p_;
      if (!e.is("Name")) fail("cannot use assignment expressions with this target");
      set_context(e, "Store");
      return make_ctor("NamedExpr", {std::move(e), test()}, ln);
    }
    return e;
  }

  Node test() {
    if (at_kw("lambda")) return lambdef(false);
    int ln = line();
    Node body = or_test();
    if (at_kw("if")) {
      ++p_;
      Node cond = or_test();
      expect_kw("else");
      Node orelse = test();
      return make_ctor("IfExp", {std::move(cond), std::move(body), std::move(orelse)}, ln);
    }
    return body;
  }

  Node test_nocond() {
    if (at_kw("lambda")) return lambdef(true);
    return or_test();
  }

  Node lambdef(bool nocond) {
    int ln = line();
    expect_kw("lambda");
    Node args = arguments(false, ":");
    expect_op(":");
    Node body = nocond ? test_nocond() : test();
    return make_ctor("Lambda", {std::move(args), std::move(body)}, ln);
  }

  Node bool_chain(std::string_view kw, std::string_view op, Node (Parser::*next)()) {
    int ln = line();
    Node first = (this->*next)();
    if (!at_kw(kw)) return first;
    std::vector<Node> values;
    values.push_back(std::move(first));
    while (accept_kw(kw)) values.push_back((this->*next)());
    return make_ctor("BoolOp", {make_atom(op), make_list(std::move(values))}, ln);
  }

  Node or_test() { return bool_chain("or", "Or", &Parser::and_test); }
  Node and_test() { return bool_chain("and", "And", &Parser::not_test); }

  Node not_test() {
    int ln = line();
    if (accept_kw("not")) return make_ctor("UnaryOp", {make_atom("Not"), not_test()}, ln);
    return comparison();
  }

  std::optional<std::string_view> comp_op() {
    const Token& t = peek();
    if (t.type == Tok::Op) {
      static const std::array<std::pair<std::string_view, std::string_view>, 6> ops = {
          {{"<", "Lt"}, {">", "Gt"}, {"==", "Eq"}, {">=", "GtE"}, {"<=", "LtE"},
           {"!=", "NotEq"}}};
      for (const auto& [k, v] : ops)
        if (t.text == k) {
          ++p_;
          return v;
        }
      return std::nullopt;
    }
    if (at_kw("in")) {
      ++p_;
      return "In";
    }
    if (at_kw("not") && at_kw("in", 1)) {
      p_ += 2;
      return "NotIn";
    }
    if (at_kw("is")) {
      ++p_;
      if (accept_kw("not")) return "IsNot";
      return "Is";
    }
    return std::nullopt;
  }

  Node comparison() {
    int ln = line();
    Node left = expr();
    std::vector<Node> ops;
    std::vector<Node> comparators;
    while (auto op = comp_op()) {
      ops.push_back(make_atom(*op));
      comparators.push_back(expr());
    }
    if (ops.empty()) return left;
    return make_ctor("Compare", {std::move(left), make_list(std::move(ops)),
                                 make_list(std::move(comparators))},
                     ln);
  }

  Node binary(Node (Parser::*next)(),
              std::initializer_list<std::pair<std::string_view, std::string_view>> ops) {
    int ln = line();
    Node left = (this->*next)();
    while (peek().type == Tok::Op) {
      std::optional<std::string_view> hit;
      for (const auto& [k, v] : ops)
        if (peek().text == k) hit = v;
      if (!hit) break;
      ++p_;
      Node right = (this->*next)();
      left = make_ctor("BinOp", {std::move(left), make_atom(*hit), std::move(right)}, ln);
    }
    return left;
  }

  Node expr() { return binary(&Parser::xor_expr, {{"|", "BitOr"}}); }
  Node xor_expr() { return binary(&Parser::and_expr, {{"^", "BitXor"}}); }
  Node and_expr() { return binary(&Parser::shift_expr, {{"&", "BitAnd"}}); }
  Node shift_expr() {
    return binary(&Parser::arith_expr, {{"<<", "LShift"}, {">>", "RShift"}});
  }
  Node arith_expr() { return binary(&Parser::term, {{"+", "Add"}, {"-", "Sub"}}); }
  Node term() {
    return binary(&Parser::factor, {{"*", "Mult"},
                                    {"@", "MatMult"},
                                    {"/", "Div"},
                                    {"%", "Mod"},
                                    {"//", "FloorDiv"}});
  }

  Node factor() {
    int ln = line();
    std::string_view op;
    if (at_op("+")) op = "UAdd";
    if (at_op("-")) op = "USub";
    if (at_op("~")) op = "Invert";
    if (!op.empty()) {
      ++p_;
      return make_ctor("UnaryOp", {make_atom(op), factor()}, ln);
    }
    return power();
  }

  Node power() {
    int ln = line();
    Node base = atom_expr();
    if (accept_op("**"))
      return make_ctor("BinOp", {std::move(base), make_atom("Pow"), factor()}, ln);
    return base;
  }

  Node atom_expr() {
    int ln = line();
    if (accept_kw("await")) return make_ctor("Await", {trailers(atom())}, ln);
    return trailers(atom());
  }

  Node trailers(Node e) {
    while (true) {
      int ln = e.line;
      if (accept_op("(")) {
        std::vector<Node> args;
        std::vector<Node> kws;
        call_arguments(args, kws);
        expect_op(")");
        e = make_ctor("Call", {std::move(e), make_list(std::move(args)),
                               make_list(std::move(kws))},
                      ln);
      } else if (accept_op("[")) {
        Node slice = subscriptlist();
        expect_op("]");
        e = make_ctor("Subscript", {std::move(e), std::move(slice), make_atom("Load")}, ln);
      } else if (accept_op(".")) {
        std::string attr = expect_name();
        e = make_ctor("Attribute", {std::move(e), make_ident(attr), make_atom("Load")}, ln);
      } else {
        return e;
      }
    }
  }

  void call_arguments(std::vector<Node>& args, std::vector<Node>& kws) {
    bool saw_genexp = false;
    std::size_t count = 0;
    while (!at_op(")")) {
      int ln = line();
      ++count;
      if (accept_op("*")) {
        args.push_back(make_ctor("Starred", {test(), make_atom("Load")}, ln));
      } else if (accept_op("**")) {
        kws.push_back(make_ctor("keyword", {make_none(), test()}, ln));
      } else {
        Node e = test();
        if (at_op(":=")) {
          ++p_;
          if (!e.is("Name")) fail("cannot use assignment expressions with this target");
          set_context(e, "Store");
          e = make_ctor("NamedExpr", {std::move(e), test()}, ln);
          args.push_back(std::move(e));
        } else if (at_op("=")) {
          ++p_;
          if (!e.is("Name")) fail("expression cannot contain assignment");
          std::string id = e.field("id").text;
          kws.push_back(make_ctor("keyword", {make_ident(id), test()}, ln));
        } else if (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
          auto gens = comp_for();
          args.push_back(make_ctor("GeneratorExp", {std::move(e), make_list(std::move(gens))},
                                   ln));
          saw_genexp = true;
        } else {
          args.push_back(std::move(e));
        }
      }
      if (!accept_op(",")) break;
    }
    if (saw_genexp && count > 1) fail("Generator expression must be parenthesized");
  }

  Node subscriptlist() {
    int ln = line();
    Node first = subscript();
    if (!at_op(",")) return first;
    std::vector<Node> elts;
    elts.push_back(std::move(first));
    while (accept_op(",")) {
      if (at_op("]")) break;
      elts.push_back(subscript());
    }
    return make_ctor("Tuple", {make_list(std::move(elts)), make_atom("Load")}, ln);
  }

  Node subscript() {
    int ln = line();
    Node lower = make_none();
    if (!at_op(":")) {
      lower = test();
      if (!at_op(":")) return lower;
    }
    expect_op(":");
    Node upper = make_none();
    Node step = make_none();
    if (!at_op(":") && !at_op("]") && !at_op(",")) upper = test();
    if (accept_op(":")) {
      if (!at_op("]") && !at_op(",")) step = test();
    }
    return make_ctor("Slice", {std::move(lower), std::move(upper), std::move(step)}, ln);
  }

  std::vector<Node> comp_for() {
    std::vector<Node> gens;
    while (at_kw("for") || (at_kw("async") && at_kw("for", 1))) {
      int ln = line();
      bool is_async = accept_kw("async");
      expect_kw("for");
      Node target = exprlist();
      set_context(target, "Store");
      expect_kw("in");
      Node iter = or_test();
      std::vector<Node> ifs;
      while (accept_kw("if")) ifs.push_back(test_nocond());
      gens.push_back(make_ctor("comprehension",
                               {std::move(target), std::move(iter), make_list(std::move(ifs)),
                                make_int(is_async ? 1 : 0)},
                               ln));
    }
    return gens;
  }

  bool at_comp_for() const { return at_kw("for") || (at_kw("async") && at_kw("for", 1)); }

  Node atom() {
    int ln = line();
    const Token& t = peek();
    switch (t.type) {
      case Tok::Number: {
        ++p_;
        return constant_node(number_repr(t), ln);
      }
      case Tok::String:
        return strings();
      case Tok::Name: {
        if (t.text == "None" || t.text == "True" || t.text == "False") {
          ++p_;
          return constant_node(t.text, ln);
        }
        if (keywords().contains(t.text)) fail("invalid syntax");
        ++p_;
        return name_node(t.text, "Load", ln);
      }
      case Tok::Op:
        break;
      default:
        fail("invalid syntax");
    }
    if (accept_op("...")) return constant_node("Ellipsis", ln);
    if (accept_op("(")) {
      if (accept_op(")"))
        return make_ctor("Tuple", {make_list(), make_atom("Load")}, ln);
      if (at_kw("yield")) {
        Node y = yield_expr();
        expect_op(")");
        return y;
      }
      Node first = at_op("*") ? star_expr() : namedexpr_test();
      if (at_comp_for()) {
        auto gens = comp_for();
        expect_op(")");
        return make_ctor("GeneratorExp", {std::move(first), make_list(std::move(gens))}, ln);
      }
      if (accept_op(")")) {
        if (first.is("Starred")) fail("can't use starred expression here");
        return first;
      }
      std::vector<Node> elts;
      elts.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op(")")) break;
        elts.push_back(at_op("*") ? star_expr() : namedexpr_test());
      }
      expect_op(")");
      return make_ctor("Tuple", {make_list(std::move(elts)), make_atom("Load")}, ln);
    }
    if (accept_op("[")) {
      if (accept_op("]")) return make_ctor("List", {make_list(), make_atom("Load")}, ln);
      Node first = at_op("*") ? star_expr() : namedexpr_test();
      if (at_comp_for()) {
        auto gens = comp_for();
        expect_op("]");
        return make_ctor("ListComp", {std::move(first), make_list(std::move(gens))}, ln);
      }
      std::vector<Node> elts;
      elts.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op("]")) break;
        elts.push_back(at_op("*") ? star_expr() : namedexpr_test());
      }
      expect_op("]");
      return make_ctor("List", {make_list(std::move(elts)), make_atom("Load")}, ln);
    }
    if (accept_op("{")) return dict_or_set(ln);
    fail("invalid syntax");
  }

  Node dict_or_set(int ln) {
    if (accept_op("}")) return make_ctor("Dict", {make_list(), make_list()}, ln);
    std::vector<Node> keys;
    std::vector<Node> values;
    auto dict_item = [&]() {
      if (accept_op("**")) {
        keys.push_back(make_none());
        values.push_back(expr());
        return;
      }
      keys.push_back(test());
      expect_op(":");
      values.push_back(test());
    };
    if (at_op("**")) {
      dict_item();
    } else {
      Node first = at_op("*") ? star_expr() : test();
      if (accept_op(":")) {
        Node value = test();
        if (at_comp_for()) {
          auto gens = comp_for();
          expect_op("}");
          return make_ctor("DictComp",
                           {std::move(first), std::move(value), make_list(std::move(gens))},
                           ln);
        }
        keys.push_back(std::move(first));
        values.push_back(std::move(value));
      } else {
        if (at_comp_for()) {
          auto gens = comp_for();
          expect_op("}");
          return make_ctor("SetComp", {std::move(first), make_list(std::move(gens))}, ln);
        }
        std::vector<Node> elts;
        elts.push_back(std::move(first));
        while (accept_op(",")) {
          if (at_op("}")) break;
          elts.push_back(at_op("*") ? star_expr() : test());
        }
        expect_op("}");
        return make_ctor("Set", {make_list(std::move(elts))}, ln);
      }
    }
    while (accept_op(",")) {
      if (at_op("}")) break;
      dict_item();
    }
    expect_op("}");
    return make_ctor("Dict", {make_list(std::move(keys)), make_list(std::move(values))}, ln);
  }

  std::string number_repr(const Token& t) const {
    std::string_view s = t.text;
    std::optional<std::string> r;
    bool prefixed = s.size() > 1 && s[0] == '0' &&
                    std::string_view("xXoObB").find(s[1]) != std::string_view::npos;
    if (!prefixed && (s.back() == 'j' || s.back() == 'J')) {
      r = literals::canonical_imag(s);
    } else if (!prefixed && s.find_first_of(".eE") != std::string_view::npos) {
      r = literals::canonical_float(s);
    } else {
      r = literals::canonical_int(s);
    }
    if (!r) throw SyntaxError(t.line, t.col, "invalid number literal '" + t.text + "'");
    return *r;
  }

  // ---- string literals -------------------------------------------------
  struct Piece {
    bool bytes = false;
    bool raw = false;
    bool fmt = false;
    bool unicode = false;
    std::string body;
    int line = 0;
    int col = 0;
  };

  static Piece split_piece(const Token& t) {
    Piece p;
    p.line = t.line;
    p.col = t.col;
    std::size_t i = 0;
    while (t.text[i] != '\'' && t.text[i] != '"') {
      char c = static_cast<char>(t.text[i] | 0x20);
      if (c == 'b') p.bytes = true;
      if (c == 'r') p.raw = true;
      if (c == 'f') p.fmt = true;
      if (c == 'u') p.unicode = true;
      ++i;
    }
    char q = t.text[i];
    std::size_t qlen =
        (t.text.size() - i >= 6 && t.text[i + 1] == q && t.text[i + 2] == q) ? 3 : 1;
    p.body = t.text.substr(i + qlen, t.text.size() - i - 2 * qlen);
    return p;
  }

  static void check_named_escape(const Piece& p) {
    std::size_t run = 0;
    for (std::size_t i = 0; i < p.body.size(); ++i) {
      if (p.body[i] == '\\') {
        ++run;
        continue;
      }
      if (p.body[i] == 'N' && run % 2 == 1 && i + 1 < p.body.size() && p.body[i + 1] == '{')
        throw UnsupportedConstruct("\\N{...} escape");
      run = 0;
    }
  }

  static std::u32string decode_body(const Piece& p, std::u32string_view body) {
    if (p.raw) return std::u32string(body);
    auto v = literals::unescape(body, p.bytes);
    if (!v) throw SyntaxError(p.line, p.col, "truncated escape sequence in string literal");
    return *v;
  }

  Node strings() {
    int ln = line();
    std::vector<Piece> pieces;
    while (at(Tok::String)) pieces.push_back(split_piece(toks_[p_++]));
    bool any_bytes = false;
    bool any_text = false;
    bool any_fmt = false;
    for (const auto& pc : pieces) {
      (pc.bytes ? any_bytes : any_text) = true;
      any_fmt = any_fmt || pc.fmt;
      if (!pc.raw) check_named_escape(pc);
    }
    if (any_bytes && any_text)
      throw SyntaxError(pieces[0].line, pieces[0].col, "cannot mix bytes and nonbytes literals");
    if (any_bytes) {
      std::string value;
      for (const auto& pc : pieces) {
        for (char c : pc.body)
          if (static_cast<unsigned char>(c) >= 0x80)
            throw SyntaxError(pc.line, pc.col, "bytes can only contain ASCII literal characters");
        for (char32_t c : decode_body(pc, literals::utf8_decode(pc.body)))
          value.push_back(static_cast<char>(c));
      }
      return constant_node(literals::bytes_repr(value), ln);
    }
    std::u32string buffer;
    std::vector<Node> values;
    for (const auto& pc : pieces) {
      if (!pc.fmt) {
        buffer += decode_body(pc, literals::utf8_decode(pc.body));
      } else {
        if (fstring_depth_ + 1 > kMaxFStringDepth)
          throw UnsupportedConstruct("f-string nested beyond depth 2");
        std::u32string body = literals::utf8_decode(pc.body);
        std::size_t pos = 0;
        fstring_parts(pc, body, pos, buffer, values, 0);
        if (pos != body.size())
          throw SyntaxError(pc.line, pc.col, "f-string: single '}' is not allowed");
      }
    }
    if (!any_fmt) {
      Node kind = pieces[0].unicode ? make_raw("'u'") : make_none();
      return constant_node(literals::str_repr(buffer), ln, std::move(kind));
    }
    flush_literal(buffer, values, ln);
    return make_ctor("JoinedStr", {make_list(std::move(values))}, ln);
  }

  static void flush_literal(std::u32string& buffer, std::vector<Node>& values, int ln) {
    if (buffer.empty()) return;
    values.push_back(constant_node(literals::str_repr(buffer), ln));
    buffer.clear();
  }

  // Parses literal text and replacement fields until the end of `body` or,
  // inside a format spec (spec_depth > 0), an unmatched '}'.
  void fstring_parts(const Piece& pc, std::u32string_view body, std::size_t& pos,
                     std::u32string& buffer, std::vector<Node>& values, int spec_depth) {
    std::u32string segment;
    auto flush_segment = [&]() {
      buffer += decode_body(pc, segment);
      segment.clear();
    };
    while (pos < body.size()) {
      char32_t c = body[pos];
      if (c == U'{') {
        if (pos + 1 < body.size() && body[pos + 1] == U'{' && spec_depth == 0) {
          segment.push_back(U'{');
          pos += 2;
          continue;
        }
        flush_segment();
        ++pos;
        replacement_field(pc, body, pos, buffer, values, spec_depth);
        continue;
      }
      if (c == U'}') {
        if (spec_depth > 0) break;
        if (pos + 1 < body.size() && body[pos + 1] == U'}') {
          segment.push_back(U'}');
          pos += 2;
          continue;
        }
        throw SyntaxError(pc.line, pc.col, "f-string: single '}' is not allowed");
      }
      segment.push_back(c);
      ++pos;
    }
    flush_segment();
  }

  void replacement_field(const Piece& pc, std::u32string_view body, std::size_t& pos,
                         std::u32string& buffer, std::vector<Node>& values, int spec_depth) {
    if (spec_depth >= 2)
      throw SyntaxError(pc.line, pc.col, "f-string: expressions nested too deeply");
    auto err = [&](const std::string& m) { throw SyntaxError(pc.line, pc.col, "f-string: " + m); };
    std::size_t start = pos;
    int nest = 0;
    char32_t quote = 0;
    bool triple = false;
    std::size_t end = std::u32string_view::npos;
    bool self_doc = false;
    while (pos < body.size()) {
      char32_t c = body[pos];
      if (quote != 0) {
        if (c == quote) {
          if (!triple) {
            quote = 0;
          } else if (pos + 2 < body.size() && body[pos + 1] == quote && body[pos + 2] == quote) {
            quote = 0;
            pos += 2;
          }
        }
        ++pos;
        continue;
      }
      if (c == U'\\') err("expression part cannot include a backslash");
      if (c == U'\'' || c == U'"') {
        quote = c;
        triple = pos + 2 < body.size() && body[pos + 1] == c && body[pos + 2] == c;
        pos += triple ? 3 : 1;
        continue;
      }
      if (c == U'#') err("expression part cannot include '#'");
      if (c == U'(' || c == U'[' || c == U'{') {
        ++nest;
      } else if (c == U')' || c == U']' || (c == U'}' && nest > 0)) {
        --nest;
      } else if (nest == 0) {
        if (c == U'}' || c == U':') {
          end = pos;
          break;
        }
        if (c == U'!' && !(pos + 1 < body.size() && body[pos + 1] == U'=')) {
          end = pos;
          break;
        }
        if (c == U'=' && !(pos + 1 < body.size() && body[pos + 1] == U'=') && pos > start &&
            std::u32string_view(U"=!<>").find(body[pos - 1]) == std::u32string_view::npos) {
          end = pos;
          self_doc = true;
          break;
        }
      }
      ++pos;
    }
    if (end == std::u32string_view::npos) err("expecting '}'");
    std::u32string expr_text(body.substr(start, end - start));
    if (expr_text.find_first_not_of(U" \t\n\f") == std::u32string::npos)
      err("empty expression not allowed");

    std::vector<Token> sub = detail::tokenize("(" + literals::utf8_encode(expr_text) + ")");
    for (auto& tok : sub) tok.line += pc.line - 1;
    Parser inner(std::move(sub), fstring_depth_ + 1);
    Node value = inner.fstring_expression();

    long long conversion = -1;
    if (self_doc) {
      ++pos;  // '='
      while (pos < body.size() && (body[pos] == U' ' || body[pos] == U'\t')) ++pos;
      buffer += body.substr(start, pos - start);
    }
    if (pos < body.size() && body[pos] == U'!') {
      ++pos;
      if (pos >= body.size()) err("expecting '}'");
      char32_t conv = body[pos];
      if (conv == U's') conversion = 's';
      else if (conv == U'r') conversion = 'r';
      else if (conv == U'a') conversion = 'a';
      else err("invalid conversion character");
      ++pos;
    }
    Node format_spec = make_none();
    if (pos < body.size() && body[pos] == U':') {
      ++pos;
      std::u32string spec_buffer;
      std::vector<Node> spec_values;
      fstring_parts(pc, body, pos, spec_buffer, spec_values, spec_depth + 1);
      flush_literal(spec_buffer, spec_values, pc.line);
      format_spec = make_ctor("JoinedStr", {make_list(std::move(spec_values))}, pc.line);
    }
    if (pos >= body.size() || body[pos] != U'}') err("expecting '}'");
    ++pos;
    if (self_doc && conversion == -1 && format_spec.kind == ast::NodeKind::None)
      conversion = 'r';
    flush_literal(buffer, values, pc.line);
    values.push_back(make_ctor("FormattedValue",
                               {std::move(value), make_int(conversion), std::move(format_spec)},
                               pc.line));
  }

  std::vector<Token> toks_;
  std::size_t p_ = 0;
  int fstring_depth_ = 0;
};

// Offset of the first byte that breaks strict UTF-8 (no surrogates,
// no overlongs), if any.
std::optional<std::size_t> invalid_utf8_offset(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
      ++i;
      continue;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + extra >= s.size()) return i;
    for (int k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static const char32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
    i += extra + 1;
  }
  return std::nullopt;
}

}  // namespace

ast::SyntaxTree parse(std::string_view source) {
  if (auto bad = invalid_utf8_offset(source))
    throw SyntaxError(1 + static_cast<int>(std::count(source.begin(), source.begin() + *bad, '\n')),
                      0, "source is not valid UTF-8");
  std::string text = detail::normalize_source(source);
  Parser parser(detail::tokenize(text), 0);
  ast::SyntaxTree tree;
  tree.root = parser.module();
  tree.source_hash = ast::fnv1a(source);
  return tree;
}

ast::Node parse_expression(std::string_view source) {
  std::string text = detail::normalize_source(source);
  Parser parser(detail::tokenize(text), 0);
  return parser.expression_only();
}

}  // namespace astseq
