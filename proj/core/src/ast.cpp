#include "astseq/ast.hpp"

#include <algorithm>
#include <unordered_map>

#include "astseq/error.hpp"

namespace astseq::ast {

namespace {

using C = Category;
using F = FieldType;

std::vector<CtorSpec> build_table() {
  std::vector<CtorSpec> t;
  auto add = [&t](std::string_view name, Category cat,
                  std::vector<FieldSpec> fields = {}) {
    t.push_back(CtorSpec{name, cat, std::move(fields)});
  };

  add("Module", C::Mod,
      {{"body", F::NodeList, C::Stmt}, {"type_ignores", F::NodeList, C::Stmt}});

  const std::vector<FieldSpec> function_fields = {
      {"name", F::Ident, C::Expr},
      {"args", F::Node, C::Arguments},
      {"body", F::NodeList, C::Stmt},
      {"decorator_list", F::NodeList, C::Expr},
      {"returns", F::OptNode, C::Expr},
      {"type_comment", F::OptString, C::Expr}};
  add("FunctionDef", C::Stmt, function_fields);
  add("AsyncFunctionDef", C::Stmt, function_fields);
  add("ClassDef", C::Stmt,
      {{"name", F::Ident, C::Expr},
       {"bases", F::NodeList, C::Expr},
       {"keywords", F::NodeList, C::Keyword},
       {"body", F::NodeList, C::Stmt},
       {"decorator_list", F::NodeList, C::Expr}});
  add("Return", C::Stmt, {{"value", F::OptNode, C::Expr}});
  add("Delete", C::Stmt, {{"targets", F::NodeList, C::Expr}});
  add("Assign", C::Stmt,
      {{"targets", F::NodeList, C::Expr},
       {"value", F::Node, C::Expr},
       {"type_comment", F::OptString, C::Expr}});
  add("AugAssign", C::Stmt,
      {{"target", F::Node, C::Expr},
       {"op", F::Node, C::Operator},
       {"value", F::Node, C::Expr}});
  add("AnnAssign", C::Stmt,
      {{"target", F::Node, C::Expr},
       {"annotation", F::Node, C::Expr},
       {"value", F::OptNode, C::Expr},
       {"simple", F::Int, C::Expr}});
  const std::vector<FieldSpec> for_fields = {
      {"target", F::Node, C::Expr},
      {"iter", F::Node, C::Expr},
      {"body", F::NodeList, C::Stmt},
      {"orelse", F::NodeList, C::Stmt},
      {"type_comment", F::OptString, C::Expr}};
  add("For", C::Stmt, for_fields);
  add("AsyncFor", C::Stmt, for_fields);
  add("While", C::Stmt,
      {{"test", F::Node, C::Expr},
       {"body", F::NodeList, C::Stmt},
       {"orelse", F::NodeList, C::Stmt}});
  add("If", C::Stmt,
      {{"test", F::Node, C::Expr},
       {"body", F::NodeList, C::Stmt},
       {"orelse", F::NodeList, C::Stmt}});
  const std::vector<FieldSpec> with_fields = {
      {"items", F::NodeList, C::WithItem},
      {"body", F::NodeList, C::Stmt},
      {"type_comment", F::OptString, C::Expr}};
  add("With", C::Stmt, with_fields);
  add("AsyncWith", C::Stmt, with_fields);
  add("Raise", C::Stmt,
      {{"exc", F::OptNode, C::Expr}, {"cause", F::OptNode, C::Expr}});
  add("Try", C::Stmt,
      {{"body", F::NodeList, C::Stmt},
       {"handlers", F::NodeList, C::ExceptHandler},
       {"orelse", F::NodeList, C::Stmt},
       {"finalbody", F::NodeList, C::Stmt}});
  add("Assert", C::Stmt,
      {{"test", F::Node, C::Expr}, {"msg", F::OptNode, C::Expr}});
  add("Import", C::Stmt, {{"names", F::NodeList, C::Alias}});
  add("ImportFrom", C::Stmt,
      {{"module", F::OptIdent, C::Expr},
       {"names", F::NodeList, C::Alias},
       {"level", F::Int, C::Expr}});
  add("Global", C::Stmt, {{"names", F::IdentList, C::Expr}});
  add("Nonlocal", C::Stmt, {{"names", F::IdentList, C::Expr}});
  add("Expr", C::Stmt, {{"value", F::Node, C::Expr}});
  add("Pass", C::Stmt);
  add("Break", C::Stmt);
  add("Continue", C::Stmt);

  add("BoolOp", C::Expr,
      {{"op", F::Node, C::BoolOp}, {"values", F::NodeList, C::Expr}});
  add("NamedExpr", C::Expr,
      {{"target", F::Node, C::Expr}, {"value", F::Node, C::Expr}});
  add("BinOp", C::Expr,
      {{"left", F::Node, C::Expr},
       {"op", F::Node, C::Operator},
       {"right", F::Node, C::Expr}});
  add("UnaryOp", C::Expr,
      {{"op", F::Node, C::UnaryOp}, {"operand", F::Node, C::Expr}});
  add("Lambda", C::Expr,
      {{"args", F::Node, C::Arguments}, {"body", F::Node, C::Expr}});
  add("IfExp", C::Expr,
      {{"test", F::Node, C::Expr},
       {"body", F::Node, C::Expr},
       {"orelse", F::Node, C::Expr}});
  add("Dict", C::Expr,
      {{"keys", F::OptNodeList, C::Expr}, {"values", F::NodeList, C::Expr}});
  add("Set", C::Expr, {{"elts", F::NodeList, C::Expr}});
  add("ListComp", C::Expr,
      {{"elt", F::Node, C::Expr},
       {"generators", F::NodeList, C::Comprehension}});
  add("SetComp", C::Expr,
      {{"elt", F::Node, C::Expr},
       {"generators", F::NodeList, C::Comprehension}});
  add("DictComp", C::Expr,
      {{"key", F::Node, C::Expr},
       {"value", F::Node, C::Expr},
       {"generators", F::NodeList, C::Comprehension}});
  add("GeneratorExp", C::Expr,
      {{"elt", F::Node, C::Expr},
       {"generators", F::NodeList, C::Comprehension}});
  add("Await", C::Expr, {{"value", F::Node, C::Expr}});
  add("Yield", C::Expr, {{"value", F::OptNode, C::Expr}});
  add("YieldFrom", C::Expr, {{"value", F::Node, C::Expr}});
  add("Compare", C::Expr,
      {{"left", F::Node, C::Expr},
       {"ops", F::NodeList, C::CmpOp},
       {"comparators", F::NodeList, C::Expr}});
  add("Call", C::Expr,
      {{"func", F::Node, C::Expr},
       {"args", F::NodeList, C::Expr},
       {"keywords", F::NodeList, C::Keyword}});
  add("FormattedValue", C::Expr,
      {{"value", F::Node, C::Expr},
       {"conversion", F::Int, C::Expr},
       {"format_spec", F::OptNode, C::Expr}});
  add("JoinedStr", C::Expr, {{"values", F::NodeList, C::Expr}});
  add("Constant", C::Expr,
      {{"value", F::Constant, C::Expr}, {"kind", F::OptString, C::Expr}});
  add("Attribute", C::Expr,
      {{"value", F::Node, C::Expr},
       {"attr", F::Ident, C::Expr},
       {"ctx", F::Node, C::ExprContext}});
  add("Subscript", C::Expr,
      {{"value", F::Node, C::Expr},
       {"slice", F::Node, C::Expr},
       {"ctx", F::Node, C::ExprContext}});
  add("Starred", C::Expr,
      {{"value", F::Node, C::Expr}, {"ctx", F::Node, C::ExprContext}});
  add("Name", C::Expr,
      {{"id", F::Ident, C::Expr}, {"ctx", F::Node, C::ExprContext}});
  add("List", C::Expr,
      {{"elts", F::NodeList, C::Expr}, {"ctx", F::Node, C::ExprContext}});
  add("Tuple", C::Expr,
      {{"elts", F::NodeList, C::Expr}, {"ctx", F::Node, C::ExprContext}});
  add("Slice", C::Expr,
      {{"lower", F::OptNode, C::Expr},
       {"upper", F::OptNode, C::Expr},
       {"step", F::OptNode, C::Expr}});

  for (auto n : {"Load", "Store", "Del"}) add(n, C::ExprContext);
  for (auto n : {"And", "Or"}) add(n, C::BoolOp);
  for (auto n : {"Add", "Sub", "Mult", "MatMult", "Div", "Mod", "Pow", "LShift",
                 "RShift", "BitOr", "BitXor", "BitAnd", "FloorDiv"})
    add(n, C::Operator);
  for (auto n : {"Invert", "Not", "UAdd", "USub"}) add(n, C::UnaryOp);
  for (auto n : {"Eq", "NotEq", "Lt", "LtE", "Gt", "GtE", "Is", "IsNot", "In",
                 "NotIn"})
    add(n, C::CmpOp);

  add("comprehension", C::Comprehension,
      {{"target", F::Node, C::Expr},
       {"iter", F::Node, C::Expr},
       {"ifs", F::NodeList, C::Expr},
       {"is_async", F::Int, C::Expr}});
  add("ExceptHandler", C::ExceptHandler,
      {{"type", F::OptNode, C::Expr},
       {"name", F::OptIdent, C::Expr},
       {"body", F::NodeList, C::Stmt}});
  add("arguments", C::Arguments,
      {{"posonlyargs", F::NodeList, C::Arg},
       {"args", F::NodeList, C::Arg},
       {"vararg", F::OptNode, C::Arg},
       {"kwonlyargs", F::NodeList, C::Arg},
       {"kw_defaults", F::OptNodeList, C::Expr},
       {"kwarg", F::OptNode, C::Arg},
       {"defaults", F::NodeList, C::Expr}});
  add("arg", C::Arg,
      {{"arg", F::Ident, C::Expr},
       {"annotation", F::OptNode, C::Expr},
       {"type_comment", F::OptString, C::Expr}});
  add("keyword", C::Keyword,
      {{"arg", F::OptIdent, C::Expr}, {"value", F::Node, C::Expr}});
  add("alias", C::Alias,
      {{"name", F::Ident, C::Expr}, {"asname", F::OptIdent, C::Expr}});
  add("withitem", C::WithItem,
      {{"context_expr", F::Node, C::Expr},
       {"optional_vars", F::OptNode, C::Expr}});
  return t;
}

const std::vector<CtorSpec>& table() {
  static const std::vector<CtorSpec> t = build_table();
  return t;
}

const std::unordered_map<std::string_view, const CtorSpec*>& index() {
  static const auto idx = [] {
    std::unordered_map<std::string_view, const CtorSpec*> m;
    for (const auto& c : table()) m.emplace(c.name, &c);
    return m;
  }();
  return idx;
}

}  // namespace

const CtorSpec* find_ctor(std::string_view name) {
  const auto& idx = index();
  auto it = idx.find(name);
  return it == idx.end() ? nullptr : it->second;
}

std::span<const CtorSpec> all_ctors() { return table(); }

std::string_view category_name(Category c) {
  switch (c) {
    case C::Mod: return "mod";
    case C::Stmt: return "stmt";
    case C::Expr: return "expr";
    case C::ExprContext: return "expr_context";
    case C::BoolOp: return "boolop";
    case C::Operator: return "operator";
    case C::UnaryOp: return "unaryop";
    case C::CmpOp: return "cmpop";
    case C::Comprehension: return "comprehension";
    case C::ExceptHandler: return "excepthandler";
    case C::Arguments: return "arguments";
    case C::Arg: return "arg";
    case C::Keyword: return "keyword";
    case C::Alias: return "alias";
    case C::WithItem: return "withitem";
  }
  return "?";
}

const CtorSpec* Node::spec() const {
  return kind == NodeKind::Ctor ? find_ctor(text) : nullptr;
}

std::string Node::label() const {
  switch (kind) {
    case NodeKind::Ctor: return text + "(";
    case NodeKind::List: return "[";
    case NodeKind::None: return "None";
    default: return text;
  }
}

namespace {
std::size_t field_index(const Node& n, std::string_view name) {
  const CtorSpec* s = n.spec();
  if (s != nullptr) {
    for (std::size_t i = 0; i < s->fields.size(); ++i)
      if (s->fields[i].name == name && i < n.children.size()) return i;
  }
  throw MalformedTree("node '" + n.text + "' has no field '" +
                      std::string(name) + "'");
}
}  // namespace

const Node& Node::field(std::string_view name) const {
  return children[field_index(*this, name)];
}

Node& Node::field(std::string_view name) {
  return children[field_index(*this, name)];
}

bool operator==(const Node& a, const Node& b) {
  return a.kind == b.kind && a.text == b.text && a.children == b.children;
}

Node make_ctor(std::string_view type, std::vector<Node> children, int line) {
  Node n;
  n.kind = NodeKind::Ctor;
  n.text = std::string(type);
  n.children = std::move(children);
  n.line = line;
  return n;
}

Node make_list(std::vector<Node> items) {
  Node n;
  n.kind = NodeKind::List;
  n.children = std::move(items);
  return n;
}

Node make_ident(std::string name) {
  Node n;
  n.kind = NodeKind::Identifier;
  n.text = std::move(name);
  return n;
}

Node make_constant(std::string repr) {
  Node n;
  n.kind = NodeKind::Constant;
  n.text = std::move(repr);
  return n;
}

Node make_none() { return Node{}; }

Node make_raw(std::string text) {
  Node n;
  n.kind = NodeKind::Raw;
  n.text = std::move(text);
  return n;
}

Node make_int(long long value) { return make_raw(std::to_string(value)); }

std::vector<const Node*> preorder(const Node& root) {
  std::vector<const Node*> out;
  std::vector<const Node*> stack{&root};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    out.push_back(n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it)
      stack.push_back(&*it);
  }
  return out;
}

std::size_t count_leaves(const Node& root) {
  std::size_t n = root.is_leaf() ? 1 : 0;
  for (const auto& c : root.children) n += count_leaves(c);
  return n;
}

namespace {
bool divergence(const Node& a, const Node& b, std::string& path) {
  if (a.kind != b.kind || a.text != b.text ||
      a.children.size() != b.children.size()) {
    if (path.empty()) path = "<root>";
    path += " (" + a.label() + " vs " + b.label() + ")";
    return true;
  }
  const CtorSpec* s = a.spec();
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    std::string sub = path;
    if (a.kind == NodeKind::List)
      sub += "[" + std::to_string(i) + "]";
    else if (s != nullptr && i < s->fields.size())
      sub += (sub.empty() ? "" : ".") + std::string(s->fields[i].name);
    if (divergence(a.children[i], b.children[i], sub)) {
      path = sub;
      return true;
    }
  }
  return false;
}
}  // namespace

std::string first_divergence(const Node& a, const Node& b) {
  std::string path;
  return divergence(a, b, path) ? path : std::string{};
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace astseq::ast
