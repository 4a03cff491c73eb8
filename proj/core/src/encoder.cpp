#include "astseq/encoder.hpp"

#include <array>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "astseq/builtins.hpp"
#include "astseq/error.hpp"
#include "astseq/literals.hpp"
#include "astseq/parser.hpp"
#include "astseq/serialize.hpp"

namespace astseq {

using ast::Node;
using ast::NodeKind;

namespace {

constexpr std::array<std::pair<AccessoryCategory, std::string_view>, 5> kCategoryNames = {{
    {AccessoryCategory::UserName, "user_name"},
    {AccessoryCategory::Builtin, "builtin"},
    {AccessoryCategory::Digit, "digit"},
    {AccessoryCategory::AsciiChar, "ascii_char"},
    {AccessoryCategory::CommonFloat, "common_float"},
}};

bool is_dunder(std::string_view s) {
  return s.size() > 4 && s.substr(0, 2) == "__" && s.substr(s.size() - 2) == "__";
}

bool is_docstring(const Node& stmt) {
  if (!stmt.is("Expr")) return false;
  const Node& v = stmt.field("value");
  return v.is("Constant") &&
         literals::classify(v.field("value").text) == literals::ConstantClass::Str;
}

Node strip_rec(const Node& n) {
  Node out = n;
  out.children.clear();
  for (const auto& c : n.children) out.children.push_back(strip_rec(c));
  if (n.is("Module") || n.is("ClassDef") || n.is("FunctionDef") || n.is("AsyncFunctionDef")) {
    auto& body = out.field("body").children;
    if (!body.empty() && is_docstring(body.front())) {
      int depth = body.front().indent_level;
      body.erase(body.begin());
      if (body.empty() && !n.is("Module")) {
        body.push_back(ast::make_ctor("Pass", {}));
        body.back().indent_level = depth;
      }
    }
  }
  return out;
}

enum class Scope { Module, Class, Function };

// Collects binding occurrences and protected names in pre-order.
class NameScan {
 public:
  struct Binding {
    std::string name;
    NameCategory category;
  };

  std::vector<Binding> bindings;  // first binding per name, in order
  std::unordered_set<std::string> protected_names;
  std::unordered_set<std::string> all_identifiers;

  void run(const Node& root) {
    visit(root, Scope::Module);
    if (star_import_) {
      for (const auto& n : load_before_bind_) protected_names.insert(n);
    }
  }

 private:
  void bind(const std::string& name, NameCategory cat, Scope scope) {
    all_identifiers.insert(name);
    if (scope == Scope::Class) protected_names.insert(name);
    if (bound_.insert(name).second) bindings.push_back({name, cat});
  }

  void use(const std::string& name) {
    all_identifiers.insert(name);
    if (!bound_.contains(name)) load_before_bind_.insert(name);
  }

  void visit_children(const Node& n, Scope scope) {
    for (const auto& c : n.children) visit(c, scope);
  }

  void visit_arguments(const Node& args, Scope outer) {
    // Defaults and annotations evaluate in the enclosing scope.
    for (const char* f : {"posonlyargs", "args", "kwonlyargs"})
      for (const auto& a : args.field(f).children) visit(a.field("annotation"), outer);
    for (const char* f : {"vararg", "kwarg"})
      if (args.field(f).kind != NodeKind::None)
        visit(args.field(f).field("annotation"), outer);
    visit(args.field("kw_defaults"), outer);
    visit(args.field("defaults"), outer);
  }

  void bind_arguments(const Node& args) {
    for (const char* f : {"posonlyargs", "args", "kwonlyargs"})
      for (const auto& a : args.field(f).children)
        bind(a.field("arg").text, NameCategory::Arg, Scope::Function);
    for (const char* f : {"vararg", "kwarg"})
      if (args.field(f).kind != NodeKind::None)
        bind(args.field(f).field("arg").text, NameCategory::Arg, Scope::Function);
  }

  void visit(const Node& n, Scope scope) {
    if (n.kind == NodeKind::List) return visit_children(n, scope);
    if (n.kind != NodeKind::Ctor) return;
    const std::string& t = n.text;
    if (t == "FunctionDef" || t == "AsyncFunctionDef") {
      bind(n.field("name").text, NameCategory::Func, scope);
      visit(n.field("decorator_list"), scope);
      visit_arguments(n.field("args"), scope);
      visit(n.field("returns"), scope);
      bind_arguments(n.field("args"));
      visit(n.field("body"), Scope::Function);
    } else if (t == "Lambda") {
      visit_arguments(n.field("args"), scope);
      bind_arguments(n.field("args"));
      visit(n.field("body"), Scope::Function);
    } else if (t == "ClassDef") {
      bind(n.field("name").text, NameCategory::Class, scope);
      visit(n.field("decorator_list"), scope);
      visit(n.field("bases"), scope);
      visit(n.field("keywords"), scope);
      visit(n.field("body"), Scope::Class);
    } else if (t == "ListComp" || t == "SetComp" || t == "GeneratorExp" || t == "DictComp") {
      visit_children(n, scope == Scope::Class ? Scope::Function : scope);
    } else if (t == "Name") {
      if (n.field("ctx").is("Store"))
        bind(n.field("id").text, NameCategory::Var, scope);
      else
        use(n.field("id").text);
    } else if (t == "ExceptHandler") {
      visit(n.field("type"), scope);
      if (n.field("name").kind != NodeKind::None)
        bind(n.field("name").text, NameCategory::Var, scope);
      visit(n.field("body"), scope);
    } else if (t == "Global" || t == "Nonlocal") {
      for (const auto& id : n.field("names").children) use(id.text);
    } else if (t == "alias") {
      const std::string& name = n.field("name").text;
      if (name == "*") {
        star_import_ = true;
      } else if (n.field("asname").kind != NodeKind::None) {
        protect(n.field("asname").text);
      } else {
        protect(name.substr(0, name.find('.')));
      }
    } else if (t == "keyword") {
      if (n.field("arg").kind != NodeKind::None) protect(n.field("arg").text);
      visit(n.field("value"), scope);
    } else {
      visit_children(n, scope);
    }
  }

  void protect(const std::string& name) {
    all_identifiers.insert(name);
    protected_names.insert(name);
  }

  std::unordered_set<std::string> bound_;
  std::unordered_set<std::string> load_before_bind_;
  bool star_import_ = false;
};

Node rename_rec(const Node& n, const std::unordered_map<std::string, std::string>& map) {
  Node out = n;
  auto ren = [&](Node& leaf) {
    if (leaf.kind != NodeKind::Identifier) return;
    auto it = map.find(leaf.text);
    if (it != map.end()) leaf.text = it->second;
  };
  for (auto& c : out.children) c = rename_rec(c, map);
  if (n.kind != NodeKind::Ctor) return out;
  const std::string& t = n.text;
  if (t == "Name") {
    ren(out.field("id"));
  } else if (t == "FunctionDef" || t == "AsyncFunctionDef" || t == "ClassDef") {
    ren(out.field("name"));
  } else if (t == "arg") {
    ren(out.field("arg"));
  } else if (t == "ExceptHandler") {
    ren(out.field("name"));
  } else if (t == "Global" || t == "Nonlocal") {
    for (auto& id : out.field("names").children) ren(id);
  }
  return out;
}

}  // namespace

std::string_view category_name(AccessoryCategory c) {
  for (const auto& [k, v] : kCategoryNames)
    if (k == c) return v;
  return "?";
}

AccessoryCategory parse_category(std::string_view name) {
  for (const auto& [k, v] : kCategoryNames)
    if (v == name) return k;
  throw std::invalid_argument("unknown accessory category '" + std::string(name) + "'");
}

NamePool NamePool::make(std::size_t k) {
  NamePool p;
  for (std::size_t i = 1; i <= k; ++i) {
    p.vars.push_back("var_" + std::to_string(i));
    p.funcs.push_back("func_" + std::to_string(i));
    p.classes.push_back("class_" + std::to_string(i));
    p.args.push_back("arg_" + std::to_string(i));
  }
  return p;
}

const std::vector<std::string>& NamePool::of(NameCategory c) const {
  switch (c) {
    case NameCategory::Var: return vars;
    case NameCategory::Func: return funcs;
    case NameCategory::Class: return classes;
    case NameCategory::Arg: return args;
  }
  return vars;
}

std::vector<std::string> NamePool::all() const {
  std::vector<std::string> out;
  for (const auto* v : {&vars, &funcs, &classes, &args}) out.insert(out.end(), v->begin(), v->end());
  return out;
}

std::vector<std::string> default_common_floats() {
  return {"0.1", "0.0001", "0.5", "0.2", "0.0",  "1.0",  "2.0",   "0.25",
          "0.75", "0.01", "0.001", "1e-05", "1e-06", "1e-07", "1e-08", "1e-09"};
}

AccessoryCategory classify_name(std::string_view name) {
  return builtin_set().contains(std::string(name)) ? AccessoryCategory::Builtin
                                                   : AccessoryCategory::UserName;
}

Node strip_docs(const Node& root) { return strip_rec(root); }

RenameResult replace_names(const Node& root, const NamePool& pool) {
  NameScan scan;
  scan.run(root);
  std::unordered_set<std::string> pool_names;
  for (const auto& p : pool.all()) pool_names.insert(p);

  std::array<std::size_t, 4> next{};
  std::unordered_map<std::string, std::string> map;
  RenameResult r;
  for (const auto& b : scan.bindings) {
    const std::string& name = b.name;
    if (scan.protected_names.contains(name) || builtin_set().contains(name) || is_dunder(name) ||
        pool_names.contains(name))
      continue;
    const auto& cands = pool.of(b.category);
    std::size_t& i = next[static_cast<std::size_t>(b.category)];
    while (i < cands.size() && scan.all_identifiers.contains(cands[i])) ++i;
    if (i >= cands.size()) {
      static const std::array<const char*, 4> kNames = {"var", "func", "class", "arg"};
      throw PoolExhausted(kNames[static_cast<std::size_t>(b.category)], cands.size());
    }
    map.emplace(name, cands[i]);
    r.name_map.emplace_back(name, cands[i]);
    ++i;
  }
  r.tree = map.empty() ? root : rename_rec(root, map);
  return r;
}

RenameResult transform(const Node& root, const EncodeOptions& opts) {
  Node t = opts.strip_docs ? strip_docs(root) : root;
  if (opts.replace_names) return replace_names(t, opts.pool);
  return {std::move(t), {}};
}

SubsequenceBundle encode_tree(const Node& root, const EncodeOptions& opts) {
  if (!root.is("Module")) throw MalformedTree("encode expects a Module root");
  serial::FloatSet floats(opts.common_floats.begin(), opts.common_floats.end());
  SubsequenceBundle b;
  const Node* last_line = nullptr;
  const Node* last_top = nullptr;

  serial::WalkCallbacks cb;
  cb.text = [&](std::string_view t) { b.s3.push_back(FrameToken{std::string(t), false, 0}); };
  cb.piece = [&](const Node&, const serial::LeafPiece& p, std::span<const Node* const> anc) {
    std::size_t k = b.s3.size() - 1;
    FrameToken& tok = b.s3.back();
    const Node* line_node = nullptr;
    int depth = 0;
    bool in_loop_or_def = false;
    for (const Node* a : anc) {
      const ast::CtorSpec* spec = a->spec();
      if (spec->category == ast::Category::Stmt) {
        ++depth;
        line_node = a;
      } else if (spec->category == ast::Category::ExceptHandler) {
        line_node = a;
      }
      const std::string& t = a->text;
      if (t == "For" || t == "AsyncFor" || t == "While" || t == "FunctionDef" ||
          t == "AsyncFunctionDef")
        in_loop_or_def = true;
    }
    if (line_node != nullptr && line_node != last_line) {
      tok.newline = true;
      tok.indent = depth;
      last_line = line_node;
    }
    if (anc.size() >= 2 && anc[1] != last_top) {
      last_top = anc[1];
      b.s1.push_back(tok);
      b.s1_index.push_back(k);
    }
    if (in_loop_or_def) {
      b.s2.push_back(tok);
      b.s2_index.push_back(k);
    }
    AccessoryCategory cat = AccessoryCategory::AsciiChar;
    switch (p.kind) {
      case serial::PieceKind::Name: cat = classify_name(p.text); break;
      case serial::PieceKind::Singleton: cat = AccessoryCategory::Builtin; break;
      case serial::PieceKind::Digit: cat = AccessoryCategory::Digit; break;
      case serial::PieceKind::Float: cat = AccessoryCategory::CommonFloat; break;
      case serial::PieceKind::Char: cat = AccessoryCategory::AsciiChar; break;
    }
    b.s4.push_back(AccessoryToken{p.text, cat});
  };
  serial::walk(root, floats, cb);
  return b;
}

SubsequenceBundle encode(std::string_view source, const EncodeOptions& opts) {
  ast::SyntaxTree tree = parse(source);
  RenameResult r = transform(tree.root, opts);
  SubsequenceBundle b = encode_tree(r.tree, opts);
  b.name_map = std::move(r.name_map);
  return b;
}

std::string interleave(const std::vector<FrameToken>& s3, const std::vector<AccessoryToken>& s4) {
  if (s3.size() != s4.size() + 1) throw LengthMismatch(s3.size(), s4.size());
  std::string out;
  for (std::size_t i = 0; i < s4.size(); ++i) {
    out += s3[i].text;
    out += s4[i].text;
  }
  out += s3.back().text;
  return out;
}

}  // namespace astseq
