#include "astseq/serialize.hpp"

#include "astseq/error.hpp"
#include "astseq/literals.hpp"

namespace astseq::serial {

using ast::FieldType;
using ast::Node;
using ast::NodeKind;
using literals::ConstantClass;

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto c0 = static_cast<unsigned char>(s[0]);
  if (c0 >= '0' && c0 <= '9') return false;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
    if (!ok) return false;
  }
  return true;
}

LeafSplit split_leaf(const Node& leaf, const FloatSet& common_floats) {
  LeafSplit out;
  const std::string& t = leaf.text;
  if (leaf.kind == NodeKind::Identifier) {
    out.prefix = "'";
    out.pieces.push_back({t, PieceKind::Name});
    out.suffix = "'";
    return out;
  }
  auto chars = [&](std::string_view body, PieceKind kind) {
    for (char c : body) out.pieces.push_back({std::string(1, c), kind});
  };
  switch (literals::classify(t)) {
    case ConstantClass::Bool:
    case ConstantClass::None:
    case ConstantClass::Ellipsis:
      out.pieces.push_back({t, PieceKind::Singleton});
      break;
    case ConstantClass::Str:
      out.prefix = t.substr(0, 1);
      chars(std::string_view(t).substr(1, t.size() - 2), PieceKind::Char);
      out.suffix = t.substr(t.size() - 1);
      break;
    case ConstantClass::Bytes:
      out.prefix = t.substr(0, 2);
      chars(std::string_view(t).substr(2, t.size() - 3), PieceKind::Char);
      out.suffix = t.substr(t.size() - 1);
      break;
    case ConstantClass::Int:
      chars(t, PieceKind::Digit);
      break;
    case ConstantClass::Float:
      if (common_floats.contains(t))
        out.pieces.push_back({t, PieceKind::Float});
      else
        chars(t, PieceKind::Char);
      break;
    case ConstantClass::Imag:
      chars(t, PieceKind::Char);
      break;
  }
  return out;
}

namespace {

class Walker {
 public:
  Walker(const FloatSet& floats, const WalkCallbacks& cb) : floats_(floats), cb_(cb) {}

  void run(const Node& root) {
    visit(root);
    cb_.text(buffer_);
  }

 private:
  void piece(const Node& leaf, const LeafPiece& p) {
    cb_.text(buffer_);
    buffer_.clear();
    cb_.piece(leaf, p, ancestors_);
  }

  void visit(const Node& n) {
    switch (n.kind) {
      case NodeKind::Ctor: {
        const ast::CtorSpec* spec = n.spec();
        if (spec == nullptr || spec->fields.size() != n.children.size())
          throw MalformedTree("cannot serialize constructor '" + n.text + "'");
        buffer_ += n.text;
        buffer_ += '(';
        ancestors_.push_back(&n);
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          if (i > 0) buffer_ += ',';
          buffer_ += spec->fields[i].name;
          buffer_ += '=';
          visit(n.children[i]);
        }
        ancestors_.pop_back();
        buffer_ += ')';
        return;
      }
      case NodeKind::List:
        buffer_ += '[';
        for (std::size_t i = 0; i < n.children.size(); ++i) {
          if (i > 0) buffer_ += ',';
          visit(n.children[i]);
        }
        buffer_ += ']';
        return;
      case NodeKind::None:
        buffer_ += "None";
        return;
      case NodeKind::Raw:
        buffer_ += n.text;
        return;
      case NodeKind::Identifier:
      case NodeKind::Constant: {
        LeafSplit s = split_leaf(n, floats_);
        buffer_ += s.prefix;
        for (const auto& p : s.pieces) piece(n, p);
        buffer_ += s.suffix;
        return;
      }
    }
  }

  const FloatSet& floats_;
  const WalkCallbacks& cb_;
  std::string buffer_;
  std::vector<const Node*> ancestors_;
};

// Recursive-descent reader for the dump grammar, driven by the schema.
class DumpReader {
 public:
  explicit DumpReader(std::string_view s) : s_(s) {}

  Node read_root() {
    Node n = ctor(ast::Category::Mod);
    if (pos_ != s_.size()) fail("trailing text after module");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw MalformedSerialization(pos_, msg);
  }

  bool lit(std::string_view w) {
    if (s_.substr(pos_, w.size()) != w) return false;
    pos_ += w.size();
    return true;
  }

  void expect(std::string_view w) {
    if (!lit(w)) fail("expected '" + std::string(w) + "'");
  }

  Node ctor(ast::Category want) {
    std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != '(' && is_identifier(s_.substr(pos_, 1))) ++pos_;
    std::string_view name = s_.substr(start, pos_ - start);
    const ast::CtorSpec* spec = ast::find_ctor(name);
    if (spec == nullptr) {
      pos_ = start;
      fail("unknown constructor '" + std::string(name) + "'");
    }
    if (spec->category != want) {
      pos_ = start;
      fail("constructor '" + std::string(name) + "' is not a " +
           std::string(ast::category_name(want)));
    }
    expect("(");
    std::vector<Node> children;
    for (std::size_t i = 0; i < spec->fields.size(); ++i) {
      const ast::FieldSpec& f = spec->fields[i];
      if (i > 0) expect(",");
      expect(f.name);
      expect("=");
      children.push_back(value(*spec, f));
    }
    expect(")");
    return ast::make_ctor(name, std::move(children));
  }

  template <typename Item>
  Node list(Item item) {
    expect("[");
    std::vector<Node> items;
    if (!lit("]")) {
      do items.push_back(item());
      while (lit(","));
      expect("]");
    }
    return ast::make_list(std::move(items));
  }

  Node ident(bool dotted, bool star) {
    std::size_t start = pos_;
    expect("'");
    std::size_t end = s_.find('\'', pos_);
    if (end == std::string_view::npos) fail("unterminated identifier");
    std::string_view id = s_.substr(pos_, end - pos_);
    bool ok = is_identifier(id);
    if (!ok && star && id == "*") ok = true;
    if (!ok && dotted) {
      ok = true;
      std::size_t p = 0;
      while (ok) {
        std::size_t q = id.find('.', p);
        ok = is_identifier(id.substr(p, q == std::string_view::npos ? q : q - p));
        if (q == std::string_view::npos) break;
        p = q + 1;
      }
    }
    if (!ok) {
      pos_ = start + 1;
      fail("invalid identifier '" + std::string(id) + "'");
    }
    pos_ = end + 1;
    return ast::make_ident(std::string(id));
  }

  Node constant() {
    std::size_t start = pos_;
    if (pos_ < s_.size() && (s_[pos_] == '\'' || s_[pos_] == '"' ||
                             (s_[pos_] == 'b' && pos_ + 1 < s_.size() &&
                              (s_[pos_ + 1] == '\'' || s_[pos_ + 1] == '"')))) {
      if (s_[pos_] == 'b') ++pos_;
      char q = s_[pos_++];
      while (pos_ < s_.size() && s_[pos_] != q) {
        if (s_[pos_] == '\\') ++pos_;
        ++pos_;
      }
      if (pos_ >= s_.size()) {
        pos_ = start;
        fail("unterminated string constant");
      }
      ++pos_;
    } else {
      while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ')') ++pos_;
    }
    auto canon = literals::canonicalize(s_.substr(start, pos_ - start));
    if (!canon) {
      pos_ = start;
      fail("invalid constant '" + std::string(s_.substr(start, pos_ - start)) + "'");
    }
    return ast::make_constant(std::move(*canon));
  }

  Node integer() {
    std::size_t start = pos_;
    if (lit("-")) {
    }
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    if (pos_ == start || (pos_ == start + 1 && s_[start] == '-')) fail("expected integer");
    return ast::make_raw(std::string(s_.substr(start, pos_ - start)));
  }

  Node value(const ast::CtorSpec& owner, const ast::FieldSpec& f) {
    bool dotted = (owner.name == "alias" && f.name == "name") ||
                  (owner.name == "ImportFrom" && f.name == "module");
    bool star = owner.name == "alias" && f.name == "name";
    switch (f.type) {
      case FieldType::Node:
        return ctor(f.category);
      case FieldType::OptNode:
        if (lit("None")) return ast::make_none();
        return ctor(f.category);
      case FieldType::NodeList:
        return list([&] { return ctor(f.category); });
      case FieldType::OptNodeList:
        return list([&] {
          if (lit("None")) return ast::make_none();
          return ctor(f.category);
        });
      case FieldType::Ident:
        return ident(dotted, star);
      case FieldType::OptIdent:
        if (lit("None")) return ast::make_none();
        return ident(dotted, false);
      case FieldType::IdentList:
        return list([&] { return ident(false, false); });
      case FieldType::Constant:
        return constant();
      case FieldType::Int: {
        Node n = integer();
        validate_int(owner, f, n.text);
        return n;
      }
      case FieldType::OptString:
        if (lit("None")) return ast::make_none();
        if (owner.name == "Constant" && lit("'u'")) return ast::make_raw("'u'");
        fail("unexpected value for '" + std::string(f.name) + "'");
    }
    fail("unreachable field type");
  }

  void validate_int(const ast::CtorSpec& owner, const ast::FieldSpec& f, const std::string& v) {
    if (owner.name == "FormattedValue") {
      if (v == "-1" || v == "115" || v == "114" || v == "97") return;
    } else if (owner.name == "ImportFrom") {
      if (v[0] != '-' && v.size() < 6) return;
    } else if (v == "0" || v == "1") {
      return;
    }
    fail("invalid value " + v + " for '" + std::string(f.name) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

void walk(const Node& root, const FloatSet& common_floats, const WalkCallbacks& cb) {
  Walker(common_floats, cb).run(root);
}

std::string dump(const Node& root) {
  static const FloatSet none;
  std::string out;
  WalkCallbacks cb;
  cb.text = [&](std::string_view t) { out += t; };
  cb.piece = [&](const Node&, const LeafPiece& p, std::span<const Node* const>) {
    out += p.text;
  };
  walk(root, none, cb);
  return out;
}

Node parse_dump(std::string_view text) { return DumpReader(text).read_root(); }

}  // namespace astseq::serial
