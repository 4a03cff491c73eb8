#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace astseq::ast {

/// Syntactic category of a constructor, mirroring the Python ASDL sums.
enum class Category : std::uint8_t {
  Mod,
  Stmt,
  Expr,
  ExprContext,
  BoolOp,
  Operator,
  UnaryOp,
  CmpOp,
  Comprehension,
  ExceptHandler,
  Arguments,
  Arg,
  Keyword,
  Alias,
  WithItem,
};

enum class FieldType : std::uint8_t {
  Node,          // exactly one constructor
  OptNode,       // constructor or None
  NodeList,      // list of constructors
  OptNodeList,   // list whose items may be None (Dict.keys, kw_defaults)
  Ident,         // identifier leaf
  OptIdent,      // identifier leaf or None
  IdentList,     // list of identifier leaves
  Constant,      // constant leaf
  Int,           // integer attribute rendered as frame material
  OptString,     // kind / type_comment: None or a quoted raw string
};

struct FieldSpec {
  std::string_view name;
  FieldType type;
  Category category;  // category of constructor children; unused for leaves
};

struct CtorSpec {
  std::string_view name;
  Category category;
  std::vector<FieldSpec> fields;
};

/// Constructor table for the supported grammar. Field order follows the
/// Python 3.8 `_fields`, with subscripts in the 3.9 layout (no Index or
/// ExtSlice wrappers).
const CtorSpec* find_ctor(std::string_view name);
std::span<const CtorSpec> all_ctors();
std::string_view category_name(Category c);

enum class NodeKind : std::uint8_t {
  Ctor,        // `Type(field=...,...)`
  List,        // `[...]`
  Identifier,  // leaf: a name
  Constant,    // leaf: canonical repr of a constant value
  None,        // absent optional field
  Raw,         // integer attribute or quoted kind string, verbatim
};

struct Node {
  NodeKind kind = NodeKind::None;
  /// Ctor: type name. Identifier: the name. Constant: canonical repr.
  /// Raw: the verbatim rendering.
  std::string text;
  /// Ctor: field values in schema order. List: items.
  std::vector<Node> children;
  /// 1-based source line; 0 when the node did not come from source text.
  int line = 0;
  /// Statement nesting depth; the module body is level 1. Zero for
  /// non-statement nodes.
  int indent_level = 0;

  bool is_leaf() const {
    return kind == NodeKind::Identifier || kind == NodeKind::Constant;
  }
  bool is(std::string_view type) const {
    return kind == NodeKind::Ctor && text == type;
  }
  const CtorSpec* spec() const;

  /// Rendering fragment emitted when the node is entered in pre-order:
  /// `Type(` for constructors, `[` for lists, the text for leaves.
  std::string label() const;

  /// Field access by name; throws MalformedTree if the field is missing.
  const Node& field(std::string_view name) const;
  Node& field(std::string_view name);

  /// Structural equality: kind, text and children. Positions are ignored.
  friend bool operator==(const Node& a, const Node& b);
};

Node make_ctor(std::string_view type, std::vector<Node> children, int line = 0);
Node make_list(std::vector<Node> items = {});
Node make_ident(std::string name);
Node make_constant(std::string repr);
Node make_none();
Node make_raw(std::string text);
Node make_int(long long value);

/// Ctor with no fields, e.g. `Load()` or `Add()`.
inline Node make_atom(std::string_view type) { return make_ctor(type, {}); }

struct SyntaxTree {
  Node root;
  std::uint64_t source_hash = 0;

  friend bool operator==(const SyntaxTree& a, const SyntaxTree& b) {
    return a.root == b.root;
  }
};

/// Depth-first, parent before children, children left to right.
std::vector<const Node*> preorder(const Node& root);
inline std::vector<const Node*> preorder(const SyntaxTree& tree) {
  return preorder(tree.root);
}

std::size_t count_leaves(const Node& root);

/// Path of the first structural divergence between two trees
/// (e.g. `body[2].value.args[0]`), or empty when equal.
std::string first_divergence(const Node& a, const Node& b);

/// FNV-1a 64-bit digest.
std::uint64_t fnv1a(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace astseq::ast
