#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "astseq/ast.hpp"

// Text serialization of syntax trees in the compact `ast.dump` layout:
//   Module(body=[Assign(targets=[Name(id='x',ctx=Store())],value=...)],type_ignores=[])
// Every field is written, separators carry no spaces, and leaves are split
// into the pieces that become accessory tokens.
namespace astseq::serial {

enum class PieceKind {
  Name,       // one identifier
  Digit,      // one decimal digit of an integer
  Char,       // one character of a string body or a spelled-out number
  Float,      // a whole float from the common-float list
  Singleton,  // True, False, None, Ellipsis
};

struct LeafPiece {
  std::string text;
  PieceKind kind;
};

/// How a leaf renders: frame material before the first piece, the pieces
/// (consecutive pieces are separated by empty frame text) and frame material
/// after the last piece. A leaf may have zero pieces (`''`, `b''`), in which
/// case prefix and suffix are plain frame text.
struct LeafSplit {
  std::string prefix;
  std::vector<LeafPiece> pieces;
  std::string suffix;
};

using FloatSet = std::unordered_set<std::string>;

LeafSplit split_leaf(const ast::Node& leaf, const FloatSet& common_floats);

struct WalkCallbacks {
  std::function<void(std::string_view)> text;
  /// Called once per piece. `ancestors` lists enclosing constructor nodes,
  /// outermost first.
  std::function<void(const ast::Node& leaf, const LeafPiece& piece,
                     std::span<const ast::Node* const> ancestors)>
      piece;
};

/// Pre-order walk that emits the serialization as alternating text and
/// leaf pieces.
void walk(const ast::Node& root, const FloatSet& common_floats, const WalkCallbacks& cb);

/// Full serialization string.
std::string dump(const ast::Node& root);

/// Inverse of dump. Validates the text against the constructor schema and
/// re-canonicalizes constants; throws MalformedSerialization(offset).
ast::Node parse_dump(std::string_view text);

/// True for a Python identifier (ASCII letters, digits, underscore, or any
/// non-ASCII code point; not starting with a digit).
bool is_identifier(std::string_view s);

}  // namespace astseq::serial
