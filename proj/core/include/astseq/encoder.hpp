#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "astseq/ast.hpp"

namespace astseq {

enum class AccessoryCategory { UserName, Builtin, Digit, AsciiChar, CommonFloat };

std::string_view category_name(AccessoryCategory c);
/// Inverse of category_name; throws std::invalid_argument.
AccessoryCategory parse_category(std::string_view name);

/// Grouped constructor text between two leaves. Equality is on `text`;
/// `newline` and `indent` are layout annotations derived from the tree.
struct FrameToken {
  std::string text;
  bool newline = false;
  int indent = 0;

  friend bool operator==(const FrameToken& a, const FrameToken& b) { return a.text == b.text; }
};

struct AccessoryToken {
  std::string text;
  AccessoryCategory category = AccessoryCategory::AsciiChar;

  friend bool operator==(const AccessoryToken&, const AccessoryToken&) = default;
};

struct SubsequenceBundle {
  std::vector<FrameToken> s1;  // outline
  std::vector<FrameToken> s2;  // core-algorithm hint
  std::vector<FrameToken> s3;  // layout frame
  std::vector<AccessoryToken> s4;
  /// Positions in s3 of each s1 / s2 token.
  std::vector<std::size_t> s1_index;
  std::vector<std::size_t> s2_index;
  /// original name -> pool name, in assignment order.
  std::vector<std::pair<std::string, std::string>> name_map;

  friend bool operator==(const SubsequenceBundle& a, const SubsequenceBundle& b) {
    return a.s1 == b.s1 && a.s2 == b.s2 && a.s3 == b.s3 && a.s4 == b.s4 &&
           a.name_map == b.name_map;
  }
};

enum class NameCategory { Var, Func, Class, Arg };

struct NamePool {
  std::vector<std::string> vars;
  std::vector<std::string> funcs;
  std::vector<std::string> classes;
  std::vector<std::string> args;

  /// var_1..var_K, func_1..func_K, class_1..class_K, arg_1..arg_K.
  static NamePool make(std::size_t k);
  const std::vector<std::string>& of(NameCategory c) const;
  std::vector<std::string> all() const;
};

std::vector<std::string> default_common_floats();

struct EncodeOptions {
  bool replace_names = false;
  bool strip_docs = false;
  NamePool pool = NamePool::make(64);
  std::vector<std::string> common_floats = default_common_floats();
};

/// Removes docstrings from module, class and function bodies. A body left
/// empty gets a `pass`.
ast::Node strip_docs(const ast::Node& root);

struct RenameResult {
  ast::Node tree;
  std::vector<std::pair<std::string, std::string>> name_map;
};

/// Renames user-defined names to pool candidates. Throws PoolExhausted.
RenameResult replace_names(const ast::Node& root, const NamePool& pool);

/// The tree an encoding actually describes: parse + enabled transforms.
RenameResult transform(const ast::Node& root, const EncodeOptions& opts);

/// Encodes an already transformed tree.
SubsequenceBundle encode_tree(const ast::Node& root, const EncodeOptions& opts);

/// parse -> transform -> encode_tree.
SubsequenceBundle encode(std::string_view source, const EncodeOptions& opts = {});

/// Category of an identifier leaf: builtin when listed in the pinned
/// builtin table, user_name otherwise (pool names are never builtins).
AccessoryCategory classify_name(std::string_view name);

/// [s3_1, s4_1, s3_2, ..., s3_{N+1}] glued into one string.
std::string interleave(const std::vector<FrameToken>& s3, const std::vector<AccessoryToken>& s4);

}  // namespace astseq
