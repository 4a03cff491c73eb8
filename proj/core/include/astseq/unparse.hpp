#pragma once

#include <string>

#include "astseq/ast.hpp"

namespace astseq {

/// Render a tree as Python source. Parentheses are inserted from operator
/// precedence, so `parse(unparse(t)) == t` for every tree `parse` can
/// produce. Throws MalformedTree for nodes that have no source rendering.
std::string unparse(const ast::Node& root);
inline std::string unparse(const ast::SyntaxTree& tree) { return unparse(tree.root); }

}  // namespace astseq
