#pragma once

#include <string_view>

#include "astseq/ast.hpp"

namespace astseq {

/// Parse a Python 3.8 module. Throws SyntaxError for unparsable text and
/// UnsupportedConstruct for grammar outside the supported subset (`\N{}`
/// escapes, f-strings nested more than two levels, 3.10 `match`,
/// parenthesized context managers).
ast::SyntaxTree parse(std::string_view source);

/// Parse a single expression (the text of a literal, typically).
ast::Node parse_expression(std::string_view source);

}  // namespace astseq
