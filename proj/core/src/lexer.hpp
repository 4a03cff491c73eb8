#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace astseq::detail {

enum class Tok { Name, Number, String, Op, Newline, Indent, Dedent, End };

struct Token {
  Tok type;
  std::string text;
  int line;
  int col;
};

/// Python tokenizer: produces logical-line tokens with INDENT/DEDENT,
/// dropping comments and blank lines. `\r\n` and `\r` are treated as `\n`.
std::vector<Token> tokenize(std::string_view source);

/// Normalize line endings and strip a UTF-8 byte order mark.
std::string normalize_source(std::string_view source);

}  // namespace astseq::detail
