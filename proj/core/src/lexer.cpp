#include "lexer.hpp"

#include <array>
#include <cctype>
#include <cstring>

#include "astseq/error.hpp"

namespace astseq::detail {

namespace {

constexpr std::array<std::string_view, 47> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", ">>", "<<",
    "<=",  ">=",  "==",  "!=",  "+=",  "-=", "*=", "/=", "%=", "&=", "|=",
    "^=",  "@=",  "+",   "-",   "*",   "/",  "%",  "@",  "&",  "|",  "^",
    "~",   "<",   ">",   "(",   ")",   "[",  "]",  "{",  "}",  ",",  ":",
    ".",   ";",   "="};

bool is_name_start(unsigned char c) {
  return std::isalpha(c) != 0 || c == '_' || c >= 0x80;
}

bool is_name_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_' || c >= 0x80;
}

bool is_string_prefix(std::string_view p) {
  if (p.size() > 2) return false;
  std::string lower;
  for (char c : p) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "r" || lower == "u" || lower == "b" || lower == "f" ||
         lower == "br" || lower == "rb" || lower == "fr" || lower == "rf";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    bool line_start = true;
    while (true) {
      if (line_start && depth_ == 0) {
        if (!handle_indentation()) break;
        line_start = false;
      }
      skip_blanks();
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\\') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
          pos_ += 2;
          newline();
          continue;
        }
        if (pos_ + 1 >= src_.size()) fail("unexpected EOF after line continuation");
        fail("unexpected character after line continuation character");
      }
      if (c == '\n') {
        if (depth_ == 0) {
          emit(Tok::Newline, "\n");
          line_start = true;
        }
        ++pos_;
        newline();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) != 0 ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) != 0)) {
        lex_number();
        continue;
      }
      if (is_name_start(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && is_name_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::string_view word = src_.substr(start, pos_ - start);
        if (pos_ < src_.size() && (src_[pos_] == '\'' || src_[pos_] == '"') &&
            is_string_prefix(word)) {
          lex_string(start);
          continue;
        }
        tokens_.push_back({Tok::Name, std::string(word), line_, col_of(start)});
        continue;
      }
      if (c == '\'' || c == '"') {
        lex_string(pos_);
        continue;
      }
      lex_operator();
    }
    if (!tokens_.empty() && tokens_.back().type != Tok::Newline)
      emit(Tok::Newline, "");
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit(Tok::Dedent, "");
    }
    emit(Tok::End, "");
    return std::move(tokens_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw SyntaxError(line_, col_of(pos_), msg);
  }

  int col_of(std::size_t p) const { return static_cast<int>(p - line_begin_) + 1; }

  void newline() {
    ++line_;
    line_begin_ = pos_;
  }

  void emit(Tok t, std::string text) {
    tokens_.push_back({t, std::move(text), line_, col_of(pos_)});
  }

  void skip_blanks() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\f'))
      ++pos_;
  }

  // Returns false at end of input.
  bool handle_indentation() {
    while (true) {
      int width = 0;
      while (pos_ < src_.size()) {
        char c = src_[pos_];
        if (c == ' ') {
          ++width;
        } else if (c == '\t') {
          width = (width / 8 + 1) * 8;
        } else if (c == '\f') {
          width = 0;
        } else {
          break;
        }
        ++pos_;
      }
      if (pos_ >= src_.size()) return false;
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\n') {
        ++pos_;
        newline();
        continue;
      }
      if (c == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
        // A continuation at the start of a line joins with the next line;
        // the indentation is that of this physical line.
      }
      if (width > indents_.back()) {
        indents_.push_back(width);
        emit(Tok::Indent, "");
      } else {
        while (width < indents_.back()) {
          indents_.pop_back();
          emit(Tok::Dedent, "");
        }
        if (width != indents_.back())
          fail("unindent does not match any outer indentation level");
      }
      return true;
    }
  }

  void lex_number() {
    std::size_t start = pos_;
    auto digit_run = [&](auto pred) {
      while (pos_ < src_.size() &&
             (pred(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
    };
    auto is_dec = [](unsigned char ch) { return std::isdigit(ch) != 0; };
    if (src_[pos_] == '0' && pos_ + 1 < src_.size() &&
        std::strchr("xXoObB", src_[pos_ + 1]) != nullptr) {
      pos_ += 2;
      digit_run([](unsigned char ch) { return std::isxdigit(ch) != 0; });
    } else {
      digit_run(is_dec);
      if (pos_ < src_.size() && src_[pos_] == '.') {
        ++pos_;
        digit_run(is_dec);
      }
      if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])) != 0)
          digit_run(is_dec);
        else
          pos_ = save;
      }
      if (pos_ < src_.size() && (src_[pos_] == 'j' || src_[pos_] == 'J')) ++pos_;
    }
    tokens_.push_back({Tok::Number, std::string(src_.substr(start, pos_ - start)),
                       line_, col_of(start)});
  }

  void lex_string(std::size_t start) {
    int start_line = line_;
    int start_col = col_of(start);
    char q = src_[pos_];
    bool triple = pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q;
    pos_ += triple ? 3 : 1;
    while (true) {
      if (pos_ >= src_.size()) {
        throw SyntaxError(start_line, start_col,
                          triple ? "EOF while scanning triple-quoted string literal"
                                 : "EOL while scanning string literal");
      }
      char c = src_[pos_];
      if (c == '\\') {
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
          pos_ += 2;
          newline();
        } else {
          pos_ += 2;
        }
        continue;
      }
      if (c == '\n') {
        if (!triple)
          throw SyntaxError(start_line, start_col, "EOL while scanning string literal");
        ++pos_;
        newline();
        continue;
      }
      if (c == q) {
        if (!triple) {
          ++pos_;
          break;
        }
        if (pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q) {
          pos_ += 3;
          break;
        }
      }
      ++pos_;
    }
    tokens_.push_back({Tok::String, std::string(src_.substr(start, pos_ - start)),
                       start_line, start_col});
  }

  void lex_operator() {
    for (std::string_view op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) {
        if (op == "(" || op == "[" || op == "{") ++depth_;
        if (op == ")" || op == "]" || op == "}") {
          if (depth_ == 0) fail("unmatched '" + std::string(op) + "'");
          --depth_;
        }
        tokens_.push_back({Tok::Op, std::string(op), line_, col_of(pos_)});
        pos_ += op.size();
        return;
      }
    }
    if (src_[pos_] == '!' ) fail("invalid syntax");
    fail(std::string("invalid character '") + src_[pos_] + "'");
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_begin_ = 0;
  int line_ = 1;
  int depth_ = 0;
  std::vector<int> indents_{0};
  std::vector<Token> tokens_;
};

}  // namespace

std::string normalize_source(std::string_view source) {
  if (source.substr(0, 3) == "\xEF\xBB\xBF") source.remove_prefix(3);
  std::string out;
  out.reserve(source.size() + 1);
  for (std::size_t i = 0; i < source.size(); ++i) {
    char c = source[i];
    if (c == '\r') {
      out.push_back('\n');
      if (i + 1 < source.size() && source[i + 1] == '\n') ++i;
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::vector<Token> tokenize(std::string_view source) {
  return Lexer(source).run();
}

}  // namespace astseq::detail
