#include "astseq/literals.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <limits>
#include <vector>

namespace astseq::literals {

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string utf8_encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) append_utf8(out, c);
  return out;
}

std::u32string utf8_decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = b;
    if (b >= 0xF0) {
      extra = 3;
      cp = b & 0x07;
    } else if (b >= 0xE0) {
      extra = 2;
      cp = b & 0x0F;
    } else if (b >= 0xC0) {
      extra = 1;
      cp = b & 0x1F;
    } else if (b >= 0x80) {
      // Stray continuation byte: map to U+FFFD.
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + extra >= s.size() && extra > 0) {
      out.push_back(0xFFFD);
      break;
    }
    for (int k = 1; k <= extra; ++k)
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

ConstantClass classify(std::string_view r) {
  if (r.empty()) return ConstantClass::None;
  if (r[0] == '\'' || r[0] == '"') return ConstantClass::Str;
  if (r[0] == 'b' && r.size() > 1 && (r[1] == '\'' || r[1] == '"'))
    return ConstantClass::Bytes;
  if (r == "True" || r == "False") return ConstantClass::Bool;
  if (r == "None") return ConstantClass::None;
  if (r == "Ellipsis") return ConstantClass::Ellipsis;
  if (r.back() == 'j') return ConstantClass::Imag;
  if (r.find_first_of(".en") != std::string_view::npos) return ConstantClass::Float;
  return ConstantClass::Int;
}

namespace {

std::string strip_underscores(std::string_view t) {
  std::string s;
  s.reserve(t.size());
  for (char c : t)
    if (c != '_') s.push_back(c);
  return s;
}

bool valid_underscores(std::string_view t) {
  // Underscores only between digits (after an optional base prefix).
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] != '_') continue;
    if (i == 0 || i + 1 >= t.size() || t[i + 1] == '_') return false;
  }
  return true;
}

int digit_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return 99;
}

// Base conversion over a little-endian vector of decimal digits.
std::string to_decimal(std::string_view digits, int base) {
  std::vector<int> dec{0};
  for (char c : digits) {
    int carry = digit_value(c);
    for (int& d : dec) {
      int v = d * base + carry;
      d = v % 10;
      carry = v / 10;
    }
    while (carry > 0) {
      dec.push_back(carry % 10);
      carry /= 10;
    }
  }
  while (dec.size() > 1 && dec.back() == 0) dec.pop_back();
  std::string out;
  for (auto it = dec.rbegin(); it != dec.rend(); ++it)
    out.push_back(static_cast<char>('0' + *it));
  return out;
}

struct Sci {
  std::string digits;  // significant digits, no dot
  int exponent = 0;    // value = d.ddd * 10^exponent
};

Sci shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  std::string_view s(buf, static_cast<std::size_t>(res.ptr - buf));
  Sci out;
  auto e = s.find('e');
  for (char c : s.substr(0, e))
    if (c != '.') out.digits.push_back(c);
  out.exponent = std::atoi(std::string(s.substr(e + 1)).c_str());
  while (out.digits.size() > 1 && out.digits.back() == '0') out.digits.pop_back();
  return out;
}

std::string format_repr(double v, bool add_dot_zero) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::string sign = std::signbit(v) ? "-" : "";
  v = std::fabs(v);
  if (v == 0.0) return sign + (add_dot_zero ? "0.0" : "0");
  Sci s = shortest(v);
  if (s.exponent < -4 || s.exponent >= 16) {
    std::string out = sign + s.digits.substr(0, 1);
    if (s.digits.size() > 1) out += "." + s.digits.substr(1);
    char ebuf[16];
    std::snprintf(ebuf, sizeof ebuf, "e%c%02d", s.exponent < 0 ? '-' : '+',
                  std::abs(s.exponent));
    return out + ebuf;
  }
  int decpt = s.exponent + 1;
  std::string out = sign;
  auto n = static_cast<int>(s.digits.size());
  if (decpt <= 0) {
    out += "0." + std::string(static_cast<std::size_t>(-decpt), '0') + s.digits;
  } else if (decpt >= n) {
    out += s.digits + std::string(static_cast<std::size_t>(decpt - n), '0');
    if (add_dot_zero) out += ".0";
  } else {
    out += s.digits.substr(0, static_cast<std::size_t>(decpt)) + "." +
           s.digits.substr(static_cast<std::size_t>(decpt));
  }
  return out;
}

std::optional<double> parse_float_token(std::string_view token) {
  if (token.empty() || !valid_underscores(token)) return std::nullopt;
  std::string s = strip_underscores(token);
  bool seen_digit = false;
  for (char c : s) {
    if (c >= '0' && c <= '9') {
      seen_digit = true;
    } else if (c != '.' && c != 'e' && c != 'E' && c != '+' && c != '-') {
      return std::nullopt;
    }
  }
  if (!seen_digit) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

void hex_escape(std::string& out, char prefix, unsigned value, int width) {
  static const char* hex = "0123456789abcdef";
  out.push_back('\\');
  out.push_back(prefix);
  for (int shift = (width - 1) * 4; shift >= 0; shift -= 4)
    out.push_back(hex[(value >> shift) & 0xF]);
}

}  // namespace

std::optional<std::u32string> unescape(std::u32string_view body, bool bytes) {
  std::u32string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char32_t c = body[i];
    if (c != U'\\') {
      out.push_back(c);
      continue;
    }
    if (i + 1 >= body.size()) return std::nullopt;
    char32_t e = body[++i];
    auto hexval = [&](std::size_t count) -> std::optional<char32_t> {
      if (i + count >= body.size()) return std::nullopt;
      char32_t v = 0;
      for (std::size_t k = 1; k <= count; ++k) {
        char32_t h = body[i + k];
        int d = h < 128 ? digit_value(static_cast<char>(h)) : 99;
        if (d > 15) return std::nullopt;
        v = v * 16 + static_cast<char32_t>(d);
      }
      i += count;
      return v;
    };
    switch (e) {
      case U'\n': break;
      case U'\\': out.push_back(U'\\'); break;
      case U'\'': out.push_back(U'\''); break;
      case U'"': out.push_back(U'"'); break;
      case U'a': out.push_back(7); break;
      case U'b': out.push_back(8); break;
      case U'f': out.push_back(12); break;
      case U'n': out.push_back(10); break;
      case U'r': out.push_back(13); break;
      case U't': out.push_back(9); break;
      case U'v': out.push_back(11); break;
      case U'x': {
        auto v = hexval(2);
        if (!v) return std::nullopt;
        out.push_back(*v);
        break;
      }
      case U'u':
      case U'U': {
        if (bytes) {
          out.push_back(U'\\');
          out.push_back(e);
          break;
        }
        auto v = hexval(e == U'u' ? 4 : 8);
        if (!v || *v > 0x10FFFF) return std::nullopt;
        out.push_back(*v);
        break;
      }
      default:
        if (e >= U'0' && e <= U'7') {
          char32_t v = e - U'0';
          for (int k = 0; k < 2 && i + 1 < body.size() && body[i + 1] >= U'0' &&
                          body[i + 1] <= U'7';
               ++k)
            v = v * 8 + (body[++i] - U'0');
          out.push_back(v);
        } else {
          out.push_back(U'\\');
          out.push_back(e);
        }
    }
  }
  return out;
}

namespace {

std::optional<std::u32string> quoted_body(std::string_view repr) {
  if (repr.size() < 2) return std::nullopt;
  char q = repr.front();
  if ((q != '\'' && q != '"') || repr.back() != q) return std::nullopt;
  std::size_t qlen = 1;
  if (repr.size() >= 6 && repr.substr(0, 3) == std::string(3, q) &&
      repr.substr(repr.size() - 3) == std::string(3, q))
    qlen = 3;
  return utf8_decode(repr.substr(qlen, repr.size() - 2 * qlen));
}

}  // namespace

std::optional<std::string> canonical_int(std::string_view token) {
  if (token.empty() || !valid_underscores(token)) return std::nullopt;
  int base = 10;
  std::string_view digits = token;
  if (token.size() > 2 && token[0] == '0') {
    char p = static_cast<char>(token[1] | 0x20);
    if (p == 'x') base = 16;
    if (p == 'o') base = 8;
    if (p == 'b') base = 2;
    if (base != 10) {
      digits = token.substr(2);
      if (!digits.empty() && digits[0] == '_') digits = digits.substr(1);
    }
  }
  std::string clean = strip_underscores(digits);
  if (clean.empty()) return std::nullopt;
  for (char c : clean)
    if (digit_value(c) >= base) return std::nullopt;
  if (base == 10) {
    // Leading zeros are only allowed for zero itself.
    if (clean.size() > 1 && clean[0] == '0' &&
        clean.find_first_not_of('0') != std::string::npos)
      return std::nullopt;
  }
  return to_decimal(clean, base);
}

std::string float_repr(double value) { return format_repr(value, true); }

std::string imag_repr(double value) { return format_repr(value, false) + "j"; }

std::optional<std::string> canonical_float(std::string_view token) {
  auto v = parse_float_token(token);
  if (!v) return std::nullopt;
  return float_repr(*v);
}

std::optional<std::string> canonical_imag(std::string_view token) {
  if (token.empty() || (token.back() != 'j' && token.back() != 'J'))
    return std::nullopt;
  auto v = parse_float_token(token.substr(0, token.size() - 1));
  if (!v) return std::nullopt;
  return imag_repr(*v);
}

std::string str_repr(std::u32string_view value) {
  std::string out = "'";
  for (char32_t c : value) {
    switch (c) {
      case U'\\': out += "\\\\"; break;
      case U'\'': out += "\\'"; break;
      case U'\t': out += "\\t"; break;
      case U'\n': out += "\\n"; break;
      case U'\r': out += "\\r"; break;
      default:
        if (c >= 0x20 && c < 0x7F) {
          out.push_back(static_cast<char>(c));
        } else if (c < 0x100) {
          hex_escape(out, 'x', c, 2);
        } else if (c < 0x10000) {
          hex_escape(out, 'u', c, 4);
        } else {
          hex_escape(out, 'U', c, 8);
        }
    }
  }
  out += "'";
  return out;
}

std::string bytes_repr(std::string_view value) {
  std::string out = "b'";
  for (char ch : value) {
    auto c = static_cast<unsigned char>(ch);
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\'': out += "\\'"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c >= 0x20 && c < 0x7F)
          out.push_back(static_cast<char>(c));
        else
          hex_escape(out, 'x', c, 2);
    }
  }
  out += "'";
  return out;
}

std::optional<std::u32string> parse_str_repr(std::string_view repr) {
  auto body = quoted_body(repr);
  if (!body) return std::nullopt;
  return unescape(*body, false);
}

std::optional<std::string> parse_bytes_repr(std::string_view repr) {
  if (repr.empty() || repr[0] != 'b') return std::nullopt;
  auto body = quoted_body(repr.substr(1));
  if (!body) return std::nullopt;
  auto decoded = unescape(*body, true);
  if (!decoded) return std::nullopt;
  std::string out;
  for (char32_t c : *decoded) {
    if (c > 0xFF) return std::nullopt;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::optional<std::string> canonicalize(std::string_view text) {
  if (text == "True" || text == "False" || text == "None" || text == "Ellipsis")
    return std::string(text);
  if (text == "inf") return std::string("inf");
  if (text == "infj") return std::string("infj");
  if (text.empty()) return std::nullopt;
  if (text[0] == '\'' || text[0] == '"') {
    auto v = parse_str_repr(text);
    if (!v) return std::nullopt;
    return str_repr(*v);
  }
  if (text[0] == 'b') {
    auto v = parse_bytes_repr(text);
    if (!v) return std::nullopt;
    return bytes_repr(*v);
  }
  if (text.back() == 'j' || text.back() == 'J') return canonical_imag(text);
  if (text.find_first_of(".eE") != std::string_view::npos &&
      !(text.size() > 1 && (text[1] == 'x' || text[1] == 'X')))
    return canonical_float(text);
  return canonical_int(text);
}

double to_double(std::string_view repr) {
  if (repr == "inf") return std::numeric_limits<double>::infinity();
  return std::strtod(std::string(repr).c_str(), nullptr);
}

}  // namespace astseq::literals
