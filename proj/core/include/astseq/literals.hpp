#pragma once

#include <optional>
#include <string>
#include <string_view>

// Canonical text forms of Python constant values. Constants are carried
// through the whole pipeline as these strings, so two constants are equal
// iff their canonical forms are byte-equal.
namespace astseq::literals {

enum class ConstantClass { Str, Bytes, Int, Float, Imag, Bool, None, Ellipsis };

/// Classify a canonical constant repr.
ConstantClass classify(std::string_view repr);

/// Decimal form of an integer literal token (`0x1F`, `1_000`, `0o7`, ...).
/// Returns nullopt for tokens that are not valid Python 3 integers.
std::optional<std::string> canonical_int(std::string_view token);

/// Python `repr(float)`: shortest round-trip digits, scientific notation
/// when the decimal exponent is < -4 or >= 16, `inf` for overflow.
std::string float_repr(double value);

/// Python `repr` of a pure imaginary number, e.g. `1j`, `1.5j`, `infj`.
std::string imag_repr(double value);

std::optional<std::string> canonical_float(std::string_view token);
std::optional<std::string> canonical_imag(std::string_view token);

/// Canonical repr of a str value given as code points: single-quoted,
/// ASCII-only, escapes as in Python's `ascii()`.
std::string str_repr(std::u32string_view value);
/// Canonical repr of a bytes value: `b'...'` with `\xNN` escapes.
std::string bytes_repr(std::string_view value);

/// Inverse of str_repr / bytes_repr, tolerant of any valid Python escape.
/// Returns nullopt when the text is not a quoted literal.
std::optional<std::u32string> parse_str_repr(std::string_view repr);
std::optional<std::string> parse_bytes_repr(std::string_view repr);

/// Decode Python escape sequences in a literal body. `bytes` disables
/// `\u` and `\U`. Unknown escapes are kept verbatim; nullopt for
/// truncated `\x`/`\u` escapes.
std::optional<std::u32string> unescape(std::u32string_view body, bool bytes);

/// Re-canonicalize any constant text (used on decoded serializations).
std::optional<std::string> canonicalize(std::string_view text);

/// Parse a canonical float/int repr back to a double (`inf` allowed).
double to_double(std::string_view repr);

// UTF-8 with surrogate code points passed through (WTF-8).
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);
void append_utf8(std::string& out, char32_t cp);

}  // namespace astseq::literals
