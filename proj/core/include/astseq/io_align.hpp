#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "astseq/encoder.hpp"
#include "astseq/vocabulary.hpp"

namespace astseq {

/// One I/O example. Each value is the text of a Python literal expression.
struct IOSample {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  friend bool operator==(const IOSample&, const IOSample&) = default;
};

struct LiteralTokens {
  std::vector<AccessoryToken> content;  // S4 of the literal
  std::vector<FrameToken> syntax;       // S3, one longer than content
};

/// Encodes one literal expression (numbers, strings, bytes, None/True/False,
/// and lists, tuples, sets and dicts of those). Throws SyntaxError, or
/// SchemaMismatch for a non-literal expression.
LiteralTokens tokenize_literal(std::string_view value);

/// `[[in_1, in_2, ...], [out_1, ...]]`, each value parenthesized.
std::string io_literal(const IOSample& s);

struct ContentCell {
  std::optional<Special> pad;  // AlignPad or WaitPad
  AccessoryToken token;

  friend bool operator==(const ContentCell&, const ContentCell&) = default;
};

struct SyntaxCell {
  std::optional<Special> pad;
  std::string text;

  friend bool operator==(const SyntaxCell&, const SyntaxCell&) = default;
};

struct SlotRange {
  std::size_t begin;
  std::size_t end;  // exclusive

  friend bool operator==(const SlotRange&, const SlotRange&) = default;
};

/// Rows are samples. Columns are the slots (inputs then outputs), each as
/// wide as its longest sample, followed by one closing column that holds
/// the literal's trailing frame against WAIT_PAD content. Shorter slots are
/// front-filled with ALIGN_PAD in both grids; an empty frame between two
/// pieces of one leaf shows as WAIT_PAD in the syntax grid.
struct AlignedIOMatrix {
  std::vector<std::vector<ContentCell>> content;
  std::vector<std::vector<SyntaxCell>> syntax;
  std::vector<SlotRange> slots;

  std::size_t rows() const { return content.size(); }
  std::size_t cols() const { return content.empty() ? 0 : content.front().size(); }
  friend bool operator==(const AlignedIOMatrix&, const AlignedIOMatrix&) = default;
};

/// Throws SlotArityMismatch when samples disagree on input or output count,
/// std::invalid_argument when `samples` is empty.
AlignedIOMatrix align(const std::vector<IOSample>& samples);

/// Row r with padding removed: the tokens of io_literal(samples[r]).
LiteralTokens strip_row(const AlignedIOMatrix& m, std::size_t r);

struct IdGrid {
  std::vector<std::vector<int>> content;
  std::vector<std::vector<int>> syntax;
  std::size_t unks = 0;
};

/// Tokens missing from the vocabulary become UNK and are counted.
IdGrid to_ids(const AlignedIOMatrix& m, const Vocabulary& v);

}  // namespace astseq
