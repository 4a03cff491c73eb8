#include "astseq/io_align.hpp"

#include <algorithm>
#include <stdexcept>

#include "astseq/error.hpp"
#include "astseq/parser.hpp"

namespace astseq {

using ast::Node;

namespace {

bool is_literal(const Node& e) {
  if (e.is("Constant")) return true;
  if (e.is("List") || e.is("Tuple") || e.is("Set")) {
    for (const auto& x : e.field("elts").children)
      if (!is_literal(x)) return false;
    return true;
  }
  if (e.is("Dict")) {
    for (const auto& k : e.field("keys").children)
      if (k.kind == ast::NodeKind::None || !is_literal(k)) return false;
    for (const auto& x : e.field("values").children)
      if (!is_literal(x)) return false;
    return true;
  }
  if (e.is("UnaryOp")) {
    const Node& op = e.field("op");
    return (op.is("USub") || op.is("UAdd")) && e.field("operand").is("Constant");
  }
  // complex numbers: 1+2j, -1-2j
  if (e.is("BinOp")) {
    const Node& op = e.field("op");
    return (op.is("Add") || op.is("Sub")) && is_literal(e.field("left")) &&
           e.field("right").is("Constant");
  }
  return false;
}

LiteralTokens encode_module(std::string_view source) {
  SubsequenceBundle b = encode(source, EncodeOptions{});
  return {std::move(b.s4), std::move(b.s3)};
}

}  // namespace

LiteralTokens tokenize_literal(std::string_view value) {
  ast::SyntaxTree t = parse(value);
  const auto& body = t.root.field("body").children;
  if (body.size() != 1 || !body[0].is("Expr") || !is_literal(body[0].field("value")))
    throw SchemaMismatch("not a literal expression: " + std::string(value));
  return encode_module(value);
}

std::string io_literal(const IOSample& s) {
  auto join = [](const std::vector<std::string>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (i) out += ", ";
      out += '(' + vs[i] + ')';
    }
    return out;
  };
  return "[[" + join(s.inputs) + "], [" + join(s.outputs) + "]]";
}

AlignedIOMatrix align(const std::vector<IOSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("align needs at least one sample");
  const std::size_t n_in = samples[0].inputs.size();
  const std::size_t n_out = samples[0].outputs.size();
  for (std::size_t r = 1; r < samples.size(); ++r) {
    if (samples[r].inputs.size() != n_in || samples[r].outputs.size() != n_out)
      throw SlotArityMismatch("sample " + std::to_string(r) + " has " +
                              std::to_string(samples[r].inputs.size()) + " inputs and " +
                              std::to_string(samples[r].outputs.size()) + " outputs, sample 0 has " +
                              std::to_string(n_in) + " and " + std::to_string(n_out));
  }
  const std::size_t n_slots = n_in + n_out;

  std::vector<LiteralTokens> whole;
  std::vector<std::vector<std::size_t>> counts(samples.size(), std::vector<std::size_t>(n_slots));
  std::vector<std::size_t> width(n_slots, 0);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const IOSample& s = samples[r];
    std::size_t sum = 0;
    for (std::size_t k = 0; k < n_slots; ++k) {
      const std::string& v = k < n_in ? s.inputs[k] : s.outputs[k - n_in];
      // Leaf pieces do not depend on context, so a value's token count is
      // the same alone as inside the combined literal.
      counts[r][k] = tokenize_literal(v).content.size();
      width[k] = std::max(width[k], counts[r][k]);
      sum += counts[r][k];
    }
    whole.push_back(encode_module(io_literal(s)));
    if (whole.back().content.size() != sum)
      throw std::logic_error("slot token counts do not add up for sample " + std::to_string(r));
  }

  AlignedIOMatrix m;
  std::size_t col = 0;
  for (std::size_t k = 0; k < n_slots; ++k) {
    m.slots.push_back({col, col + width[k]});
    col += width[k];
  }
  const ContentCell align_c{Special::AlignPad, {}};
  const SyntaxCell align_s{Special::AlignPad, {}};
  for (std::size_t r = 0; r < samples.size(); ++r) {
    std::vector<ContentCell> crow;
    std::vector<SyntaxCell> srow;
    crow.reserve(col + 1);
    srow.reserve(col + 1);
    std::size_t j = 0;
    for (std::size_t k = 0; k < n_slots; ++k) {
      for (std::size_t p = counts[r][k]; p < width[k]; ++p) {
        crow.push_back(align_c);
        srow.push_back(align_s);
      }
      for (std::size_t p = 0; p < counts[r][k]; ++p, ++j) {
        crow.push_back({std::nullopt, whole[r].content[j]});
        const std::string& f = whole[r].syntax[j].text;
        if (f.empty())
          srow.push_back({Special::WaitPad, {}});
        else
          srow.push_back({std::nullopt, f});
      }
    }
    crow.push_back({Special::WaitPad, {}});
    srow.push_back({std::nullopt, whole[r].syntax.back().text});
    m.content.push_back(std::move(crow));
    m.syntax.push_back(std::move(srow));
  }
  return m;
}

LiteralTokens strip_row(const AlignedIOMatrix& m, std::size_t r) {
  LiteralTokens out;
  const auto& crow = m.content.at(r);
  const auto& srow = m.syntax.at(r);
  for (std::size_t c = 0; c < crow.size(); ++c) {
    if (crow[c].pad == Special::AlignPad) continue;
    out.syntax.push_back(FrameToken{srow[c].pad ? std::string() : srow[c].text, false, 0});
    if (!crow[c].pad) out.content.push_back(crow[c].token);
  }
  return out;
}

IdGrid to_ids(const AlignedIOMatrix& m, const Vocabulary& v) {
  IdGrid g;
  const int unk = static_cast<int>(Special::Unk);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<int> crow, srow;
    for (const auto& c : m.content[r]) {
      int id = c.pad ? static_cast<int>(*c.pad) : v.accessory_id(c.token.category, c.token.text);
      if (id == unk) ++g.unks;
      crow.push_back(id);
    }
    for (const auto& s : m.syntax[r]) {
      int id = s.pad ? static_cast<int>(*s.pad) : v.frame_id(s.text);
      if (id == unk) ++g.unks;
      srow.push_back(id);
    }
    g.content.push_back(std::move(crow));
    g.syntax.push_back(std::move(srow));
  }
  return g;
}

}  // namespace astseq
