#include "astseq/decoder.hpp"

#include "astseq/error.hpp"
#include "astseq/parser.hpp"
#include "astseq/serialize.hpp"
#include "astseq/unparse.hpp"

namespace astseq {

ast::Node decode_tree(const std::vector<FrameToken>& s3, const std::vector<AccessoryToken>& s4) {
  return serial::parse_dump(interleave(s3, s4));
}

std::string decode(const std::vector<FrameToken>& s3, const std::vector<AccessoryToken>& s4) {
  ast::Node tree = decode_tree(s3, s4);
  std::string source;
  try {
    source = unparse(tree);
    if (!(parse(source).root == tree))
      throw MalformedSerialization(0, "decoded tree has no faithful source rendering");
  } catch (const MalformedSerialization&) {
    throw;
  } catch (const Error& e) {
    throw MalformedSerialization(0, std::string("decoded tree is not a valid program: ") + e.what());
  }
  return source;
}

RoundtripReport roundtrip_check(std::string_view source, const EncodeOptions& opts) {
  RoundtripReport r;
  const char* stage = "parse";
  try {
    ast::SyntaxTree tree = parse(source);
    stage = "transform";
    RenameResult t = transform(tree.root, opts);
    stage = "encode";
    SubsequenceBundle b = encode_tree(t.tree, opts);
    stage = "decode";
    std::string text = decode(b.s3, b.s4);
    stage = "reparse";
    ast::SyntaxTree back = parse(text);
    r.tree_equal = back.root == t.tree;
    r.ok = r.tree_equal;
    if (!r.ok) r.diagnostics = "tree divergence at " + ast::first_divergence(t.tree, back.root);
  } catch (const UnsupportedConstruct& e) {
    r.diagnostics = std::string("UnsupportedConstruct: ") + e.construct();
  } catch (const SyntaxError& e) {
    r.diagnostics = std::string(stage) + ": SyntaxError: " + e.what();
  } catch (const std::exception& e) {
    r.diagnostics = std::string(stage) + ": " + e.what();
  }
  return r;
}

}  // namespace astseq
