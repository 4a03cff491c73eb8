#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "astseq/ast.hpp"
#include "astseq/encoder.hpp"

namespace astseq {

/// Glues S3/S4 and reads the serialized tree back. Throws LengthMismatch
/// or MalformedSerialization.
ast::Node decode_tree(const std::vector<FrameToken>& s3, const std::vector<AccessoryToken>& s4);

/// decode_tree followed by unparse. The result is checked to re-parse to
/// the decoded tree; a tree with no faithful source rendering (for example
/// an empty statement body) is reported as MalformedSerialization.
std::string decode(const std::vector<FrameToken>& s3, const std::vector<AccessoryToken>& s4);

struct RoundtripReport {
  bool ok = false;
  bool tree_equal = false;
  /// Empty when ok; otherwise the failing stage and its message, or the
  /// path of the first tree divergence.
  std::string diagnostics;
};

/// parse -> transform -> encode -> decode -> parse, compared against the
/// transformed tree. Never throws.
RoundtripReport roundtrip_check(std::string_view source, const EncodeOptions& opts = {});

}  // namespace astseq
