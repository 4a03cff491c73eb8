#pragma once

#include <string>
#include <string_view>

#include "astseq/encoder.hpp"

namespace astseq {

/// Versioned JSON text holding s1..s4 as string arrays, the accessory
/// categories, s1/s2 positions in s3, newline/indent layout and the name
/// map. Deterministic for a given bundle.
std::string bundle_to_text(const SubsequenceBundle& b);

/// Throws std::runtime_error on a malformed or foreign file.
SubsequenceBundle bundle_from_text(std::string_view text);

}  // namespace astseq
