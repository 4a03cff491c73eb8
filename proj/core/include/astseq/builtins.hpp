#pragma once

#include <string>
#include <unordered_set>
#include <vector>

namespace astseq {

/// The pinned list of Python builtin functions, keywords, common methods and
/// common module names (core/data/builtins.txt), in file order.
const std::vector<std::string>& builtin_list();
const std::unordered_set<std::string>& builtin_set();

}  // namespace astseq
