#include "astseq/builtins.hpp"

#include <sstream>

namespace astseq {

namespace detail {
extern const char* const kBuiltinsText;
}

const std::vector<std::string>& builtin_list() {
  static const std::vector<std::string> list = [] {
    std::vector<std::string> out;
    std::istringstream in(detail::kBuiltinsText);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) out.push_back(line);
    return out;
  }();
  return list;
}

const std::unordered_set<std::string>& builtin_set() {
  static const std::unordered_set<std::string> set(builtin_list().begin(),
                                                   builtin_list().end());
  return set;
}

}  // namespace astseq
