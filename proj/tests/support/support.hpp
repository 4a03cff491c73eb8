#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "astseq/augmentation.hpp"

namespace testsupport {

std::filesystem::path data_dir();
std::filesystem::path corpus_dir();

/// One row of data/oracle/corpus_golden.tsv, computed by the Python oracle.
struct GoldenRow {
  std::string relpath;
  std::size_t dump_len;
  std::uint64_t dump_fnv;
  std::size_t s4, s1, s2, s4_names, module_stmts;
};

std::vector<GoldenRow> corpus_golden();

/// (relpath, content) for every corpus file, sorted.
const std::vector<std::pair<std::string, std::string>>& corpus();

/// Runner pinned to the interpreter CMake found.
astseq::RunnerConfig runner();

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace testsupport
