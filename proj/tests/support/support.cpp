#include "support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

#include "astseq/dataset.hpp"

namespace fs = std::filesystem;

namespace testsupport {

fs::path data_dir() { return ASTSEQ_TEST_DATA; }
fs::path corpus_dir() { return data_dir() / "corpus"; }

std::vector<GoldenRow> corpus_golden() {
  std::ifstream in(data_dir() / "oracle" / "corpus_golden.tsv");
  if (!in) throw std::runtime_error("missing corpus_golden.tsv");
  std::vector<GoldenRow> rows;
  for (std::string line; std::getline(in, line);) {
    std::istringstream ls(line);
    GoldenRow r;
    std::string fnv;
    ls >> r.relpath >> r.dump_len >> fnv >> r.s4 >> r.s1 >> r.s2 >> r.s4_names >> r.module_stmts;
    r.dump_fnv = std::stoull(fnv, nullptr, 16);
    rows.push_back(r);
  }
  return rows;
}

const std::vector<std::pair<std::string, std::string>>& corpus() {
  static const auto files = astseq::read_py_files(corpus_dir());
  return files;
}

astseq::RunnerConfig runner() {
  astseq::RunnerConfig cfg;
  cfg.interpreter = {ASTSEQ_TEST_PYTHON, "-I"};
  return cfg;
}

fs::path scratch_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("astseq_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace testsupport
