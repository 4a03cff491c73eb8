#include <benchmark/benchmark.h>

#include "astseq/dataset.hpp"
#include "astseq/decoder.hpp"
#include "astseq/encoder.hpp"
#include "astseq/io_align.hpp"
#include "astseq/parser.hpp"
#include "astseq/vocabulary.hpp"

using namespace astseq;

namespace {

EncodeOptions full() {
  EncodeOptions o;
  o.replace_names = true;
  o.strip_docs = true;
  return o;
}

const std::vector<std::string>& sources() {
  static const auto srcs = [] {
    std::vector<std::string> out;
    for (auto& [p, s] : read_py_files(ASTSEQ_BENCH_CORPUS)) out.push_back(std::move(s));
    return out;
  }();
  return srcs;
}

std::int64_t total_bytes() {
  std::int64_t n = 0;
  for (const auto& s : sources()) n += static_cast<std::int64_t>(s.size());
  return n;
}

void BM_Parse(benchmark::State& st) {
  for (auto _ : st)
    for (const auto& s : sources()) benchmark::DoNotOptimize(parse(s));
  st.SetBytesProcessed(st.iterations() * total_bytes());
}
BENCHMARK(BM_Parse)->Unit(benchmark::kMillisecond);

void BM_Encode(benchmark::State& st) {
  auto opts = full();
  for (auto _ : st)
    for (const auto& s : sources()) benchmark::DoNotOptimize(encode(s, opts));
  st.SetBytesProcessed(st.iterations() * total_bytes());
}
BENCHMARK(BM_Encode)->Unit(benchmark::kMillisecond);

void BM_Decode(benchmark::State& st) {
  std::vector<SubsequenceBundle> bundles;
  for (const auto& s : sources()) bundles.push_back(encode(s, full()));
  for (auto _ : st)
    for (const auto& b : bundles) benchmark::DoNotOptimize(decode(b.s3, b.s4));
}
BENCHMARK(BM_Decode)->Unit(benchmark::kMillisecond);

void BM_VocabBuild(benchmark::State& st) {
  auto jobs = static_cast<unsigned>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(build_frame_vocab(sources(), 1, full(), jobs));
}
BENCHMARK(BM_VocabBuild)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Align(benchmark::State& st) {
  std::vector<IOSample> io;
  for (int i = 0; i < st.range(0); ++i) {
    std::string list = "[";
    for (int k = 0; k <= i % 9; ++k) list += (k ? "," : "") + std::to_string(k * 37 + i);
    io.push_back({{list + "]", std::to_string(i)}, {"'" + std::string(i % 5 + 1, 'a') + "'"}});
  }
  for (auto _ : st) benchmark::DoNotOptimize(align(io));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Align)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
