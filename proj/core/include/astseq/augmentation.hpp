#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "astseq/error.hpp"
#include "astseq/io_align.hpp"

namespace astseq {

enum class GeneratorKind {
  Uniform,
  QuantizedGaussian,
  AlmostSorted,
  AllSame,
  AlmostSame,
  LengthControlled,
  StringUniform,
};

std::string_view generator_name(GeneratorKind k);
GeneratorKind parse_generator(std::string_view name);  // std::invalid_argument

struct Range {
  long long lo;
  long long hi;  // inclusive
};

/// Unset ranges are taken from the slot schema.
struct GeneratorParams {
  std::optional<Range> values;
  std::optional<Range> lengths;
  double swap_fraction = 0.1;       // almost_sorted: pairs swapped per element
  double exception_fraction = 0.1;  // almost_same: elements that differ
};

struct GeneratorSpec {
  GeneratorKind kind;
  GeneratorParams params;
  double weight;
};

/// uniform .35, quantized_gaussian .2, almost_sorted .15, all_same .05,
/// almost_same .1, length_controlled .1, string_uniform .05.
std::vector<GeneratorSpec> default_mixture();

/// Throws std::invalid_argument unless weights are non-negative and sum to
/// 1 and every parameter is in range.
void validate_mixture(const std::vector<GeneratorSpec>& mixture);

enum class SlotType { Int, Bool, Float, Str, IntList, StrList };
std::string_view slot_type_name(SlotType t);

struct SlotSchema {
  SlotType type;
  Range values{0, 0};   // ints and list elements
  Range lengths{0, 0};  // lists and strings
  double fmin = 0, fmax = 0;
  std::string alphabet;  // strings
};

struct InputSchema {
  std::vector<SlotSchema> slots;
  /// Int slot whose value is the length of another slot, as seen in every
  /// seed example.
  std::optional<std::size_t> length_slot;
  std::optional<std::size_t> sized_slot;
  /// IntList slot whose first element is the length of the rest.
  std::optional<std::size_t> self_sized_slot;
};

/// Infers slot types and ranges from seed inputs. Throws SchemaMismatch
/// when a slot is not one of the supported types or seeds disagree.
InputSchema infer_schema(const std::vector<IOSample>& seeds);

/// n input tuples (literal texts per slot); deterministic given seed.
/// Throws SchemaMismatch when no generator with positive weight applies to
/// any slot of the schema.
std::vector<std::vector<std::string>> generate_inputs(const std::vector<GeneratorSpec>& mixture,
                                                      const InputSchema& schema, std::size_t n,
                                                      std::uint64_t seed);

/// One draw of a single slot with a fixed generator kind.
std::string draw_slot(GeneratorKind kind, const GeneratorParams& params, const SlotSchema& slot,
                      std::mt19937_64& rng);

struct RunnerConfig {
  /// Interpreter argv prefix; the program is passed as `-c <program>`.
  std::vector<std::string> interpreter = default_interpreter();
  double time_limit_s = 2.0;
  std::size_t memory_limit_mb = 512;
  std::size_t max_output_bytes = 1 << 20;

  /// $ASTSEQ_PYTHON split on spaces, else `python3 -I`.
  static std::vector<std::string> default_interpreter();
};

enum class RunStatus { Ok, Timeout, Crash, OutputTooLarge };
std::string_view run_status_name(RunStatus s);

struct RunResult {
  RunStatus status = RunStatus::Crash;
  /// One literal per stdout line; lines that are not literals are kept as
  /// string literals.
  std::vector<std::string> outputs;
  std::string detail;  // exit code / signal and stderr tail for crashes
};

/// stdin text for one input tuple: one line per slot, strings written raw,
/// every other value as its literal text.
std::string render_stdin(const std::vector<std::string>& inputs);

/// Runs the program in a child process with CPU, wall-clock, address-space
/// and file-size limits. Never throws for program failures.
RunResult run_reference(const std::string& program, const std::vector<std::string>& inputs,
                        const RunnerConfig& cfg);

/// Drops seed-chosen pairs from the majority label until the two labels
/// differ by at most one. The first `protect` pairs are dropped only when
/// nothing else is left. Pairs whose single output is not True/False are
/// kept as they are.
std::vector<IOSample> balance_outputs(const std::vector<IOSample>& pairs, std::uint64_t seed,
                                      std::size_t protect = 0);

bool is_boolean_output(const IOSample& s);

struct Instance {
  std::string name;
  std::string description;
  std::string program;
  std::vector<IOSample> io;
};

struct AugmentOptions {
  std::size_t min_pairs = 100;
  /// Reference runs allowed before giving up. Generated inputs that repeat
  /// an earlier one are not run; at most 20x this many are drawn.
  std::size_t max_attempts = 4000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

struct AugmentReport {
  std::size_t attempts = 0;      // reference runs
  std::size_t failed_runs = 0;   // timeouts, crashes, oversize output
  std::size_t duplicates = 0;    // generated inputs already present
  std::size_t dropped = 0;       // removed by balancing
  std::size_t seed_mismatches = 0;  // seeds whose replay differs from the recorded output
};

struct AugmentResult {
  Instance instance;
  AugmentReport report;
};

class BudgetExhausted : public Error {
 public:
  BudgetExhausted(AugmentResult partial, std::size_t wanted)
      : Error("augmentation budget exhausted: " + std::to_string(partial.instance.io.size()) +
              " of " + std::to_string(wanted) + " pairs"),
        partial_(std::move(partial)) {}
  const AugmentResult& partial() const { return partial_; }
  std::size_t achieved() const { return partial_.instance.io.size(); }

 private:
  AugmentResult partial_;
};

/// Grows the instance's pairs to at least min_pairs, seeds first, every new
/// pair produced by run_reference. Boolean instances are balanced.
/// Throws SchemaMismatch when the seed inputs admit no schema, and
/// BudgetExhausted (carrying the partial result) when attempts run out.
AugmentResult augment_instance(const Instance& inst, const std::vector<GeneratorSpec>& mixture,
                               const RunnerConfig& cfg, const AugmentOptions& opts);

}  // namespace astseq
