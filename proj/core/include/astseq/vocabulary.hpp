#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "astseq/encoder.hpp"

namespace astseq {

enum class Special : int { Pad = 0, Eos = 1, AlignPad = 2, WaitPad = 3, Unk = 4 };
inline constexpr int kNumSpecials = 5;

std::string_view special_name(Special s);

struct AccessoryEntry {
  AccessoryCategory category;
  std::string text;

  friend bool operator==(const AccessoryEntry&, const AccessoryEntry&) = default;
};

/// Pool names (user_name), builtins, digits 0-9, printable ASCII and the
/// common floats, in that order. Throws DuplicateEntry when a name appears
/// twice across pools and builtins, or a float is listed twice.
std::vector<AccessoryEntry> build_accessory_vocab(const NamePool& pool,
                                                  const std::vector<std::string>& builtins,
                                                  const std::vector<std::string>& common_floats);
/// Same, from the builtin table and the options' pool and floats.
std::vector<AccessoryEntry> build_accessory_vocab(const EncodeOptions& opts);

struct FrameCount {
  std::string text;
  std::uint64_t count = 0;

  friend bool operator==(const FrameCount&, const FrameCount&) = default;
};

enum class TokenKind { Special, Accessory, Frame };

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Frames with count >= min_count get ids after the accessory block,
  /// ordered by count descending, then text.
  Vocabulary(std::vector<AccessoryEntry> accessory, std::vector<FrameCount> frames,
             std::uint64_t min_count);

  std::size_t size() const { return kNumSpecials + accessory_.size() + frames_.size(); }
  std::size_t accessory_size() const { return accessory_.size(); }
  std::size_t frame_size() const { return frames_.size(); }
  std::uint64_t min_count() const { return min_count_; }

  /// Unk when absent.
  int frame_id(std::string_view text) const;
  int accessory_id(AccessoryCategory c, std::string_view text) const;
  bool has_accessory(AccessoryCategory c, std::string_view text) const;

  TokenKind kind(int id) const;  // throws UnknownId
  const AccessoryEntry& accessory(int id) const;
  const FrameCount& frame(int id) const;
  /// Printable form of any id: `<PAD>`, accessory text or frame text.
  std::string text(int id) const;

  const std::vector<AccessoryEntry>& accessory_entries() const { return accessory_; }
  /// Frame entries in id order.
  const std::vector<FrameCount>& frames() const { return frames_; }

  void save(std::ostream& os) const;
  std::string to_string() const;
  /// Throws std::runtime_error on a malformed file.
  static Vocabulary load(std::istream& is);
  static Vocabulary from_string(std::string_view text);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.accessory_ == b.accessory_ && a.frames_ == b.frames_ && a.min_count_ == b.min_count_;
  }

 private:
  void index();

  std::vector<AccessoryEntry> accessory_;
  std::vector<FrameCount> frames_;
  std::uint64_t min_count_ = 1;
  std::unordered_map<std::string, int> frame_ids_;
  std::unordered_map<std::string, int> accessory_ids_;  // key: category '\0' text
};

inline constexpr std::uint64_t kNeverKeep = std::numeric_limits<std::uint64_t>::max();

struct VocabBuild {
  Vocabulary vocab;
  /// Every swept frame token, including those below min_count, sorted like
  /// the vocabulary.
  std::vector<FrameCount> histogram;
  std::size_t files = 0;
  /// Files that failed to parse or encode, with the reason.
  std::vector<std::pair<std::size_t, std::string>> skipped;
};

/// Frame-token counts of one encoded file.
std::vector<FrameCount> count_frames(const SubsequenceBundle& b);

/// Sweeps `sources` (file contents) with `opts` and counts S3 tokens.
/// `literals` are I/O literal texts (see io_literal) whose syntax tokens are
/// counted too; ones that fail to tokenize are left out.
VocabBuild build_frame_vocab(std::span<const std::string> sources, std::uint64_t min_count,
                             const EncodeOptions& opts = {}, unsigned jobs = 1,
                             std::span<const std::string> literals = {});

struct IdBundle {
  std::vector<int> s1, s2, s3, s4;
  std::vector<std::pair<std::string, std::string>> name_map;

  friend bool operator==(const IdBundle&, const IdBundle&) = default;
};

struct UnkPosition {
  int segment;  // 1..4
  std::size_t index;
  std::string text;
};

struct IdEncoding {
  IdBundle ids;
  std::vector<UnkPosition> unks;
};

IdEncoding encode_ids(const SubsequenceBundle& b, const Vocabulary& v);

/// Inverse of encode_ids on UNK-free input. Throws UnknownId for ids out of
/// range or of the wrong kind for their segment (UNK included). Layout flags
/// and s1/s2 positions are not recoverable from ids and are left default.
SubsequenceBundle decode_ids(const IdBundle& ids, const Vocabulary& v);

struct FrequencyRow {
  std::string text;
  std::uint64_t count;
  std::size_t rank;  // 1-based
};

std::vector<FrequencyRow> frequency_report(const Vocabulary& v);

struct TailSummary {
  std::size_t distinct = 0;
  std::uint64_t total = 0;
  std::size_t rare = 0;  // count <= rare_max
  double rare_fraction = 0;
};

TailSummary tail_summary(std::span<const FrameCount> histogram, std::uint64_t rare_max = 2);

std::string escape_token(std::string_view s);
std::string unescape_token(std::string_view s);

}  // namespace astseq
