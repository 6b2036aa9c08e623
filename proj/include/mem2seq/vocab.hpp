#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace m2s {

/// Word <-> id map with dense ids. Ids 0..4 are reserved and fixed.
class Vocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kSos = 2;
  static constexpr std::size_t kEos = 3;
  static constexpr std::size_t kSentinel = 4;
  static constexpr std::size_t kReservedCount = 5;

  static constexpr std::string_view kPadWord = "PAD";
  static constexpr std::string_view kUnkWord = "UNK";
  static constexpr std::string_view kSosWord = "SOS";
  static constexpr std::string_view kEosWord = "EOS";
  static constexpr std::string_view kSentinelWord = "$";

  static constexpr std::string_view kUserTag = "$u";
  static constexpr std::string_view kSystemTag = "$s";
  static constexpr std::size_t kMaxTimeTag = 40;

  Vocab();

  /// Rebuilds a vocabulary from its id-ordered word table; the reserved
  /// prefix must match.
  static Vocab from_words(std::vector<std::string> words);

  /// Adds the speaker tags and t1..t40.
  void add_tags();
  std::size_t add(std::string_view word);

  std::optional<std::size_t> find(std::string_view word) const;
  /// Id of `word`, or kUnk.
  std::size_t id(std::string_view word) const;
  const std::string& word(std::size_t id) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  bool operator==(const Vocab& other) const { return words_ == other.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> ids_;
};

/// "t<turn>" with turn clamped to [1, Vocab::kMaxTimeTag].
std::string time_tag(std::size_t turn);

}  // namespace m2s
