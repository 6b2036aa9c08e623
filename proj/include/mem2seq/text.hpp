#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace m2s {

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
/// Splits on any run of ASCII whitespace.
std::vector<std::string> split_whitespace(std::string_view text);
std::string join(std::span<const std::string> words, std::string_view sep = " ");

/// Lowercased, whitespace-split tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Vocabulary symbol for a surface form: lowercase, internal whitespace
/// replaced by '_' ("5 miles" -> "5_miles").
std::string symbol_form(std::string_view surface);

/// Comparison key for copy matching and evaluation: lowercase, '_' read as
/// a space, single-space joined ("5_miles" and "5 Miles" -> "5 miles").
std::string surface_key(std::string_view text);

/// Greedy longest-first matcher over a list of (possibly multi-word)
/// entities. Entities and input are compared as surface keys.
class EntityMatcher {
 public:
  EntityMatcher() = default;
  explicit EntityMatcher(const std::set<std::string>& entities);

  /// Joins multi-word entity mentions in `tokens` into single '_' tokens.
  std::vector<std::string> merge(std::span<const std::string> tokens) const;

  /// Entity occurrences (as surface keys) in a token sequence, scanning
  /// left to right and preferring the longest match at each position.
  std::vector<std::string> find(std::span<const std::string> tokens) const;

  bool empty() const { return by_length_.empty(); }
  std::size_t size() const;

 private:
  /// Words of the match starting at `pos`, or 0.
  std::size_t match_at(std::span<const std::string> words, std::size_t pos) const;

  // word count -> entity keys of that many words
  std::map<std::size_t, std::set<std::string>, std::greater<>> by_length_;
};

}  // namespace m2s
