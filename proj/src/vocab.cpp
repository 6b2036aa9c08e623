#include "mem2seq/vocab.hpp"

#include <algorithm>
#include <stdexcept>

namespace m2s {

Vocab::Vocab() {
  for (auto w : {kPadWord, kUnkWord, kSosWord, kEosWord, kSentinelWord}) add(w);
}

Vocab Vocab::from_words(std::vector<std::string> words) {
  Vocab v;
  if (words.size() < kReservedCount) throw std::invalid_argument("vocabulary lacks reserved entries");
  for (std::size_t i = 0; i < kReservedCount; ++i) {
    if (words[i] != v.words_[i]) {
      throw std::invalid_argument("reserved vocabulary entry " + std::to_string(i) + " is '" + words[i] +
                                  "', expected '" + v.words_[i] + "'");
    }
  }
  for (std::size_t i = kReservedCount; i < words.size(); ++i) {
    if (v.contains(words[i])) throw std::invalid_argument("duplicate vocabulary entry '" + words[i] + "'");
    v.add(words[i]);
  }
  return v;
}

void Vocab::add_tags() {
  add(kUserTag);
  add(kSystemTag);
  for (std::size_t t = 1; t <= kMaxTimeTag; ++t) add(time_tag(t));
}

std::size_t Vocab::add(std::string_view word) {
  if (auto found = find(word)) return *found;
  const std::size_t id = words_.size();
  words_.emplace_back(word);
  ids_.emplace(words_.back(), id);
  return id;
}

std::optional<std::size_t> Vocab::find(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocab::id(std::string_view word) const { return find(word).value_or(kUnk); }

const std::string& Vocab::word(std::size_t id) const {
  if (id >= words_.size()) throw std::out_of_range("vocabulary id " + std::to_string(id) + " out of range");
  return words_[id];
}

std::string time_tag(std::size_t turn) {
  return "t" + std::to_string(std::clamp<std::size_t>(turn, 1, Vocab::kMaxTimeTag));
}

}  // namespace m2s
