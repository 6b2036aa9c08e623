#include "mem2seq/text.hpp"

#include <algorithm>
#include <cctype>

namespace m2s {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

/// Words of the surface keys of `tokens`, in order.
std::vector<std::string> explode(std::span<const std::string> tokens) {
  std::vector<std::string> words;
  for (const auto& token : tokens) {
    for (auto& w : split_whitespace(surface_key(token))) words.push_back(std::move(w));
  }
  return words;
}

}  // namespace

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join(std::span<const std::string> words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) { return split_whitespace(to_lower(text)); }

std::string symbol_form(std::string_view surface) {
  auto words = split_whitespace(to_lower(surface));
  return join(words, "_");
}

std::string surface_key(std::string_view text) {
  std::string lowered = to_lower(text);
  std::replace(lowered.begin(), lowered.end(), '_', ' ');
  auto words = split_whitespace(lowered);
  return join(words, " ");
}

EntityMatcher::EntityMatcher(const std::set<std::string>& entities) {
  for (const auto& e : entities) {
    std::string key = surface_key(e);
    if (key.empty()) continue;
    const std::size_t n = static_cast<std::size_t>(std::count(key.begin(), key.end(), ' ')) + 1;
    by_length_[n].insert(std::move(key));
  }
}

std::size_t EntityMatcher::size() const {
  std::size_t n = 0;
  for (const auto& [len, keys] : by_length_) n += keys.size();
  return n;
}

std::size_t EntityMatcher::match_at(std::span<const std::string> words, std::size_t pos) const {
  for (const auto& [len, keys] : by_length_) {
    if (pos + len > words.size()) continue;
    std::string candidate = words[pos];
    for (std::size_t k = 1; k < len; ++k) {
      candidate += ' ';
      candidate += words[pos + k];
    }
    if (keys.contains(candidate)) return len;
  }
  return 0;
}

std::vector<std::string> EntityMatcher::merge(std::span<const std::string> tokens) const {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t best = 0;
    for (const auto& [len, keys] : by_length_) {
      if (len < 2) break;
      if (i + len > tokens.size()) continue;
      std::string candidate = surface_key(tokens[i]);
      for (std::size_t k = 1; k < len; ++k) candidate += ' ' + surface_key(tokens[i + k]);
      if (keys.contains(candidate)) {
        best = len;
        break;
      }
    }
    if (best >= 2) {
      std::vector<std::string> parts(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                     tokens.begin() + static_cast<std::ptrdiff_t>(i + best));
      out.push_back(join(parts, "_"));
      i += best;
    } else {
      out.push_back(tokens[i]);
      ++i;
    }
  }
  return out;
}

std::vector<std::string> EntityMatcher::find(std::span<const std::string> tokens) const {
  const std::vector<std::string> words = explode(tokens);
  std::vector<std::string> found;
  std::size_t i = 0;
  while (i < words.size()) {
    const std::size_t len = match_at(words, i);
    if (len == 0) {
      ++i;
      continue;
    }
    std::vector<std::string> parts(words.begin() + static_cast<std::ptrdiff_t>(i),
                                   words.begin() + static_cast<std::ptrdiff_t>(i + len));
    found.push_back(join(parts, " "));
    i += len;
  }
  return found;
}

}  // namespace m2s
