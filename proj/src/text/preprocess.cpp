#include <array>

#include "socialgat/text.hpp"

namespace socialgat::text {

namespace {

bool is_space(unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); }

bool is_word(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c >= 0x80;
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool starts_with(std::string_view s, std::size_t pos, std::string_view prefix) {
  return s.substr(pos, prefix.size()) == prefix;
}

constexpr std::array<std::string_view, 3> kPlaceholders = {"<url>", "<hashtag>", "<mention>"};

}  // namespace

std::vector<std::string> preprocess(std::string_view raw) {
  std::string s(raw);
  for (char& c : s) c = lower(c);
  std::vector<std::string> out;
  std::size_t i = 0;
  const auto word_end = [&](std::size_t from) {
    while (from < s.size() && is_word(static_cast<unsigned char>(s[from]))) ++from;
    return from;
  };
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (starts_with(s, i, "http://") || starts_with(s, i, "https://") || starts_with(s, i, "www.")) {
      while (i < s.size() && !is_space(static_cast<unsigned char>(s[i]))) ++i;
      out.emplace_back("<url>");
      continue;
    }
    bool placeholder = false;
    for (auto p : kPlaceholders) {
      if (starts_with(s, i, p)) {
        out.emplace_back(p);
        i += p.size();
        placeholder = true;
        break;
      }
    }
    if (placeholder) continue;
    if ((c == '#' || c == '@') && i + 1 < s.size() && is_word(static_cast<unsigned char>(s[i + 1]))) {
      i = word_end(i + 1);
      out.emplace_back(c == '#' ? "<hashtag>" : "<mention>");
      continue;
    }
    if (is_word(c)) {
      const std::size_t end = word_end(i);
      out.emplace_back(s.substr(i, end - i));
      i = end;
      continue;
    }
    out.emplace_back(1, s[i]);
    ++i;
  }
  return out;
}

}  // namespace socialgat::text
