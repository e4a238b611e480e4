#include "pseudoqe/utf8.hpp"

namespace pseudoqe {

namespace {

// Length in bytes of the sequence starting at s[i]. Invalid lead bytes and
// truncated sequences decode as a single byte.
std::size_t sequence_length(std::string_view s, std::size_t i) {
  const unsigned char b = static_cast<unsigned char>(s[i]);
  std::size_t len = 1;
  if ((b & 0xE0u) == 0xC0u) {
    len = 2;
  } else if ((b & 0xF0u) == 0xE0u) {
    len = 3;
  } else if ((b & 0xF8u) == 0xF0u) {
    len = 4;
  } else {
    return 1;
  }
  if (i + len > s.size()) return 1;
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0u) != 0x80u) return 1;
  }
  return len;
}

}  // namespace

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); i += sequence_length(s, i)) ++n;
  return n;
}

std::size_t utf8_byte_offset(std::string_view s, std::size_t cp) {
  std::size_t i = 0;
  for (std::size_t seen = 0; seen < cp && i < s.size(); ++seen) {
    i += sequence_length(s, i);
  }
  return i;
}

std::string utf8_substr(std::string_view s, std::size_t begin, std::size_t end) {
  if (end <= begin) return {};
  const std::size_t b = utf8_byte_offset(s, begin);
  const std::size_t e = utf8_byte_offset(s, end);
  return std::string(s.substr(b, e - b));
}

}  // namespace pseudoqe
