#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace pseudoqe {

// Character indices throughout the toolkit count Unicode scalar values, not
// bytes. Invalid UTF-8 bytes are treated as one scalar each so every function
// here is total.

// Number of scalar values in s.
std::size_t utf8_length(std::string_view s);

// Byte offset where scalar number cp starts; s.size() if cp is past the end.
std::size_t utf8_byte_offset(std::string_view s, std::size_t cp);

// Substring covering scalar range [begin, end).
std::string utf8_substr(std::string_view s, std::size_t begin, std::size_t end);

}  // namespace pseudoqe
