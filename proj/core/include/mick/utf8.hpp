#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mick::utf8 {

// Throws ValidationError on malformed input.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);

// Each unicode scalar value of `text` as its own UTF-8 string.
std::vector<std::string> split_chars(std::string_view text);

}  // namespace mick::utf8
