#ifndef PPD_JSON_TEXT_HPP
#define PPD_JSON_TEXT_HPP

#include <algorithm>
#include <string>

#include <json.hpp>

#include "ppd/error.hpp"

namespace ppd {

/// Parses JSON text; syntax errors become ParseError with a line and column.
inline nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Byte offset to line/column for the error message.
    const std::size_t pos = std::min(e.byte, text.size());
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(origin + ": invalid JSON", line, col);
  }
}

}  // namespace ppd

#endif  // PPD_JSON_TEXT_HPP
