#include "riskmesh/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <set>

namespace riskmesh {

TomlError::TomlError(const std::string& message, int line)
    : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

namespace {

bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  nlohmann::json run() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        const std::string key = bare_key();
        skip_spaces();
        expect('=');
        skip_spaces();
        nlohmann::json value = parse_value();
        if (table->contains(key)) fail("duplicate key '" + key + "'");
        (*table)[key] = std::move(value);
      }
      end_of_line();
    }
    return root;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> defined_tables_;

  [[noreturn]] void fail(const std::string& message) const { throw TomlError(message, line_); }

  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return eof() ? '\0' : text_[pos_]; }

  char take() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    take();
  }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) take();
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') take();
    }
  }

  void skip_blank_lines() {
    while (!eof()) {
      skip_spaces();
      skip_comment();
      if (peek() == '\r') take();
      if (peek() == '\n') {
        take();
        continue;
      }
      break;
    }
  }

  // Whitespace, comments and newlines inside arrays.
  void skip_array_space() {
    while (!eof()) {
      const char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        take();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (peek() == '\r') take();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    take();
  }

  std::string bare_key() {
    const std::size_t start = pos_;
    while (!eof() && is_bare_key_char(peek())) take();
    if (pos_ == start) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  nlohmann::json& open_table(nlohmann::json& root) {
    expect('[');
    if (peek() == '[') fail("arrays of tables are not supported");
    skip_spaces();
    std::string path;
    nlohmann::json* table = &root;
    while (true) {
      const std::string part = bare_key();
      path += path.empty() ? part : "." + part;
      auto it = table->find(part);
      if (it == table->end()) {
        (*table)[part] = nlohmann::json::object();
        table = &(*table)[part];
      } else if (it->is_object()) {
        table = &*it;
      } else {
        fail("key '" + path + "' is not a table");
      }
      skip_spaces();
      if (peek() == '.') {
        take();
        skip_spaces();
        continue;
      }
      break;
    }
    expect(']');
    if (!defined_tables_.insert(path).second) fail("table [" + path + "] defined twice");
    return *table;
  }

  nlohmann::json parse_value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (c == '{') fail("inline tables are not supported");
    if (text_.substr(pos_, 4) == "true" && !is_bare_key_char(text_.size() > pos_ + 4 ? text_[pos_ + 4] : ' ')) {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "false" && !is_bare_key_char(text_.size() > pos_ + 5 ? text_[pos_ + 5] : ' ')) {
      pos_ += 5;
      return false;
    }
    return number();
  }

  nlohmann::json basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = take();
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated string");
      switch (take()) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'u': append_utf8(out, hex_digits(4)); break;
        case 'U': append_utf8(out, hex_digits(8)); break;
        default: fail("unsupported escape sequence");
      }
    }
    return out;
  }

  std::uint32_t hex_digits(int count) {
    std::uint32_t value = 0;
    for (int i = 0; i < count; ++i) {
      if (eof() || !std::isxdigit(static_cast<unsigned char>(peek()))) fail("malformed unicode escape");
      const char c = take();
      value = value * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(c))
                                                          ? c - '0'
                                                          : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
    }
    if (value > 0x10FFFF || (value >= 0xD800 && value <= 0xDFFF)) fail("invalid unicode scalar value");
    return value;
  }

  static void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  nlohmann::json literal_string() {
    expect('\'');
    const std::size_t start = pos_;
    while (!eof() && peek() != '\'' && peek() != '\n') take();
    if (peek() != '\'') fail("unterminated string");
    std::string out(text_.substr(start, pos_ - start));
    take();
    return out;
  }

  nlohmann::json array() {
    const int opened = line_;
    expect('[');
    nlohmann::json out = nlohmann::json::array();
    while (true) {
      skip_array_space();
      if (eof()) throw TomlError("unterminated array", opened);
      if (peek() == ']') {
        take();
        return out;
      }
      out.push_back(parse_value());
      skip_array_space();
      if (eof()) throw TomlError("unterminated array", opened);
      if (peek() == ',') {
        take();
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  nlohmann::json number() {
    const std::size_t start = pos_;
    while (!eof()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' || c == '_') {
        take();
      } else {
        break;
      }
    }
    std::string token;
    for (char c : text_.substr(start, pos_ - start)) {
      if (c != '_') token += c;
    }
    if (token.empty()) fail("expected a value");
    std::string body = token;
    if (body[0] == '+') body.erase(0, 1);
    if (body == "inf" || body == "-inf") return body[0] == '-' ? -HUGE_VAL : HUGE_VAL;
    if (body == "nan" || body == "-nan") return std::nan("");

    const bool is_float = body.find_first_of(".eE") != std::string::npos;
    const char* first = body.data();
    const char* last = body.data() + body.size();
    if (is_float) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || ptr != last) fail("invalid number '" + token + "'");
      return v;
    }
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail("invalid value '" + token + "'");
    return v;
  }
};

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return Parser(text).run(); }

}  // namespace riskmesh
