#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace powersense {

// `key = value` text with `#` comments. Keys may repeat.
class KeyValueText {
 public:
  struct Entry {
    std::string key;
    std::string value;
    int line = 0;
  };

  static KeyValueText parse(std::string_view text);
  static KeyValueText load(const std::string& path);

  const std::vector<Entry>& entries() const { return entries_; }
  // Last value for `key`, if any.
  std::optional<std::string> get(std::string_view key) const;
  std::vector<const Entry*> get_all(std::string_view key) const;

 private:
  std::vector<Entry> entries_;
};

double parse_double(const std::string& s, std::string_view what);
long long parse_int(const std::string& s, std::string_view what);
std::size_t parse_count(const std::string& s, std::string_view what);
bool parse_bool(const std::string& s, std::string_view what);
// Whitespace- or comma-separated numbers.
std::vector<double> parse_number_list(const std::string& s, std::string_view what);

}  // namespace powersense
