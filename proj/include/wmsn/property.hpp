#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace wmsn {

using PropValue = std::variant<std::int64_t, double, bool, std::string>;

/// Numeric view of a property value; bools map to 0/1, text has none.
std::optional<double> asNumber(const PropValue& value);

/// Small sorted map from property name to scalar value.
class Properties {
 public:
  using Entry = std::pair<std::string, PropValue>;

  Properties() = default;
  Properties(std::initializer_list<Entry> entries);

  void set(std::string_view key, PropValue value);
  const PropValue* find(std::string_view key) const;
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  std::int64_t getInt(std::string_view key) const;
  double getDouble(std::string_view key) const;
  bool getBool(std::string_view key) const;
  const std::string& getString(std::string_view key) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const Properties&, const Properties&) = default;

 private:
  std::vector<Entry> entries_;
};

}  // namespace wmsn
