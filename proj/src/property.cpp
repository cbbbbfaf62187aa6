#include "wmsn/property.hpp"

#include <algorithm>
#include <stdexcept>

namespace wmsn {

std::optional<double> asNumber(const PropValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&value)) return *d;
  if (const auto* b = std::get_if<bool>(&value)) return *b ? 1.0 : 0.0;
  return std::nullopt;
}

Properties::Properties(std::initializer_list<Entry> entries) {
  for (const auto& [key, value] : entries) set(key, value);
}

void Properties::set(std::string_view key, PropValue value) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const Entry& e, std::string_view k) { return e.first < k; });
  if (it != entries_.end() && it->first == key) {
    it->second = std::move(value);
  } else {
    entries_.emplace(it, std::string(key), std::move(value));
  }
}

const PropValue* Properties::find(std::string_view key) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const Entry& e, std::string_view k) { return e.first < k; });
  if (it != entries_.end() && it->first == key) return &it->second;
  return nullptr;
}

namespace {

[[noreturn]] void missing(std::string_view key) {
  throw std::out_of_range("property '" + std::string(key) + "' missing or mistyped");
}

}  // namespace

std::int64_t Properties::getInt(std::string_view key) const {
  const auto* v = find(key);
  if (v == nullptr) missing(key);
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  missing(key);
}

double Properties::getDouble(std::string_view key) const {
  const auto* v = find(key);
  if (v == nullptr || std::holds_alternative<std::string>(*v)) missing(key);
  return *asNumber(*v);
}

bool Properties::getBool(std::string_view key) const {
  const auto* v = find(key);
  if (v == nullptr) missing(key);
  if (const auto* b = std::get_if<bool>(v)) return *b;
  missing(key);
}

const std::string& Properties::getString(std::string_view key) const {
  const auto* v = find(key);
  if (v == nullptr) missing(key);
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  missing(key);
}

}  // namespace wmsn
