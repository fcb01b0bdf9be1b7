#include <charconv>

#include "copl/refalg/reference.hpp"

namespace copl::refalg {

Value::Value(ComplexReference r) : v_(std::make_shared<const ComplexReference>(std::move(r))) {}

bool Value::is_nullish() const { return is_null() || (is_ref() && as_ref().empty()); }

const char* Value::type_name() const {
  switch (v_.index()) {
    case 0: return "null";
    case 1: return "int";
    case 2: return "double";
    case 3: return "boolean";
    case 4: return "String";
    case 5: return "concept";
    case 6: return "Object";
    case 7: return "Map";
    default: return "reference";
  }
}

bool values_equal(const Value& a, const Value& b) {
  if (a.is_nullish() || b.is_nullish()) return a.is_nullish() && b.is_nullish();
  if (a.is_number() && b.is_number()) {
    if (a.is_int() && b.is_int()) return a.as_int() == b.as_int();
    return a.as_double() == b.as_double();
  }
  if (a.is_bool() && b.is_bool()) return a.as_bool() == b.as_bool();
  if (a.is_string() && b.is_string()) return a.as_string() == b.as_string();
  if (a.is_concept() && b.is_concept()) return a.as_concept() == b.as_concept();
  if (a.is_handle() && b.is_handle()) return a.as_handle() == b.as_handle();
  if (a.is_map() && b.is_map()) return a.as_map() == b.as_map();
  if (a.is_ref() && b.is_ref()) return equals(a.as_ref(), b.as_ref());
  return false;
}

std::string format_double(double d) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, res.ptr);
}

std::string format_value(const Value& v) {
  if (v.is_null()) return "null";
  if (v.is_int()) return std::to_string(v.as_int());
  if (v.is_double()) return format_double(v.as_double());
  if (v.is_bool()) return v.as_bool() ? "true" : "false";
  if (v.is_string()) return v.as_string();
  if (v.is_concept()) return v.as_concept().name;
  if (v.is_handle()) return "#" + std::to_string(v.as_handle().id);
  if (v.is_map()) return "Map(" + std::to_string(v.as_map()->entries.size()) + ")";
  return to_text(v.as_ref());
}

const Value* MapData::find(const Value& key) const {
  for (const auto& [k, v] : entries) {
    if (values_equal(k, key)) return &v;
  }
  return nullptr;
}

void MapData::put(const Value& key, Value value) {
  for (auto& [k, v] : entries) {
    if (values_equal(k, key)) {
      v = std::move(value);
      return;
    }
  }
  entries.emplace_back(key, std::move(value));
}

bool MapData::erase(const Value& key) {
  for (auto it = entries.begin(); it != entries.end(); ++it) {
    if (values_equal(it->first, key)) {
      entries.erase(it);
      return true;
    }
  }
  return false;
}

}  // namespace copl::refalg
