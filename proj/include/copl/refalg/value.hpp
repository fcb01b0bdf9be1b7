#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace copl::refalg {

/// Opaque identifier of a heap record. Only the runtime heap mints these.
struct NativeHandle {
  std::uint64_t id = 0;
  friend bool operator==(NativeHandle, NativeHandle) = default;
};

/// The value of `instanceof(...)`, a bare concept name, and so on.
struct ConceptName {
  std::string name;
  friend bool operator==(const ConceptName&, const ConceptName&) = default;
};

struct ComplexReference;
struct MapData;
using MapRef = std::shared_ptr<MapData>;

class Value {
 public:
  using Ref = std::shared_ptr<const ComplexReference>;

  Value() = default;
  Value(std::int64_t v) : v_(v) {}
  Value(int v) : v_(static_cast<std::int64_t>(v)) {}
  Value(double v) : v_(v) {}
  Value(bool v) : v_(v) {}
  Value(std::string v) : v_(std::move(v)) {}
  Value(const char* v) : v_(std::string(v)) {}
  Value(ConceptName v) : v_(std::move(v)) {}
  Value(NativeHandle v) : v_(v) {}
  Value(MapRef v) : v_(std::move(v)) {}
  Value(ComplexReference r);

  bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_double() const { return std::holds_alternative<double>(v_); }
  bool is_number() const { return is_int() || is_double(); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_string() const { return std::holds_alternative<std::string>(v_); }
  bool is_concept() const { return std::holds_alternative<ConceptName>(v_); }
  bool is_handle() const { return std::holds_alternative<NativeHandle>(v_); }
  bool is_map() const { return std::holds_alternative<MapRef>(v_); }
  bool is_ref() const { return std::holds_alternative<Ref>(v_); }

  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  double as_double() const { return is_int() ? static_cast<double>(as_int()) : std::get<double>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }
  const std::string& as_string() const { return std::get<std::string>(v_); }
  const ConceptName& as_concept() const { return std::get<ConceptName>(v_); }
  NativeHandle as_handle() const { return std::get<NativeHandle>(v_); }
  const MapRef& as_map() const { return std::get<MapRef>(v_); }
  const ComplexReference& as_ref() const { return *std::get<Ref>(v_); }

  // Null, or a reference with no segments.
  bool is_nullish() const;

  const char* type_name() const;

 private:
  std::variant<std::monostate, std::int64_t, double, bool, std::string, ConceptName, NativeHandle,
               MapRef, Ref>
      v_;
};

/// Language-level equality: numbers compare across int/double, null equals
/// an empty reference, maps compare by identity.
bool values_equal(const Value& a, const Value& b);

/// Text used by `print` and string concatenation.
std::string format_value(const Value& v);

// Shortest round-trip form; integral doubles print without a fraction.
std::string format_double(double d);

/// Built-in insertion-ordered map. Shared by all copies of a Map value.
struct MapData {
  std::vector<std::pair<Value, Value>> entries;

  const Value* find(const Value& key) const;
  // Replaces the value of an existing key.
  void put(const Value& key, Value value);
  bool erase(const Value& key);
};

}  // namespace copl::refalg
