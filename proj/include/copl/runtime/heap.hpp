#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "copl/refalg/reference.hpp"

namespace copl::runtime {

using refalg::FieldMap;
using refalg::NativeHandle;
using refalg::Value;

struct ObjectRecord {
  // Empty until the record is first bound to a segment (`new Object()`).
  std::string concept_name;
  FieldMap fields;
  std::optional<NativeHandle> parent;

  Value* field(const std::string& name);
};

/// Object storage addressed by native handles. Handles are never reused.
class Heap {
 public:
  NativeHandle allocate(std::string concept_name, FieldMap fields, std::optional<NativeHandle> parent);
  ObjectRecord* find(NativeHandle h);
  bool alive(NativeHandle h) const { return records_.count(h.id) > 0; }
  // Removes the record and every index entry pointing at it.
  void release(NativeHandle h);
  std::size_t size() const { return records_.size(); }

  // Index from (parent, concept, reference-field values) to the record a
  // default continuation resolves to.
  void register_extension(std::optional<NativeHandle> parent, const std::string& concept_name,
                          const FieldMap& key, NativeHandle h);
  std::optional<NativeHandle> lookup_extension(std::optional<NativeHandle> parent,
                                               const std::string& concept_name,
                                               const FieldMap& key) const;
  std::size_t index_size() const { return index_.size(); }

 private:
  static std::string index_key(std::optional<NativeHandle> parent, const std::string& concept_name,
                               const FieldMap& key);

  std::map<std::uint64_t, ObjectRecord> records_;
  std::map<std::string, NativeHandle> index_;
  std::uint64_t next_ = 1;
};

}  // namespace copl::runtime
