#include "copl/runtime/heap.hpp"

namespace copl::runtime {

Value* ObjectRecord::field(const std::string& name) {
  for (auto& [k, v] : fields) {
    if (k == name) return &v;
  }
  return nullptr;
}

NativeHandle Heap::allocate(std::string concept_name, FieldMap fields,
                            std::optional<NativeHandle> parent) {
  NativeHandle h{next_++};
  records_.emplace(h.id, ObjectRecord{std::move(concept_name), std::move(fields), parent});
  return h;
}

ObjectRecord* Heap::find(NativeHandle h) {
  auto it = records_.find(h.id);
  return it == records_.end() ? nullptr : &it->second;
}

void Heap::release(NativeHandle h) {
  records_.erase(h.id);
  for (auto it = index_.begin(); it != index_.end();) {
    if (it->second == h)
      it = index_.erase(it);
    else
      ++it;
  }
}

std::string Heap::index_key(std::optional<NativeHandle> parent, const std::string& concept_name,
                            const FieldMap& key) {
  std::string s = (parent ? std::to_string(parent->id) : "-") + "|" + concept_name;
  for (const auto& [name, v] : key) {
    // Type tags keep 1 and "1" apart.
    s += "|" + name + ":" + v.type_name() + ":" + refalg::format_value(v);
  }
  return s;
}

void Heap::register_extension(std::optional<NativeHandle> parent, const std::string& concept_name,
                              const FieldMap& key, NativeHandle h) {
  index_[index_key(parent, concept_name, key)] = h;
}

std::optional<NativeHandle> Heap::lookup_extension(std::optional<NativeHandle> parent,
                                                   const std::string& concept_name,
                                                   const FieldMap& key) const {
  auto it = index_.find(index_key(parent, concept_name, key));
  if (it == index_.end() || !alive(it->second)) return std::nullopt;
  return it->second;
}

}  // namespace copl::runtime
