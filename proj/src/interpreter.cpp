#include <deque>
#include <map>
#include <ostream>

#include "copl/runtime/interpreter.hpp"

namespace copl::runtime {

using namespace syntax;
using model::ConceptInfo;
using model::kRoot;
using refalg::ComplexReference;
using refalg::ConceptName;
using refalg::MapData;
using refalg::Segment;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

enum class Flow { Normal, Break, Return };

struct Slot {
  TypeRef type;
  Value value;
};

// One access chain in progress: a copy of the reference plus the handle
// each segment resolved to (the context stack).
struct Access {
  ComplexReference ref;
  std::vector<std::optional<NativeHandle>> bound;
  std::optional<NativeHandle> context_handle;  // parent of segment 0

  explicit Access(ComplexReference r) : ref(std::move(r)), bound(ref.segments.size()) {}
  size_t size() const { return ref.segments.size(); }
  const std::string& concept_at(size_t i) const { return ref.segments[i].concept_name; }
};

struct Frame;

// The target operation run at the turn point of a resolution chain.
struct Pending {
  enum class Kind { ObjCall, FieldRead, FieldWrite, Delete, RunBlock, YieldHandle };
  Kind kind = Kind::ObjCall;
  std::string owner;  // concept owning the method or field
  const MemberDecl* method = nullptr;
  std::vector<Value> args;
  std::string field;
  Value value;
  const std::vector<StmtPtr>* block = nullptr;
  Frame* home = nullptr;  // frame a context block runs in
  Flow flow = Flow::Normal;
  bool fired = false;
  SourcePos pos;
};

enum class FrameKind { TopLevel, Initializer, RefMethod, ObjMethod };
enum class Role { Plain, Continue, Create, Delete };

struct Frame {
  FrameKind kind = FrameKind::TopLevel;
  std::deque<std::map<std::string, Slot>> scopes;
  Access* acc = nullptr;
  size_t seg = 0;             // reference methods: the `this` segment
  std::string concept_name;   // concept of `this` segment, or method owner
  std::optional<NativeHandle> record;  // object methods: owning record
  int owner_index = -1;       // object methods: owner's segment in acc, if any
  const MemberDecl* method = nullptr;
  Role role = Role::Plain;
  Pending* pending = nullptr;
  bool turned = false;
  Value turn_result;
  bool descended = false;
  bool bound_here = false;
  std::vector<Access*> contexts;  // active context blocks, innermost last
  Value return_value;
};

struct Place {
  enum class Kind { Slot, RefField, Record, ObjField, Concept };
  Kind kind = Kind::Slot;
  Slot* slot = nullptr;
  Access* acc = nullptr;
  size_t seg = 0;
  std::string name;
  NativeHandle handle;
  std::string owner;
  TypeRef type;
};

bool is_reference_type(const model::ConceptTable& t, const std::string& name) {
  return name == "Object" || name == kRoot || t.contains(name);
}

const char* frame_kind_text(FrameKind k) {
  return k == FrameKind::RefMethod ? "reference method" : "object method";
}

}  // namespace

struct Interpreter::Impl {
  Impl(const SourceProgram& p, const model::ConceptTable& t, std::ostream& o, std::ostream* tr,
       RunOptions opt)
      : prog(p), table(t), out(o), trace_out(tr), options(opt) {}

  const SourceProgram& prog;
  const model::ConceptTable& table;
  std::ostream& out;
  std::ostream* trace_out;
  RunOptions options;

  Heap heap;
  std::map<std::string, Slot> statics;
  Frame* cur = nullptr;
  std::uint64_t steps = 0;
  int depth = 0;
  std::uint64_t next_unique = 123456789;

  // ---- infrastructure ------------------------------------------------------

  struct FrameGuard {
    Impl& I;
    Frame* saved;
    FrameGuard(Impl& impl, Frame* f) : I(impl), saved(impl.cur) {
      if (++I.depth > I.options.max_call_depth) {
        --I.depth;
        throw RuntimeError(RuntimeErrorKind::StepLimit,
                           "call depth limit of " + std::to_string(I.options.max_call_depth) +
                               " exceeded");
      }
      I.cur = f;
    }
    ~FrameGuard() {
      I.cur = saved;
      --I.depth;
    }
  };

  [[noreturn]] static void fail(RuntimeErrorKind kind, const std::string& msg) {
    throw RuntimeError(kind, msg);
  }

  void step() {
    if (++steps > options.max_steps)
      fail(RuntimeErrorKind::StepLimit,
           "step limit of " + std::to_string(options.max_steps) + " exceeded");
  }

  void trace(const char* kind, const std::string& concept_name, std::optional<size_t> index,
             const std::string& detail) {
    if (!trace_out) return;
    *trace_out << "EVT " << kind << " " << concept_name << " "
               << (index ? std::to_string(*index) : std::string("-")) << " "
               << (detail.empty() ? "-" : detail) << "\n";
  }

  // ---- values and types ----------------------------------------------------

  std::string ref_concept_of(const TypeRef& type) const {
    return type.name == "Object" ? std::string(kRoot) : type.name;
  }

  Value default_value(const TypeRef& type) const {
    const std::string& n = type.name;
    if (n == "int") return Value(std::int64_t{0});
    if (n == "double") return Value(0.0);
    if (n == "boolean") return Value(false);
    if (is_reference_type(table, n)) {
      ComplexReference r;
      r.declared_concept = ref_concept_of(type);
      r.declared_context = type.context.empty() ? std::string(kRoot) : type.context;
      return Value(std::move(r));
    }
    return Value{};
  }

  Value coerce(const TypeRef& type, const Value& current, const Value& v) const {
    const std::string& n = type.name;
    auto mismatch = [&]() -> Value {
      fail(RuntimeErrorKind::TypeMismatch,
           std::string("cannot store a ") + v.type_name() + " value in a " + n + " variable");
    };
    if (is_reference_type(table, n)) {
      ComplexReference cur_ref = current.is_ref() ? current.as_ref() : default_value(type).as_ref();
      if (v.is_null()) {
        cur_ref.segments.clear();
        return Value(std::move(cur_ref));
      }
      if (!v.is_ref()) return mismatch();
      return Value(refalg::assign(table, cur_ref, v.as_ref()));
    }
    if (n == "int") return v.is_int() ? v : mismatch();
    if (n == "double") return v.is_number() ? Value(v.as_double()) : mismatch();
    if (n == "boolean") return v.is_bool() ? v : mismatch();
    if (n == "String") return (v.is_string() || v.is_null()) ? v : mismatch();
    if (n == "Map") return (v.is_map() || v.is_null()) ? v : mismatch();
    return mismatch();
  }

  Value returned_value(const MemberDecl& m, const Value& v) const {
    if (m.type.is_void() || v.is_null()) return v;
    if (m.type.name == "double" && v.is_int()) return Value(v.as_double());
    return v;
  }

  bool truthy(const Value& v) const {
    if (!v.is_bool())
      fail(RuntimeErrorKind::TypeMismatch, std::string("condition is a ") + v.type_name() + ", not a boolean");
    return v.as_bool();
  }

  const ComplexReference& as_reference(const Value& v, const char* what) const {
    if (v.is_ref()) return v.as_ref();
    if (v.is_null()) fail(RuntimeErrorKind::NullReference, std::string(what) + " is null");
    fail(RuntimeErrorKind::TypeMismatch, std::string(what) + " is a " + v.type_name() + ", not a reference");
  }

  static bool is_object_ref(const ComplexReference& r) {
    return r.segments.size() == 1 && r.segments[0].concept_name == kRoot;
  }

  static ComplexReference object_ref(NativeHandle h) {
    ComplexReference r;
    Segment s;
    s.concept_name = kRoot;
    s.fields.emplace_back(model::kHandleField, Value(h));
    r.segments.push_back(std::move(s));
    return r;
  }

  std::string unique_string() { return std::to_string(next_unique++); }

  // ---- initializers and shapes --------------------------------------------

  Value eval_initializer(const Expr& e) {
    Frame f;
    f.kind = FrameKind::Initializer;
    f.scopes.emplace_back();
    FrameGuard g(*this, &f);
    return eval(e);
  }

  FieldMap init_fields(const std::vector<model::FieldInfo>& fields) {
    FieldMap out_fields;
    for (const auto& fi : fields) {
      Value v = default_value(fi.type);
      if (fi.init) v = coerce(fi.type, v, eval_initializer(*fi.init));
      out_fields.emplace_back(fi.name, std::move(v));
    }
    return out_fields;
  }

  // Fresh reference to concept `c` below context `ctx`, reference fields
  // taken from their initializers.
  ComplexReference new_shape(const std::string& c, const std::string& ctx) {
    ComplexReference r;
    auto ch = table.chain(c);
    for (size_t k = static_cast<size_t>(table.depth(ctx)) + 1; k < ch.size(); ++k) {
      Segment s;
      s.concept_name = ch[k];
      s.fields = init_fields(table.get(ch[k]).ref_fields);
      r.segments.push_back(std::move(s));
    }
    r.declared_concept = c;
    r.declared_context = ctx;
    return r;
  }

  // ---- heap helpers --------------------------------------------------------

  ObjectRecord& record(NativeHandle h) {
    ObjectRecord* r = heap.find(h);
    if (!r) fail(RuntimeErrorKind::UnresolvedReference, "object #" + std::to_string(h.id) + " no longer exists");
    return *r;
  }

  std::optional<NativeHandle> ancestor_record(NativeHandle from, const std::string& concept_name) {
    std::optional<NativeHandle> h = from;
    while (h) {
      ObjectRecord& r = record(*h);
      if (r.concept_name == concept_name) return h;
      h = r.parent;
    }
    return std::nullopt;
  }

  std::optional<NativeHandle> parent_handle(const Access& acc, size_t i) const {
    return i == 0 ? acc.context_handle : acc.bound[i - 1];
  }

  // The resolved record standing for concept `c` in this access, if any.
  std::optional<NativeHandle> handle_for(Access& acc, const std::string& c) {
    int idx = acc.ref.index_of(c);
    if (idx >= 0) return acc.bound[static_cast<size_t>(idx)];
    std::optional<NativeHandle> start = acc.size() && acc.bound[0] ? acc.bound[0] : acc.context_handle;
    if (!start) return std::nullopt;
    return ancestor_record(*start, c);
  }

  void bind(Access& acc, size_t i, NativeHandle h) {
    const std::string& c = acc.concept_at(i);
    ObjectRecord& r = record(h);
    if (r.concept_name.empty()) {
      FieldMap fields = init_fields(table.get(c).obj_fields);
      ObjectRecord& again = record(h);
      again.concept_name = c;
      again.fields = std::move(fields);
      again.parent = parent_handle(acc, i);
    } else if (r.concept_name != c) {
      fail(RuntimeErrorKind::TypeMismatch,
           "object #" + std::to_string(h.id) + " is a " + r.concept_name + ", not a " + c);
    }
    acc.bound[i] = h;
    trace("PUSH", c, i, "#" + std::to_string(h.id));
  }

  void unbind(Access& acc, size_t i) {
    if (!acc.bound[i]) return;
    trace("POP", acc.concept_at(i), i, "#" + std::to_string(acc.bound[i]->id));
    acc.bound[i].reset();
  }

  NativeHandle handle_of_object(const ComplexReference& r) {
    const Value* h = r.segments[0].field(model::kHandleField);
    if (!h || !h->is_handle()) fail(RuntimeErrorKind::NullReference, "Object reference holds no handle");
    return h->as_handle();
  }

  // ---- method activation ---------------------------------------------------

  Value run_method(Frame& f, const MemberDecl& m, const std::vector<Value>& args) {
    if (args.size() != m.params.size())
      fail(RuntimeErrorKind::TypeMismatch, f.concept_name + "." + m.name + " expects " +
                                               std::to_string(m.params.size()) + " argument(s), got " +
                                               std::to_string(args.size()));
    f.method = &m;
    f.scopes.emplace_back();
    for (size_t k = 0; k < args.size(); ++k) {
      const Param& p = m.params[k];
      Value v = coerce(p.type, default_value(p.type), args[k]);
      f.scopes.back()[p.name] = Slot{p.type, std::move(v)};
    }
    FrameGuard g(*this, &f);
    try {
      exec_stmts(m.body);
    } catch (RuntimeError& e) {
      e.trace().push_back("in " + f.concept_name + "." + m.name + " (" + frame_kind_text(f.kind) + ")");
      throw;
    }
    return returned_value(m, f.return_value);
  }

  Value call_ref_method(Access& acc, size_t i, const MemberDecl& m, const std::vector<Value>& args,
                        Role role = Role::Plain, Pending* pending = nullptr) {
    Frame f;
    f.kind = FrameKind::RefMethod;
    f.acc = &acc;
    f.seg = i;
    f.concept_name = acc.concept_at(i);
    f.role = role;
    f.pending = pending;
    if (role == Role::Plain) trace("REFCALL", f.concept_name, i, m.name);
    Value v = run_method(f, m, args);
    if (role == Role::Continue) {
      pending_turn_ = f.turned;
      return f.turn_result;
    }
    if (role == Role::Create) {
      create_bound_ = f.bound_here || acc.bound[i].has_value();
      create_descended_ = f.descended;
    }
    return v;
  }
  bool pending_turn_ = false;
  bool create_bound_ = false;
  bool create_descended_ = false;

  Value call_obj_method(NativeHandle h, const std::string& owner, const MemberDecl& m,
                        const std::vector<Value>& args, Access* acc) {
    Frame f;
    f.kind = FrameKind::ObjMethod;
    f.record = h;
    f.concept_name = owner;
    f.acc = acc;
    f.owner_index = acc ? acc->ref.index_of(owner) : -1;
    trace("OBJCALL", owner, f.owner_index >= 0 ? std::optional<size_t>(static_cast<size_t>(f.owner_index)) : std::nullopt,
          m.name);
    record(h);
    return run_method(f, m, args);
  }

  // ---- dispatch and resolution -------------------------------------------

  Value dispatch(Access& acc, size_t from, const std::string& m, const std::vector<Value>& args,
                 SourcePos pos) {
    if (acc.ref.empty()) fail(RuntimeErrorKind::NullReference, "call of " + m + "() on a null reference");
    for (size_t i = from; i < acc.size(); ++i) {
      if (const MemberDecl* d = table.get(acc.concept_at(i)).ref_method(m))
        return call_ref_method(acc, i, *d, args);
    }
    std::string start = refalg::instance_of(acc.ref);
    auto owner = table.lookup_obj_method(start, m);
    if (!owner) fail(RuntimeErrorKind::NoSuchMethod, "no method " + m + "() in " + start);
    return object_call(acc, owner->concept_name, *owner->decl, args, pos);
  }

  // Calls an object method through `acc`, resolving it unless the owning
  // record is already on the context stack.
  Value object_call(Access& acc, const std::string& owner, const MemberDecl& m,
                    const std::vector<Value>& args, SourcePos pos) {
    if (auto h = handle_for(acc, owner)) return call_obj_method(*h, owner, m, args, &acc);
    Pending p;
    p.kind = Pending::Kind::ObjCall;
    p.owner = owner;
    p.method = &m;
    p.args = args;
    p.pos = pos;
    return resolve(acc, p);
  }

  Value resolve(Access& acc, Pending& p) {
    if (acc.ref.empty()) fail(RuntimeErrorKind::NullReference, "access through a null reference");
    Value v;
    try {
      v = resolve_from(acc, 0, p);
    } catch (RuntimeError& e) {
      e.trace().push_back("while resolving " + refalg::to_text(acc.ref));
      throw;
    }
    if (!p.fired) {
      if (options.strict)
        fail(RuntimeErrorKind::UnresolvedReference,
             "resolution of " + refalg::to_text(acc.ref) + " was aborted");
      return Value{};
    }
    return v;
  }

  Value resolve_from(Access& acc, size_t i, Pending& p) {
    step();
    if (i == acc.size()) return fire(acc, p);
    if (acc.bound[i]) return resolve_from(acc, i + 1, p);
    const std::string c = acc.concept_at(i);
    const ConceptInfo& info = table.get(c);
    if (const MemberDecl* cont = info.decl ? info.ref_method("continue") : nullptr) {
      trace("CONT-ENTER", c, i, "");
      Value v = call_ref_method(acc, i, *cont, {}, Role::Continue, &p);
      bool turned = pending_turn_;
      trace("CONT-EXIT", c, i, turned ? "" : "aborted");
      return turned ? v : Value{};
    }
    trace("CONT-ENTER", c, i, "default");
    std::optional<NativeHandle> h;
    if (c == kRoot) {
      const Value* hv = acc.ref.segments[i].field(model::kHandleField);
      if (hv && hv->is_handle() && heap.alive(hv->as_handle())) h = hv->as_handle();
    } else {
      h = heap.lookup_extension(parent_handle(acc, i), c, acc.ref.segments[i].fields);
    }
    if (!h) {
      trace("CONT-EXIT", c, i, "unresolved");
      if (options.strict)
        fail(RuntimeErrorKind::UnresolvedReference, "no object for segment " + std::to_string(i) + " (" +
                                                        c + ") of " + refalg::to_text(acc.ref));
      return Value{};
    }
    bind(acc, i, *h);
    Value v = resolve_from(acc, i + 1, p);
    unbind(acc, i);
    trace("CONT-EXIT", c, i, "");
    return v;
  }

  Value fire(Access& acc, Pending& p) {
    p.fired = true;
    std::optional<size_t> last = acc.size() - 1;
    switch (p.kind) {
      case Pending::Kind::ObjCall: {
        trace("TURN", refalg::instance_of(acc.ref), last, p.method->name);
        auto h = handle_for(acc, p.owner);
        if (!h) fail(RuntimeErrorKind::MissingContext, "no " + p.owner + " object in context");
        return call_obj_method(*h, p.owner, *p.method, p.args, &acc);
      }
      case Pending::Kind::FieldRead:
      case Pending::Kind::FieldWrite: {
        trace("TURN", refalg::instance_of(acc.ref), last, p.field);
        auto h = handle_for(acc, p.owner);
        if (!h) fail(RuntimeErrorKind::MissingContext, "no " + p.owner + " object in context");
        return record_field_access(*h, p.owner, p.field, p.kind == Pending::Kind::FieldWrite ? &p.value : nullptr);
      }
      case Pending::Kind::Delete:
        trace("TURN", refalg::instance_of(acc.ref), last, "delete");
        delete_from(acc, 0);
        return Value{};
      case Pending::Kind::RunBlock: {
        trace("TURN", refalg::instance_of(acc.ref), last, "block");
        Frame* saved = cur;
        cur = p.home;
        cur->contexts.push_back(&acc);
        try {
          p.flow = exec_block(*p.block);
        } catch (...) {
          cur->contexts.pop_back();
          cur = saved;
          throw;
        }
        cur->contexts.pop_back();
        cur = saved;
        return Value{};
      }
      case Pending::Kind::YieldHandle:
        trace("TURN", refalg::instance_of(acc.ref), last, "handle");
        return Value(*acc.bound.back());
    }
    return Value{};
  }

  Value record_field_access(NativeHandle h, const std::string& owner, const std::string& name,
                            const Value* write) {
    ObjectRecord& r = record(h);
    Value* slot = r.field(name);
    if (!slot) fail(RuntimeErrorKind::NoSuchField, "object " + owner + " has no field " + name);
    if (write) {
      const model::FieldInfo* fi = table.get(r.concept_name).obj_field(name);
      *slot = coerce(fi->type, *slot, *write);
    }
    return *slot;
  }

  std::optional<std::string> obj_field_owner(const std::string& start, const std::string& name) const {
    auto ch = table.chain(start);
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) {
      if (table.get(*it).obj_field(name)) return *it;
    }
    return std::nullopt;
  }

  // Object field of the access's object chain, resolving when needed.
  Value object_field(Access& acc, const std::string& owner, const std::string& name, const Value* write,
                     SourcePos pos) {
    if (auto h = handle_for(acc, owner)) return record_field_access(*h, owner, name, write);
    Pending p;
    p.kind = write ? Pending::Kind::FieldWrite : Pending::Kind::FieldRead;
    p.owner = owner;
    p.field = name;
    if (write) p.value = *write;
    p.pos = pos;
    return resolve(acc, p);
  }

  // Field `name` seen from segment `from` on: reference fields first
  // (highest segment wins), then the lowest object field declarer.
  Value member_access(Access& acc, size_t from, const std::string& name, const Value* write, SourcePos pos) {
    if (acc.ref.empty()) fail(RuntimeErrorKind::NullReference, "field " + name + " of a null reference");
    for (size_t i = from; i < acc.size(); ++i) {
      Segment& s = acc.ref.segments[i];
      if (Value* v = s.field(name)) {
        if (write) {
          const model::FieldInfo* fi = table.get(s.concept_name).ref_field(name);
          *v = coerce(fi->type, *v, *write);
        }
        return *v;
      }
    }
    std::string inst = refalg::instance_of(acc.ref);
    auto owner = obj_field_owner(inst, name);
    if (!owner) fail(RuntimeErrorKind::NoSuchField, "no field " + name + " in " + inst);
    return object_field(acc, *owner, name, write, pos);
  }

  // ---- lifecycle -------------------------------------------------------------

  void run_constructor(Access& acc, size_t i, const std::vector<Value>& args) {
    const std::string& c = acc.concept_at(i);
    const MemberDecl* ctor = table.get(c).obj_method("create");
    if (!ctor) return;
    std::vector<Value> a = ctor->params.size() == args.size() ? args : std::vector<Value>{};
    call_obj_method(*acc.bound[i], c, *ctor, a, &acc);
  }

  void create_from(Access& acc, size_t i, const std::vector<Value>& args) {
    step();
    if (i >= acc.size()) return;
    const std::string c = acc.concept_at(i);
    const ConceptInfo& info = table.get(c);
    if (const MemberDecl* user = info.decl ? info.ref_method("create") : nullptr) {
      trace("CREATE", c, i, "reference");
      std::vector<Value> a = user->params.size() == args.size() ? args : std::vector<Value>{};
      call_ref_method(acc, i, *user, a, Role::Create);
      bool descended = create_descended_;
      if (!acc.bound[i])
        fail(RuntimeErrorKind::CreateFailed,
             c + ".create() finished without allocating a base reference for its segment");
      if (!descended) create_from(acc, i + 1, args);
      unbind(acc, i);
      return;
    }
    auto parent = parent_handle(acc, i);
    if (i > 0 && !parent) fail(RuntimeErrorKind::CreateFailed, "parent of " + c + " was not created");
    const FieldMap& key = acc.ref.segments[i].fields;
    if (auto existing = heap.lookup_extension(parent, c, key)) {
      bind(acc, i, *existing);
    } else {
      NativeHandle h = heap.allocate(c, init_fields(info.obj_fields), parent);
      heap.register_extension(parent, c, key, h);
      trace("CREATE", c, i, "#" + std::to_string(h.id));
      bind(acc, i, h);
      run_constructor(acc, i, i + 1 == acc.size() ? args : std::vector<Value>{});
    }
    create_from(acc, i + 1, args);
    unbind(acc, i);
  }

  // `o.create()` inside a reference create method: allocate (if needed)
  // and bind this segment, then create the segments below it.
  Value create_turn(Frame& f, const Expr& receiver, const Value& ov) {
    Access& acc = *f.acc;
    size_t i = f.seg;
    NativeHandle h;
    if (ov.is_nullish()) {
      h = heap.allocate("", {}, std::nullopt);
      store_to(receiver, Value(object_ref(h)));
    } else {
      const ComplexReference& r = as_reference(ov, "create receiver");
      if (!is_object_ref(r)) fail(RuntimeErrorKind::TypeMismatch, "create() base must be an Object");
      h = handle_of_object(r);
    }
    bind(acc, i, h);
    heap.register_extension(parent_handle(acc, i), acc.concept_at(i), acc.ref.segments[i].fields, h);
    f.bound_here = true;
    f.descended = true;
    create_from(acc, i + 1, {});
    return Value{};
  }

  void destroy(Access& acc, size_t i) {
    auto h = acc.bound[i];
    if (!h || !heap.alive(*h)) return;
    const std::string c = acc.concept_at(i);
    trace("DELETE", c, i, "#" + std::to_string(h->id));
    if (const MemberDecl* dtor = table.get(c).obj_method("delete")) call_obj_method(*h, c, *dtor, {}, &acc);
    heap.release(*h);
  }

  void delete_from(Access& acc, size_t i) {
    step();
    if (i >= acc.size()) return;
    const ConceptInfo& info = table.get(acc.concept_at(i));
    if (const MemberDecl* user = info.decl ? info.ref_method("delete") : nullptr) {
      trace("DELETE", info.name, i, "reference");
      call_ref_method(acc, i, *user, {}, Role::Delete);
      return;
    }
    delete_from(acc, i + 1);
    destroy(acc, i);
  }

  // ---- statements ------------------------------------------------------------

  void run() {
    Frame top;
    top.kind = FrameKind::TopLevel;
    top.scopes.emplace_back();
    cur = &top;
    for (const auto& s : prog.static_decls) {
      const auto& d = std::get<VarDeclStmt>(s->node);
      try {
        Value v = default_value(d.type);
        if (d.init) v = coerce(d.type, v, eval(*d.init));
        statics[d.name] = Slot{d.type, std::move(v)};
      } catch (RuntimeError& e) {
        e.set_position(s->pos);
        throw;
      }
    }
    exec_stmts(prog.statements);
    cur = nullptr;
  }

  Flow exec_stmts(const std::vector<StmtPtr>& stmts) {
    for (const auto& s : stmts) {
      Flow fl = exec(*s);
      if (fl != Flow::Normal) return fl;
    }
    return Flow::Normal;
  }

  Flow exec_block(const std::vector<StmtPtr>& stmts) {
    cur->scopes.emplace_back();
    Flow fl;
    try {
      fl = exec_stmts(stmts);
    } catch (...) {
      cur->scopes.pop_back();
      throw;
    }
    cur->scopes.pop_back();
    return fl;
  }

  Flow exec_nested(const Stmt& s) {
    cur->scopes.emplace_back();
    Flow fl;
    try {
      fl = exec(s);
    } catch (...) {
      cur->scopes.pop_back();
      throw;
    }
    cur->scopes.pop_back();
    return fl;
  }

  Flow exec(const Stmt& s) {
    step();
    try {
      return exec_inner(s);
    } catch (RuntimeError& e) {
      e.set_position(s.pos);
      throw;
    }
  }

  Flow exec_inner(const Stmt& s) {
    return std::visit(
        overloaded{
            [&](const VarDeclStmt& d) {
              Value v = default_value(d.type);
              if (d.init) v = coerce(d.type, v, eval(*d.init));
              cur->scopes.back()[d.name] = Slot{d.type, std::move(v)};
              return Flow::Normal;
            },
            [&](const ExprStmt& e) {
              eval(*e.expr);
              return Flow::Normal;
            },
            [&](const PrintStmt& p) {
              out << refalg::format_value(eval(*p.value)) << "\n";
              return Flow::Normal;
            },
            [&](const ReturnStmt& r) {
              cur->return_value = r.value ? eval(*r.value) : Value{};
              return Flow::Return;
            },
            [&](const IfStmt& i) {
              if (truthy(eval(*i.cond))) return exec_nested(*i.then_branch);
              if (i.else_branch) return exec_nested(*i.else_branch);
              return Flow::Normal;
            },
            [&](const ForallStmt& fl) {
              Value src = eval(*fl.source);
              if (src.is_null()) fail(RuntimeErrorKind::NullReference, "forall over a null map");
              if (!src.is_map()) fail(RuntimeErrorKind::TypeMismatch, "forall needs a Map");
              std::vector<Value> items;
              for (const auto& [k, v] : src.as_map()->entries) items.push_back(v);
              for (const auto& item : items) {
                cur->scopes.emplace_back();
                Flow r;
                try {
                  Value v = coerce(fl.type, default_value(fl.type), item);
                  cur->scopes.back()[fl.var] = Slot{fl.type, std::move(v)};
                  r = exec_nested(*fl.body);
                } catch (...) {
                  cur->scopes.pop_back();
                  throw;
                }
                cur->scopes.pop_back();
                if (r == Flow::Break) break;
                if (r == Flow::Return) return r;
              }
              return Flow::Normal;
            },
            [&](const BreakStmt&) { return Flow::Break; },
            [&](const BlockStmt& b) { return exec_block(b.stmts); },
            [&](const ContextBlockStmt& c) {
              Value ctx = eval(*c.context);
              const ComplexReference& r = as_reference(ctx, "context");
              if (r.empty()) fail(RuntimeErrorKind::NullReference, "context block on a null reference");
              Access acc(r);
              Pending p;
              p.kind = Pending::Kind::RunBlock;
              p.block = &c.body;
              p.home = cur;
              p.pos = s.pos;
              resolve(acc, p);
              return p.flow;
            },
        },
        s.node);
  }

  // ---- names -------------------------------------------------------------------

  Slot* find_local(const std::string& name) {
    for (auto it = cur->scopes.rbegin(); it != cur->scopes.rend(); ++it) {
      auto f = it->find(name);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }

  std::optional<Place> context_member(const std::string& name) {
    for (auto it = cur->contexts.rbegin(); it != cur->contexts.rend(); ++it) {
      Access& acc = **it;
      auto owner = obj_field_owner(refalg::instance_of(acc.ref), name);
      if (!owner) continue;
      auto h = handle_for(acc, *owner);
      if (!h) continue;
      Place p;
      p.kind = Place::Kind::Record;
      p.handle = *h;
      p.owner = *owner;
      p.name = name;
      return p;
    }
    return std::nullopt;
  }

  Place lookup(const std::string& name) {
    Place p;
    p.name = name;
    if (Slot* s = find_local(name)) {
      p.slot = s;
      return p;
    }
    if (auto cm = context_member(name)) return *cm;
    Frame& f = *cur;
    if (f.kind == FrameKind::RefMethod) {
      if (f.acc->ref.segments[f.seg].field(name)) {
        p.kind = Place::Kind::RefField;
        p.acc = f.acc;
        p.seg = f.seg;
        return p;
      }
      if (auto owner = obj_field_owner(f.concept_name, name)) {
        p.kind = Place::Kind::ObjField;
        p.acc = f.acc;
        p.owner = *owner;
        return p;
      }
    } else if (f.kind == FrameKind::ObjMethod) {
      std::optional<NativeHandle> h = f.record;
      while (h) {
        ObjectRecord& r = record(*h);
        if (r.field(name)) {
          p.kind = Place::Kind::Record;
          p.handle = *h;
          p.owner = r.concept_name;
          return p;
        }
        h = r.parent;
      }
    }
    auto st = statics.find(name);
    if (st != statics.end()) {
      p.slot = &st->second;
      return p;
    }
    if (table.contains(name)) {
      p.kind = Place::Kind::Concept;
      return p;
    }
    fail(RuntimeErrorKind::NoSuchField, "unknown name '" + name + "'");
  }

  Value read(const Place& p, SourcePos pos) {
    switch (p.kind) {
      case Place::Kind::Slot: return p.slot->value;
      case Place::Kind::RefField: return *p.acc->ref.segments[p.seg].field(p.name);
      case Place::Kind::Record: return record_field_access(p.handle, p.owner, p.name, nullptr);
      case Place::Kind::ObjField: return object_field(*p.acc, p.owner, p.name, nullptr, pos);
      case Place::Kind::Concept: return Value(ConceptName{p.name});
    }
    return Value{};
  }

  Value write(const Place& p, const Value& v, SourcePos pos) {
    switch (p.kind) {
      case Place::Kind::Slot:
        p.slot->value = coerce(p.slot->type, p.slot->value, v);
        return p.slot->value;
      case Place::Kind::RefField: {
        Segment& s = p.acc->ref.segments[p.seg];
        Value* slot = s.field(p.name);
        *slot = coerce(table.get(s.concept_name).ref_field(p.name)->type, *slot, v);
        return *slot;
      }
      case Place::Kind::Record: return record_field_access(p.handle, p.owner, p.name, &v);
      case Place::Kind::ObjField: return object_field(*p.acc, p.owner, p.name, &v, pos);
      case Place::Kind::Concept:
        fail(RuntimeErrorKind::TypeMismatch, "cannot assign to concept " + p.name);
    }
    return v;
  }

  // Writes a whole value back into an assignable expression, bypassing
  // assignment-by-intersection (used for receivers updated by a call).
  void store_raw(const Expr& target, const Value& v) {
    if (auto* n = std::get_if<NameExpr>(&target.node)) {
      Place p = lookup(n->name);
      if (p.kind == Place::Kind::Slot) {
        p.slot->value = v;
        return;
      }
      if (p.kind == Place::Kind::RefField) {
        *p.acc->ref.segments[p.seg].field(p.name) = v;
        return;
      }
      if (p.kind == Place::Kind::Record) {
        *record(p.handle).field(p.name) = v;
        return;
      }
    }
  }

  void store_to(const Expr& target, const Value& v) {
    if (auto* n = std::get_if<NameExpr>(&target.node)) write(lookup(n->name), v, target.pos);
  }

  // ---- expressions --------------------------------------------------------------

  Value eval(const Expr& e) {
    step();
    try {
      return eval_inner(e);
    } catch (RuntimeError& err) {
      err.set_position(e.pos);
      throw;
    }
  }

  const ComplexReference* current_context_ref() const {
    if (!cur) return nullptr;
    if (!cur->contexts.empty()) return &cur->contexts.back()->ref;
    if (cur->acc) return &cur->acc->ref;
    return nullptr;
  }

  ComplexReference this_ref() const {
    const Frame& f = *cur;
    ComplexReference r;
    if (f.kind == FrameKind::RefMethod) {
      r.segments.push_back(f.acc->ref.segments[f.seg]);
    } else if (f.kind == FrameKind::ObjMethod && f.owner_index >= 0) {
      const auto& segs = f.acc->ref.segments;
      r.segments.assign(segs.begin(), segs.begin() + f.owner_index + 1);
    }
    if (!r.empty()) refalg::normalize_declared(table, r, r.segments.back().concept_name);
    return r;
  }

  Value sub_value() const {
    const Frame& f = *cur;
    if (f.seg + 1 >= f.acc->size()) return Value{};
    ComplexReference r;
    const auto& segs = f.acc->ref.segments;
    r.segments.assign(segs.begin() + static_cast<long>(f.seg) + 1, segs.end());
    refalg::normalize_declared(table, r, f.acc->ref.declared_concept);
    return Value(std::move(r));
  }

  std::string concept_value(const Value& v, const char* what) const {
    if (v.is_concept()) return v.as_concept().name;
    fail(RuntimeErrorKind::TypeMismatch, std::string(what) + " of a cast must name a concept");
  }

  ComplexReference ref_operand(const Value& v) const {
    if (v.is_null()) return ComplexReference{};
    return as_reference(v, "operand");
  }

  Value eval_inner(const Expr& e) {
    return std::visit(
        overloaded{
            [&](const LiteralExpr& l) -> Value {
              switch (l.kind) {
                case LiteralKind::Int: return Value(static_cast<std::int64_t>(std::stoll(l.text)));
                case LiteralKind::Double: return Value(std::stod(l.text));
                case LiteralKind::Bool: return Value(l.text == "true");
                case LiteralKind::String: return Value(l.text);
                case LiteralKind::Null: return Value{};
              }
              return Value{};
            },
            [&](const NameExpr& n) -> Value { return read(lookup(n.name), e.pos); },
            [&](const RootExpr&) -> Value { return Value(ConceptName{kRoot}); },
            [&](const ThisExpr&) -> Value {
              ComplexReference r = this_ref();
              if (r.empty()) return Value{};
              return Value(std::move(r));
            },
            [&](const SubExpr&) -> Value { return sub_value(); },
            [&](const SuperExpr&) -> Value {
              fail(RuntimeErrorKind::TypeMismatch, "'super' can only be used to access members");
            },
            [&](const MemberExpr& m) -> Value { return member(m, nullptr, e.pos); },
            [&](const CallExpr& c) -> Value { return call(c, e.pos); },
            [&](const NewExpr& n) -> Value { return make_new(n.concept_name); },
            [&](const ColonExpr& c) -> Value {
              Value l = eval(*c.left);
              Value r = eval(*c.right);
              switch (c.kind) {
                case ColonKind::LeftCast:
                  return Value(refalg::left_cast(table, concept_value(l, "left side"), ref_operand(r),
                                                 current_context_ref()));
                case ColonKind::RightCast:
                  return Value(refalg::right_cast(table, as_reference(l, "cast operand"),
                                                  concept_value(r, "right side")));
                case ColonKind::Concat:
                  return Value(refalg::concatenate(table, ref_operand(l), ref_operand(r)));
              }
              return Value{};
            },
            [&](const ColonPrefixExpr& c) -> Value {
              Access a = prefixed_access(*c.local);
              return Value(a.ref);
            },
            [&](const IntrospectExpr& i) -> Value { return introspect(i); },
            [&](const UnaryExpr& u) -> Value {
              Value v = eval(*u.operand);
              if (u.op == UnaryOp::Not) return Value(!truthy(v));
              if (v.is_int()) return Value(-v.as_int());
              if (v.is_double()) return Value(-v.as_double());
              fail(RuntimeErrorKind::TypeMismatch, std::string("cannot negate a ") + v.type_name());
            },
            [&](const BinaryExpr& b) -> Value { return binary(b); },
            [&](const AssignExpr& a) -> Value { return assign_expr(a); },
        },
        e.node);
  }

  Value binary(const BinaryExpr& b) {
    if (b.op == BinaryOp::And) {
      if (!truthy(eval(*b.lhs))) return Value(false);
      return Value(truthy(eval(*b.rhs)));
    }
    if (b.op == BinaryOp::Or) {
      if (truthy(eval(*b.lhs))) return Value(true);
      return Value(truthy(eval(*b.rhs)));
    }
    Value l = eval(*b.lhs);
    Value r = eval(*b.rhs);
    switch (b.op) {
      case BinaryOp::Eq: return Value(refalg::values_equal(l, r));
      case BinaryOp::Ne: return Value(!refalg::values_equal(l, r));
      case BinaryOp::Add:
        if (l.is_string() || r.is_string()) return Value(refalg::format_value(l) + refalg::format_value(r));
        break;
      default: break;
    }
    if (l.is_string() && r.is_string()) {
      int c = l.as_string().compare(r.as_string());
      switch (b.op) {
        case BinaryOp::Lt: return Value(c < 0);
        case BinaryOp::Le: return Value(c <= 0);
        case BinaryOp::Gt: return Value(c > 0);
        case BinaryOp::Ge: return Value(c >= 0);
        default: break;
      }
    }
    if (!l.is_number() || !r.is_number())
      fail(RuntimeErrorKind::TypeMismatch,
           std::string("operands ") + l.type_name() + " and " + r.type_name() + " do not support this operator");
    if (l.is_int() && r.is_int()) {
      std::int64_t x = l.as_int(), y = r.as_int();
      switch (b.op) {
        case BinaryOp::Add: return Value(x + y);
        case BinaryOp::Sub: return Value(x - y);
        case BinaryOp::Mul: return Value(x * y);
        case BinaryOp::Div:
        case BinaryOp::Mod:
          if (y == 0) fail(RuntimeErrorKind::DivisionByZero, "division by zero");
          return Value(b.op == BinaryOp::Div ? x / y : x % y);
        case BinaryOp::Lt: return Value(x < y);
        case BinaryOp::Le: return Value(x <= y);
        case BinaryOp::Gt: return Value(x > y);
        case BinaryOp::Ge: return Value(x >= y);
        default: break;
      }
    }
    double x = l.as_double(), y = r.as_double();
    switch (b.op) {
      case BinaryOp::Add: return Value(x + y);
      case BinaryOp::Sub: return Value(x - y);
      case BinaryOp::Mul: return Value(x * y);
      case BinaryOp::Div:
        if (y == 0) fail(RuntimeErrorKind::DivisionByZero, "division by zero");
        return Value(x / y);
      case BinaryOp::Mod: fail(RuntimeErrorKind::TypeMismatch, "'%' needs int operands");
      case BinaryOp::Lt: return Value(x < y);
      case BinaryOp::Le: return Value(x <= y);
      case BinaryOp::Gt: return Value(x > y);
      case BinaryOp::Ge: return Value(x >= y);
      default: break;
    }
    fail(RuntimeErrorKind::Internal, "unhandled operator");
  }

  Value introspect(const IntrospectExpr& i) {
    const Expr& operand = *i.operand;
    if (std::holds_alternative<SuperExpr>(operand.node)) {
      if (i.op != IntrospectOp::InstanceOf)
        fail(RuntimeErrorKind::TypeMismatch, "only instanceof applies to 'super'");
      const auto& parent = table.parent(cur->concept_name);
      if (!parent) fail(RuntimeErrorKind::MissingSuper, cur->concept_name + " has no parent");
      return Value(ConceptName{*parent});
    }
    Value v = eval(operand);
    const ComplexReference& r = as_reference(v, "introspection operand");
    switch (i.op) {
      case IntrospectOp::InstanceOf: return Value(ConceptName{refalg::instance_of(r)});
      case IntrospectOp::ContextOf: return Value(ConceptName{refalg::context_of(table, r)});
      case IntrospectOp::ConceptOf: return Value(ConceptName{refalg::concept_of(r)});
    }
    return Value{};
  }

  Value make_new(const std::string& c) {
    if (c == "Map") return Value(std::make_shared<MapData>());
    if (c == "Object") {
      ComplexReference r = object_ref(heap.allocate("", {}, std::nullopt));
      return Value(std::move(r));
    }
    Access acc(new_shape(c, kRoot));
    create_from(acc, 0, {});
    return Value(std::move(acc.ref));
  }

  Value assign_expr(const AssignExpr& a) {
    Value v = eval(*a.value);
    const Expr& target = *a.target;
    if (auto* n = std::get_if<NameExpr>(&target.node)) return write(lookup(n->name), v, target.pos);
    const auto& m = std::get<MemberExpr>(target.node);
    return member(m, &v, target.pos);
  }

  // Read (write == nullptr) or write of `m.object.m.member`.
  Value member(const MemberExpr& m, const Value* write_value, SourcePos pos) {
    const Expr& obj = *m.object;
    Frame& f = *cur;
    if (std::holds_alternative<ThisExpr>(obj.node)) {
      if (f.kind == FrameKind::RefMethod) {
        Place p;
        p.kind = Place::Kind::RefField;
        p.acc = f.acc;
        p.seg = f.seg;
        p.name = m.member;
        if (!f.acc->ref.segments[f.seg].field(m.member))
          fail(RuntimeErrorKind::NoSuchField, f.concept_name + " has no reference field " + m.member);
        return write_value ? write(p, *write_value, pos) : read(p, pos);
      }
      if (f.kind == FrameKind::ObjMethod && f.owner_index >= 0) {
        Place p;
        p.kind = Place::Kind::RefField;
        p.acc = f.acc;
        p.seg = static_cast<size_t>(f.owner_index);
        p.name = m.member;
        if (!f.acc->ref.segments[p.seg].field(m.member))
          fail(RuntimeErrorKind::NoSuchField, f.concept_name + " has no reference field " + m.member);
        return write_value ? write(p, *write_value, pos) : read(p, pos);
      }
      fail(RuntimeErrorKind::NullReference, "'this' has no reference here");
    }
    if (std::holds_alternative<SubExpr>(obj.node) && f.kind == FrameKind::RefMethod) {
      if (f.seg + 1 >= f.acc->size()) fail(RuntimeErrorKind::NullReference, "'sub' is null");
      return member_access(*f.acc, f.seg + 1, m.member, write_value, pos);
    }
    if (std::holds_alternative<SuperExpr>(obj.node)) return super_member(m.member, write_value, pos);

    Value base = eval(obj);
    const ComplexReference& r = as_reference(base, "field access receiver");
    Access acc(r);
    Value result = member_access(acc, 0, m.member, write_value, pos);
    if (write_value && !refalg::equals(acc.ref, r)) store_raw(obj, Value(acc.ref));
    return result;
  }

  Value super_member(const std::string& name, const Value* write_value, SourcePos pos) {
    Frame& f = *cur;
    const auto& parent = table.parent(f.concept_name);
    if (!parent || *parent == kRoot) fail(RuntimeErrorKind::MissingSuper, f.concept_name + " has no parent");
    if (f.kind == FrameKind::RefMethod) {
      if (f.seg > 0 && f.acc->ref.segments[f.seg - 1].field(name)) {
        Place p;
        p.kind = Place::Kind::RefField;
        p.acc = f.acc;
        p.seg = f.seg - 1;
        p.name = name;
        return write_value ? write(p, *write_value, pos) : read(p, pos);
      }
      auto owner = obj_field_owner(*parent, name);
      if (!owner) fail(RuntimeErrorKind::NoSuchField, "no field " + name + " above " + f.concept_name);
      return object_field(*f.acc, *owner, name, write_value, pos);
    }
    auto owner = obj_field_owner(*parent, name);
    if (!owner) fail(RuntimeErrorKind::NoSuchField, "no field " + name + " above " + f.concept_name);
    auto h = super_record(*owner);
    return record_field_access(*h, *owner, name, write_value);
  }

  // Ancestor record of the current object method's owner.
  std::optional<NativeHandle> super_record(const std::string& c) {
    Frame& f = *cur;
    ObjectRecord& own = record(*f.record);
    std::optional<NativeHandle> h = own.parent ? ancestor_record(*own.parent, c) : std::nullopt;
    if (!h) fail(RuntimeErrorKind::MissingSuper, "no " + c + " object above " + f.concept_name);
    return h;
  }

  std::vector<Value> eval_args(const std::vector<ExprPtr>& args) {
    std::vector<Value> out_args;
    out_args.reserve(args.size());
    for (const auto& a : args) out_args.push_back(eval(*a));
    return out_args;
  }

  Access prefixed_access(const Expr& local) {
    if (cur->contexts.empty()) fail(RuntimeErrorKind::MissingContext, "':' prefix outside a context block");
    Access& ctx = *cur->contexts.back();
    Value lv = eval(local);
    Access a(refalg::concatenate(table, ctx.ref, ref_operand(lv)));
    a.context_handle = ctx.context_handle;
    for (size_t k = 0; k < a.size() && k < ctx.size(); ++k) {
      if (!refalg::segments_equal(a.ref.segments[k], ctx.ref.segments[k])) break;
      a.bound[k] = ctx.bound[k];
    }
    return a;
  }

  Value call(const CallExpr& c, SourcePos pos) {
    if (!c.receiver) return bare_call(c, pos);
    const Expr& recv = *c.receiver;
    Frame& f = *cur;
    const std::string& m = c.method;

    if (std::holds_alternative<SubExpr>(recv.node) && f.kind == FrameKind::RefMethod) {
      std::vector<Value> args = eval_args(c.args);
      if (f.role == Role::Create && m == "create") {
        if (!f.acc->bound[f.seg])
          fail(RuntimeErrorKind::CreateFailed, "sub.create() before " + f.concept_name + " was created");
        f.descended = true;
        create_from(*f.acc, f.seg + 1, args);
        return Value{};
      }
      if (f.role == Role::Delete && m == "delete") {
        delete_from(*f.acc, f.seg + 1);
        return Value{};
      }
      if (f.seg + 1 >= f.acc->size()) {
        if (options.strict) fail(RuntimeErrorKind::NullReference, "call of " + m + "() on a null 'sub'");
        return Value{};
      }
      return dispatch(*f.acc, f.seg + 1, m, args, pos);
    }
    if (std::holds_alternative<ThisExpr>(recv.node) && f.acc &&
        (f.kind == FrameKind::RefMethod || f.owner_index >= 0)) {
      std::vector<Value> args = eval_args(c.args);
      size_t from = f.kind == FrameKind::RefMethod ? f.seg : static_cast<size_t>(f.owner_index);
      return dispatch(*f.acc, from, m, args, pos);
    }
    if (std::holds_alternative<SuperExpr>(recv.node)) return super_call(m, eval_args(c.args), pos);
    if (std::holds_alternative<ColonPrefixExpr>(recv.node)) {
      Access a = prefixed_access(*std::get<ColonPrefixExpr>(recv.node).local);
      return dispatch(a, 0, m, eval_args(c.args), pos);
    }

    if (m == "continue") return continue_turn(recv, c.args.size());
    Value base = eval(recv);
    if (m == "create" && f.role == Role::Create && f.kind == FrameKind::RefMethod && !f.acc->bound[f.seg] &&
        c.args.empty() && (base.is_nullish() || (base.is_ref() && is_object_ref(base.as_ref()))))
      return create_turn(f, recv, base);
    std::vector<Value> args = eval_args(c.args);
    if (base.is_map()) return map_call(base.as_map(), m, args);
    if (base.is_null()) fail(RuntimeErrorKind::NullReference, "call of " + m + "() on null");
    if (!base.is_ref())
      fail(RuntimeErrorKind::NoSuchMethod, std::string("a ") + base.type_name() + " value has no method " + m + "()");
    const ComplexReference& r = base.as_ref();
    if (is_object_ref(r) || (r.empty() && r.declared_concept == kRoot)) return object_builtin(recv, r, m);

    if (m == "create") {
      Access acc(r.empty() ? new_shape(r.declared_concept, r.declared_context) : r);
      acc.ref.declared_concept = r.declared_concept;
      acc.ref.declared_context = r.declared_context;
      create_from(acc, 0, args);
      store_raw(recv, Value(acc.ref));
      return Value{};
    }
    if (m == "delete") {
      if (r.empty()) fail(RuntimeErrorKind::NullReference, "delete of a null reference");
      Access acc(r);
      Pending p;
      p.kind = Pending::Kind::Delete;
      p.pos = pos;
      resolve(acc, p);
      return Value{};
    }
    Access acc(r);
    Value result = dispatch(acc, 0, m, args, pos);
    if (!refalg::equals(acc.ref, r)) store_raw(recv, Value(acc.ref));
    return result;
  }

  Value object_builtin(const Expr& recv, const ComplexReference& r, const std::string& m) {
    if (m == "create") {
      if (r.empty()) store_raw(recv, Value(object_ref(heap.allocate("", {}, std::nullopt))));
      return Value{};
    }
    if (m == "delete") {
      if (!r.empty()) heap.release(handle_of_object(r));
      return Value{};
    }
    if (r.empty()) fail(RuntimeErrorKind::NullReference, "call of " + m + "() on a null Object");
    fail(RuntimeErrorKind::NoSuchMethod, "an Object has no method " + m + "()");
  }

  // `o.continue()`: the turn point of the current continuation method.
  Value continue_turn(const Expr& recv, size_t nargs) {
    Frame& f = *cur;
    if (nargs != 0) fail(RuntimeErrorKind::TypeMismatch, "continue() takes no arguments");
    if (f.role != Role::Continue || f.kind != FrameKind::RefMethod)
      fail(RuntimeErrorKind::NoSuchMethod, "continue() is only valid inside a continuation method");
    if (f.turned) fail(RuntimeErrorKind::UnresolvedReference, "continue() reached twice in one resolution");
    Value ov = eval(recv);
    const ComplexReference& r = as_reference(ov, "continuation base");
    if (r.empty()) fail(RuntimeErrorKind::NullReference, "continuation base is null");
    NativeHandle h;
    if (is_object_ref(r)) {
      h = handle_of_object(r);
    } else {
      Access inner(r);
      Pending p;
      p.kind = Pending::Kind::YieldHandle;
      Value hv = resolve(inner, p);
      if (!hv.is_handle()) fail(RuntimeErrorKind::UnresolvedReference, "continuation base did not resolve");
      h = hv.as_handle();
    }
    if (!heap.alive(h))
      fail(RuntimeErrorKind::UnresolvedReference, "object #" + std::to_string(h.id) + " no longer exists");
    f.turned = true;
    Access& acc = *f.acc;
    bind(acc, f.seg, h);
    Value v = resolve_from(acc, f.seg + 1, *f.pending);
    unbind(acc, f.seg);
    f.turn_result = v;
    return v;
  }

  Value super_call(const std::string& m, const std::vector<Value>& args, SourcePos pos) {
    Frame& f = *cur;
    const auto& parent = table.parent(f.concept_name);
    if (!parent || *parent == kRoot)
      fail(RuntimeErrorKind::MissingSuper, f.concept_name + " has no parent object for super." + m + "()");
    auto owner = table.lookup_obj_method(*parent, m);
    if (!owner) fail(RuntimeErrorKind::NoSuchMethod, "no object method " + m + "() above " + f.concept_name);
    if (f.kind == FrameKind::RefMethod) return object_call(*f.acc, owner->concept_name, *owner->decl, args, pos);
    auto h = super_record(owner->concept_name);
    return call_obj_method(*h, owner->concept_name, *owner->decl, args, f.acc);
  }

  Value bare_call(const CallExpr& c, SourcePos pos) {
    Frame& f = *cur;
    const std::string& m = c.method;
    std::vector<Value> args = eval_args(c.args);
    for (auto it = f.contexts.rbegin(); it != f.contexts.rend(); ++it) {
      Access& acc = **it;
      auto owner = table.lookup_obj_method(refalg::instance_of(acc.ref), m);
      if (!owner) continue;
      if (auto h = handle_for(acc, owner->concept_name))
        return call_obj_method(*h, owner->concept_name, *owner->decl, args, &acc);
    }
    if (f.kind == FrameKind::RefMethod) {
      Access& acc = *f.acc;
      if (m == "create" && f.role == Role::Create) {
        if (!acc.bound[f.seg])
          fail(RuntimeErrorKind::CreateFailed,
               "object constructor of " + f.concept_name + " called before a base reference exists");
        run_constructor(acc, f.seg, args);
        return Value{};
      }
      if (m == "delete" && f.role == Role::Delete) {
        destroy(acc, f.seg);
        return Value{};
      }
      if (auto owner = table.lookup_obj_method(f.concept_name, m))
        return object_call(acc, owner->concept_name, *owner->decl, args, pos);
    } else if (f.kind == FrameKind::ObjMethod) {
      if (auto owner = table.lookup_obj_method(f.concept_name, m)) {
        auto h = owner->concept_name == f.concept_name ? f.record : ancestor_record(*f.record, owner->concept_name);
        if (!h) fail(RuntimeErrorKind::MissingSuper, "no " + owner->concept_name + " object for " + m + "()");
        return call_obj_method(*h, owner->concept_name, *owner->decl, args, f.acc);
      }
    }
    if (m == "getUniqueString" && args.empty()) return Value(unique_string());
    if (m == "heapSize" && args.empty()) return Value(static_cast<std::int64_t>(heap.size()));
    fail(RuntimeErrorKind::NoSuchMethod, "no method " + m + "() here");
  }

  Value map_call(const refalg::MapRef& map, const std::string& m, const std::vector<Value>& args) {
    auto arity = [&](size_t n) {
      if (args.size() != n)
        fail(RuntimeErrorKind::TypeMismatch, "Map." + m + " expects " + std::to_string(n) + " argument(s)");
    };
    if (m == "get") {
      arity(1);
      const Value* v = map->find(args[0]);
      return v ? *v : Value{};
    }
    if (m == "add" || m == "put") {
      arity(2);
      map->put(args[0], args[1]);
      return Value{};
    }
    if (m == "contains") {
      arity(1);
      return Value(map->find(args[0]) != nullptr);
    }
    if (m == "remove") {
      arity(1);
      return Value(map->erase(args[0]));
    }
    if (m == "size") {
      arity(0);
      return Value(static_cast<std::int64_t>(map->entries.size()));
    }
    fail(RuntimeErrorKind::NoSuchMethod, "Map has no method " + m + "()");
  }
};

Interpreter::Interpreter(const SourceProgram& program, const model::ConceptTable& table, std::ostream& out,
                         std::ostream* trace, RunOptions options)
    : impl_(std::make_unique<Impl>(program, table, out, trace, options)) {}

Interpreter::~Interpreter() = default;

void Interpreter::run() { impl_->run(); }

const Heap& Interpreter::heap() const { return impl_->heap; }

std::uint64_t Interpreter::steps() const { return impl_->steps; }

}  // namespace copl::runtime
