// Copyright 2026 The Patchsmith Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "patchsmith/executor.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "patchsmith/arith.hpp"

namespace patchsmith {

const char* fault_kind_name(FaultKind k) {
  switch (k) {
    case FaultKind::None: return "none";
    case FaultKind::OobRead: return "oob_read";
    case FaultKind::OobWrite: return "oob_write";
    case FaultKind::ZeroSizeAllocOverflow: return "zero_size_alloc_overflow";
    case FaultKind::BadCastAccess: return "bad_cast_access";
  }
  return "?";
}

TriggerInput parse_input(const std::string& json_text) {
  TriggerInput in;
  try {
    auto j = nlohmann::json::parse(json_text);
    for (const auto& a : j.at("argv")) in.argv.push_back(a.get<std::string>());
    if (j.contains("stdin_hex")) {
      std::string hex = j["stdin_hex"].get<std::string>();
      if (hex.size() % 2) throw Error("stdin_hex has odd length");
      for (size_t i = 0; i < hex.size(); i += 2)
        in.stdin_bytes += static_cast<char>(std::stoi(hex.substr(i, 2), nullptr, 16));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad input file: ") + e.what());
  }
  return in;
}

TriggerInput load_input(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_input(ss.str());
}

std::string input_to_json(const TriggerInput& in) {
  nlohmann::json j;
  j["argv"] = in.argv;
  if (!in.stdin_bytes.empty()) {
    std::string hex;
    char buf[3];
    for (unsigned char c : in.stdin_bytes) {
      std::snprintf(buf, sizeof buf, "%02x", c);
      hex += buf;
    }
    j["stdin_hex"] = hex;
  }
  return j.dump();
}

namespace {

struct Value {
  uint64_t bits = 0;
  int prov = -1;   // allocation id a pointer was derived from
  int taint = -1;  // overflowed arithmetic the value depends on
};

struct Shadow {
  int prov = -1;
  int taint = -1;
  uint64_t size = 0;
};

struct Alloc {
  AllocationRecord rec;
  std::vector<uint8_t> bytes;
  std::map<uint64_t, Shadow> shadow;  // by offset
};

struct Frame {
  const Function* f = nullptr;
  std::map<std::string, int> vars;
  std::vector<Value> values;
  int block = 0;
  size_t index = 0;
  int call_uid = -1;
  int ret_id = -1;
};

struct FaultSignal {};
struct RuntimeError {
  std::string msg;
};
struct ExitSignal {
  int code;
};

constexpr uint64_t kHeapStart = 0x10000;
constexpr uint64_t kMaxMalloc = uint64_t{1} << 24;

}  // namespace

class Machine {
 public:
  Machine(const Program& p, const ExecOptions& o) : p_(p), opts_(o) {
    r_.executed.assign(p.locations.size(), 0);
  }

  ExecResult run(const TriggerInput& in) {
    try {
      setup_globals();
      start_main(in);
      loop();
    } catch (const FaultSignal&) {
      r_.status = ExecResult::Status::Faulted;
    } catch (const RuntimeError& e) {
      r_.status = ExecResult::Status::Error;
      r_.error = e.msg;
    } catch (const ExitSignal& e) {
      r_.status = ExecResult::Status::Exited;
      r_.exit_code = e.code;
    }
    for (const auto& a : allocs_) r_.allocs.push_back(a.rec);
    return std::move(r_);
  }

  // ---- views ----
  const Frame& top() const { return frames_.back(); }
  Frame& top() { return frames_.back(); }
  int depth() const { return static_cast<int>(frames_.size()); }

  std::vector<int> call_stack() const {
    std::vector<int> s;
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it)
      if (it->call_uid >= 0) s.push_back(it->call_uid);
    return s;
  }

  int var_alloc(const std::string& name) const {
    if (!frames_.empty()) {
      auto it = top().vars.find(name);
      if (it != top().vars.end()) return it->second;
    }
    auto g = globals_.find(name);
    return g == globals_.end() ? -1 : g->second;
  }

  const Alloc* find_alloc(uint64_t addr) const {
    auto it = by_base_.upper_bound(addr);
    if (it == by_base_.begin()) return nullptr;
    --it;
    const Alloc& a = allocs_[static_cast<size_t>(it->second)];
    if (addr < a.rec.base + std::max<uint64_t>(a.rec.size, 1) && a.rec.live) return &a;
    return nullptr;
  }

  std::optional<uint64_t> peek(uint64_t addr, const TypeRef& t) const {
    const Alloc* a = find_alloc(addr);
    uint64_t n = size_of(t);
    if (!a || addr + n > a->rec.base + a->rec.size) return std::nullopt;
    return decode(*a, addr - a->rec.base, t);
  }

  std::optional<uint64_t> var_value(const std::string& name) const {
    int id = var_alloc(name);
    if (id < 0) return std::nullopt;
    const Alloc& a = allocs_[static_cast<size_t>(id)];
    TypeRef t = var_types_.at(id);
    if (is_array(t) || is_struct(t)) return a.rec.base;
    return decode(a, 0, t);
  }

  std::optional<uint64_t> var_address(const std::string& name) const {
    int id = var_alloc(name);
    if (id < 0) return std::nullopt;
    return allocs_[static_cast<size_t>(id)].rec.base;
  }

  const Program& p_;

 private:
  // ---- memory ----
  int new_alloc(uint64_t size, AllocKind kind, const std::string& var, int site) {
    Alloc a;
    a.rec.id = static_cast<int>(allocs_.size());
    a.rec.base = next_;
    a.rec.size = size;
    a.rec.kind = kind;
    a.rec.var = var;
    a.rec.site_uid = site;
    a.rec.func = frames_.empty() ? std::string() : top().f->name;
    if (site >= 0) a.rec.call_stack.push_back(site);
    for (int c : call_stack()) a.rec.call_stack.push_back(c);
    a.bytes.assign(size, 0);
    // 16-byte alignment plus a guard gap so adjacent objects never touch.
    next_ = (next_ + size + 16 + 15) / 16 * 16;
    by_base_[a.rec.base] = a.rec.id;
    allocs_.push_back(std::move(a));
    return allocs_.back().rec.id;
  }

  static uint64_t decode(const Alloc& a, uint64_t off, const TypeRef& t) {
    uint64_t n = size_of(t);
    uint64_t v = 0;
    for (uint64_t i = 0; i < n && i < 8; ++i) v |= static_cast<uint64_t>(a.bytes[off + i]) << (8 * i);
    return convert(v, t);
  }

  Value read_cell(const Alloc& a, uint64_t off, const TypeRef& t) const {
    Value v;
    v.bits = decode(a, off, t);
    auto it = a.shadow.find(off);
    if (it != a.shadow.end() && it->second.size == size_of(t)) {
      v.prov = it->second.prov;
      v.taint = it->second.taint;
    }
    return v;
  }

  static void write_cell(Alloc& a, uint64_t off, const TypeRef& t, const Value& v) {
    uint64_t n = size_of(t);
    uint64_t bits = convert(v.bits, t);
    for (uint64_t i = 0; i < n && i < 8; ++i) a.bytes[off + i] = static_cast<uint8_t>(bits >> (8 * i));
    clear_shadow(a, off, n);
    if (v.prov >= 0 || v.taint >= 0) a.shadow[off] = Shadow{v.prov, v.taint, n};
  }

  static void clear_shadow(Alloc& a, uint64_t off, uint64_t n) {
    auto it = a.shadow.lower_bound(off >= 8 ? off - 7 : 0);
    while (it != a.shadow.end() && it->first < off + n) {
      if (it->first + it->second.size > off) it = a.shadow.erase(it);
      else ++it;
    }
  }

  [[noreturn]] void fault(FaultKind k, const Instruction& in, uint64_t addr, uint64_t size, int alloc,
                          Direction d) {
    r_.fault.kind = k;
    r_.fault.inst_uid = in.uid;
    r_.fault.func = top().f->name;
    r_.fault.address = addr;
    r_.fault.access_size = size;
    r_.fault.alloc_id = alloc;
    r_.fault.direction = d;
    r_.fault.call_stack = call_stack();
    if (opts_.record_trace) r_.trace.push_back({in.uid, 0, depth()});
    throw FaultSignal{};
  }

  // Bounds-checks [ptr, ptr+size) against the pointer's provenance.
  Alloc& check(const Instruction& in, const Value& ptr, uint64_t size, bool write) {
    if (opts_.observer) opts_.observer->on_access(MachineView(*this), in, ptr.bits, size, write);
    FaultKind k = write ? FaultKind::OobWrite : FaultKind::OobRead;
    if (ptr.prov < 0) {
      if (ptr.bits == 0) throw RuntimeError{"null pointer dereference"};
      const Alloc* a = find_alloc(ptr.bits);
      if (!a) throw RuntimeError{"wild pointer dereference"};
      Value v = ptr;
      v.prov = a->rec.id;
      return check(in, v, size, write);
    }
    Alloc& a = allocs_[static_cast<size_t>(ptr.prov)];
    if (!a.rec.live) throw RuntimeError{"use after free"};
    if (ptr.bits < a.rec.base) fault(k, in, ptr.bits, size, a.rec.id, Direction::Lower);
    if (ptr.bits + size > a.rec.base + a.rec.size) fault(k, in, ptr.bits, size, a.rec.id, Direction::Upper);
    return a;
  }

  Value load_at(const Instruction& in, const Value& ptr, const TypeRef& t) {
    Alloc& a = check(in, ptr, size_of(t), false);
    return read_cell(a, ptr.bits - a.rec.base, t);
  }

  void store_at(const Instruction& in, const Value& ptr, const TypeRef& t, const Value& v) {
    Alloc& a = check(in, ptr, size_of(t), true);
    write_cell(a, ptr.bits - a.rec.base, t, v);
  }

  uint8_t load_byte(const Instruction& in, const Value& ptr) {
    Alloc& a = check(in, ptr, 1, false);
    return a.bytes[ptr.bits - a.rec.base];
  }

  // ---- setup ----
  void setup_globals() {
    for (const auto& g : p_.globals) {
      int id = new_alloc(std::max<uint64_t>(size_of(g.type), 1), AllocKind::Global, g.name, -1);
      var_types_[id] = g.type;
      globals_[g.name] = id;
      Alloc& a = allocs_[static_cast<size_t>(id)];
      if (g.init && is_scalar(g.type)) write_cell(a, 0, g.type, Value{static_cast<uint64_t>(*g.init)});
      if (g.init_str) {
        if (is_array(g.type)) {
          for (size_t i = 0; i < g.init_str->size() && i < a.bytes.size(); ++i)
            a.bytes[i] = static_cast<uint8_t>((*g.init_str)[i]);
        } else {
          write_cell(a, 0, g.type, string_value(*g.init_str));
        }
      }
    }
  }

  Value string_value(const std::string& s) {
    auto it = strings_.find(s);
    if (it != strings_.end()) return Value{allocs_[static_cast<size_t>(it->second)].rec.base, it->second};
    int id = new_alloc(s.size() + 1, AllocKind::Global, "", -1);
    for (size_t i = 0; i < s.size(); ++i) allocs_[static_cast<size_t>(id)].bytes[i] = static_cast<uint8_t>(s[i]);
    strings_[s] = id;
    return Value{allocs_[static_cast<size_t>(id)].rec.base, id};
  }

  void start_main(const TriggerInput& in) {
    const Function* main = p_.find(p_.entry);
    if (!main) throw RuntimeError{"missing entry function " + p_.entry};
    std::vector<Value> args;
    if (!main->params.empty()) {
      std::vector<Value> strs;
      for (const auto& s : in.argv) {
        int id = new_alloc(s.size() + 1, AllocKind::Input, "", -1);
        for (size_t i = 0; i < s.size(); ++i) allocs_[static_cast<size_t>(id)].bytes[i] = static_cast<uint8_t>(s[i]);
        strs.push_back(Value{allocs_[static_cast<size_t>(id)].rec.base, id});
      }
      int arr = new_alloc(8 * (strs.size() + 1), AllocKind::Input, "", -1);
      for (size_t i = 0; i < strs.size(); ++i)
        write_cell(allocs_[static_cast<size_t>(arr)], 8 * i, pointer_to(type_char()), strs[i]);
      args.push_back(Value{in.argv.size()});
      args.push_back(Value{allocs_[static_cast<size_t>(arr)].rec.base, arr});
    }
    push_frame(*main, args, -1, -1);
  }

  void push_frame(const Function& f, const std::vector<Value>& args, int call_uid, int ret_id) {
    if (frames_.size() > 10000) throw RuntimeError{"call depth exceeded"};
    Frame fr;
    fr.f = &f;
    fr.values.resize(static_cast<size_t>(f.num_values));
    fr.call_uid = call_uid;
    fr.ret_id = ret_id;
    fr.block = f.block_index(f.entry);
    frames_.push_back(std::move(fr));
    for (size_t i = 0; i < f.params.size(); ++i) {
      const Param& prm = f.params[i];
      int id = new_alloc(std::max<uint64_t>(size_of(prm.type), 1), AllocKind::Stack, prm.name, -1);
      var_types_[id] = prm.type;
      frames_.back().vars[prm.name] = id;
      Value v = i < args.size() ? args[i] : Value{};
      write_cell(allocs_[static_cast<size_t>(id)], 0, prm.type, v);
    }
    for (const auto& [name, type] : f.locals) {
      int id = new_alloc(std::max<uint64_t>(size_of(type), 1), AllocKind::Stack, name, -1);
      var_types_[id] = type;
      frames_.back().vars[name] = id;
    }
  }

  void pop_frame() {
    for (const auto& [name, id] : top().vars) allocs_[static_cast<size_t>(id)].rec.live = false;
    frames_.pop_back();
  }

  // ---- interpretation ----
  Value operand(const Operand& o) {
    switch (o.kind) {
      case Operand::Kind::Const: return Value{convert(static_cast<uint64_t>(o.imm), o.type)};
      case Operand::Kind::Str: return string_value(o.str);
      case Operand::Kind::Value: return top().values[static_cast<size_t>(o.id)];
      case Operand::Kind::None: break;
    }
    return Value{};
  }

  Alloc& var_cell(const std::string& name) {
    int id = var_alloc(name);
    if (id < 0) throw RuntimeError{"unknown variable " + name};
    return allocs_[static_cast<size_t>(id)];
  }

  void loop() {
    while (!frames_.empty()) {
      Frame& fr = frames_.back();
      const BasicBlock& bb = fr.f->blocks[static_cast<size_t>(fr.block)];
      if (fr.index >= bb.insts.size()) throw RuntimeError{"fell off block " + bb.label};
      const Instruction& in = bb.insts[fr.index++];
      if (++r_.steps > opts_.step_budget) throw Abort("execute", "nontermination suspected");
      r_.executed[static_cast<size_t>(in.uid)] = 1;
      step(in);
    }
  }

  void define(const Instruction& in, const Value& v) {
    if (in.result >= 0) top().values[static_cast<size_t>(in.result)] = v;
    after(in, v.bits);
  }

  void after(const Instruction& in, std::optional<uint64_t> v) {
    if (opts_.record_trace) r_.trace.push_back({in.uid, v.value_or(0), depth()});
    if (opts_.observer) opts_.observer->on_inst(MachineView(*this), in, v);
  }

  void jump(const std::string& label) {
    Frame& fr = frames_.back();
    fr.block = fr.f->block_index(label);
    fr.index = 0;
  }

  void step(const Instruction& in) {
    switch (in.op) {
      case Opcode::Load: {
        if (!in.var.empty()) {
          Alloc& a = var_cell(in.var);
          define(in, read_cell(a, 0, in.type));
        } else {
          define(in, load_at(in, operand(in.a), in.type));
        }
        return;
      }
      case Opcode::Store: {
        Value v = operand(in.b);
        if (!in.var.empty()) write_cell(var_cell(in.var), 0, in.type, v);
        else store_at(in, operand(in.a), in.type, v);
        after(in, convert(v.bits, in.type));
        return;
      }
      case Opcode::GetElementField: {
        Value b = operand(in.a);
        define(in, Value{b.bits + in.offset, b.prov, -1});
        return;
      }
      case Opcode::GetElementIndex: {
        Value b = operand(in.a);
        Value i = operand(in.b);
        define(in, Value{b.bits + i.bits * in.scale, b.prov, i.taint});
        return;
      }
      case Opcode::BinOp: {
        Value a = operand(in.a);
        if (in.bin == BinKind::Cast) {
          define(in, Value{convert(a.bits, in.type), is_pointer(in.type) ? a.prov : -1, a.taint});
          return;
        }
        Value b = operand(in.b);
        ArithResult r = arith_bin(in.bin, a.bits, in.a.type, b.bits, in.b.type, in.type, in.scale);
        if (r.div_by_zero) throw RuntimeError{"division by zero"};
        Value v{r.bits, -1, a.taint >= 0 ? a.taint : b.taint};
        if (is_pointer(in.type)) v.prov = is_pointer(decay(in.a.type)) ? a.prov : b.prov;
        if (r.overflow) v.taint = in.uid;
        define(in, v);
        return;
      }
      case Opcode::CmpOp: {
        Value a = operand(in.a), b = operand(in.b);
        define(in, Value{arith_cmp(in.cmp, a.bits, b.bits, in.cmp_type) ? 1u : 0u});
        return;
      }
      case Opcode::Allocate: {
        Alloc& a = var_cell(in.var);
        define(in, Value{a.rec.base, a.rec.id, -1});
        return;
      }
      case Opcode::Branch:
        after(in, std::nullopt);
        jump(in.target);
        return;
      case Opcode::CondBranch: {
        Value c = operand(in.a);
        after(in, c.bits);
        jump(c.bits != 0 ? in.target : in.target2);
        return;
      }
      case Opcode::Call:
        call(in);
        return;
      case Opcode::Ret: {
        Value v = in.a.kind == Operand::Kind::None ? Value{} : operand(in.a);
        v.bits = convert(v.bits, top().f->ret);
        after(in, v.bits);
        int ret_id = top().ret_id;
        int call_uid = top().call_uid;
        pop_frame();
        if (frames_.empty()) throw ExitSignal{is_void(p_.find(p_.entry)->ret) ? 0 : static_cast<int>(as_signed(v.bits))};
        if (ret_id >= 0) top().values[static_cast<size_t>(ret_id)] = v;
        const Instruction* ci = p_.inst(call_uid);
        if (ci && opts_.observer) opts_.observer->on_inst(MachineView(*this), *ci, v.bits);
        return;
      }
    }
  }

  void call(const Instruction& in) {
    std::vector<Value> args;
    for (const auto& a : in.args) args.push_back(operand(a));
    if (const Function* f = p_.find(in.callee)) {
      for (size_t i = 0; i < args.size() && i < f->params.size(); ++i)
        args[i].bits = convert(args[i].bits, f->params[i].type);
      if (opts_.record_trace) r_.trace.push_back({in.uid, 0, depth()});
      if (opts_.observer) opts_.observer->on_call(MachineView(*this), in);
      push_frame(*f, args, in.uid, in.result);
      return;
    }
    Value v = intrinsic(in, args);
    define(in, v);
  }

  std::string read_string(const Instruction& in, Value p) {
    std::string s;
    while (true) {
      uint8_t c = load_byte(in, p);
      if (c == 0) return s;
      s += static_cast<char>(c);
      ++p.bits;
    }
  }

  Value intrinsic(const Instruction& in, std::vector<Value>& args) {
    const std::string& name = in.callee;
    auto arg = [&](size_t i) { return i < args.size() ? args[i] : Value{}; };
    if (name == "malloc") {
      Value n = arg(0);
      if (n.bits > kMaxMalloc) return Value{};
      int id = new_alloc(n.bits, AllocKind::Heap, "", in.uid);
      allocs_[static_cast<size_t>(id)].rec.overflow_uid = n.taint;
      if (n.bits == 0 && n.taint >= 0) {
        r_.fault.overflow_uid = n.taint;
        fault(FaultKind::ZeroSizeAllocOverflow, in, allocs_[static_cast<size_t>(id)].rec.base, 0, id,
              Direction::Upper);
      }
      return Value{allocs_[static_cast<size_t>(id)].rec.base, id};
    }
    if (name == "free") {
      Value p = arg(0);
      if (p.bits == 0) return Value{};
      const Alloc* a = find_alloc(p.bits);
      if (!a || a->rec.base != p.bits || a->rec.kind != AllocKind::Heap)
        throw RuntimeError{"invalid free"};
      allocs_[static_cast<size_t>(a->rec.id)].rec.live = false;
      return Value{};
    }
    if (name == "strlen") {
      return Value{read_string(in, arg(0)).size()};
    }
    if (name == "memcpy") {
      Value d = arg(0), s = arg(1);
      uint64_t n = arg(2).bits;
      if (n == 0) return d;
      Alloc& src = check(in, s, n, false);
      std::vector<uint8_t> tmp(src.bytes.begin() + static_cast<long>(s.bits - src.rec.base),
                               src.bytes.begin() + static_cast<long>(s.bits - src.rec.base + n));
      std::map<uint64_t, Shadow> sh;
      for (const auto& [off, e] : src.shadow)
        if (off >= s.bits - src.rec.base && off + e.size <= s.bits - src.rec.base + n)
          sh[off - (s.bits - src.rec.base)] = e;
      Alloc& dst = check(in, d, n, true);
      uint64_t doff = d.bits - dst.rec.base;
      std::copy(tmp.begin(), tmp.end(), dst.bytes.begin() + static_cast<long>(doff));
      clear_shadow(dst, doff, n);
      for (const auto& [off, e] : sh) dst.shadow[doff + off] = e;
      return d;
    }
    if (name == "printf") {
      std::string fmt = read_string(in, arg(0));
      std::string out;
      size_t ai = 1;
      for (size_t i = 0; i < fmt.size(); ++i) {
        if (fmt[i] != '%' || i + 1 >= fmt.size()) {
          out += fmt[i];
          continue;
        }
        ++i;
        bool is_long = false;
        while (i < fmt.size() && fmt[i] == 'l') {
          is_long = true;
          ++i;
        }
        char c = i < fmt.size() ? fmt[i] : '%';
        Value v = arg(ai);
        const TypeRef at = ai < in.args.size() ? in.args[ai].type : type_int();
        char buf[64];
        switch (c) {
          case 'd':
          case 'i':
            std::snprintf(buf, sizeof buf, "%lld",
                          static_cast<long long>(is_long ? as_signed(v.bits)
                                                         : static_cast<int32_t>(v.bits)));
            out += buf;
            ++ai;
            break;
          case 'u':
            std::snprintf(buf, sizeof buf, "%llu",
                          static_cast<unsigned long long>(is_long ? v.bits : static_cast<uint32_t>(v.bits)));
            out += buf;
            ++ai;
            break;
          case 'x':
            std::snprintf(buf, sizeof buf, "%llx",
                          static_cast<unsigned long long>(is_long ? v.bits : static_cast<uint32_t>(v.bits)));
            out += buf;
            ++ai;
            break;
          case 'c':
            out += static_cast<char>(v.bits);
            ++ai;
            break;
          case 's':
            out += read_string(in, v);
            ++ai;
            break;
          case '%':
            out += '%';
            break;
          default:
            throw RuntimeError{std::string("unsupported printf conversion %") + c};
        }
        (void)at;
      }
      r_.out += out;
      return Value{out.size()};
    }
    if (name == "exit") {
      after(in, std::nullopt);
      throw ExitSignal{static_cast<int>(as_signed(arg(0).bits))};
    }
    throw Abort("execute", "unmodeled external " + name);
  }

  const ExecOptions& opts_;
  ExecResult r_;
  std::vector<Alloc> allocs_;
  std::map<uint64_t, int> by_base_;
  std::map<int, TypeRef> var_types_;
  std::map<std::string, int> globals_;
  std::map<std::string, int> strings_;
  std::vector<Frame> frames_;
  uint64_t next_ = kHeapStart;

  friend class MachineView;
};

const Function& MachineView::function() const { return *m_.top().f; }
int MachineView::depth() const { return m_.depth(); }
std::vector<int> MachineView::call_stack() const { return m_.call_stack(); }
std::optional<uint64_t> MachineView::var(const std::string& name) const { return m_.var_value(name); }
std::optional<uint64_t> MachineView::var_address(const std::string& name) const {
  return m_.var_address(name);
}
std::optional<uint64_t> MachineView::load(uint64_t addr, const TypeRef& t) const { return m_.peek(addr, t); }
const AllocationRecord* MachineView::alloc_at(uint64_t addr) const {
  const auto* a = m_.find_alloc(addr);
  return a ? &a->rec : nullptr;
}

std::optional<uint64_t> FrameEnv::var(const SymExpr& e) const {
  auto v = v_.var(e.name);
  if (!v) return std::nullopt;
  return convert(*v, e.type);
}
std::optional<uint64_t> FrameEnv::var_address(const SymExpr& e) const { return v_.var_address(e.name); }
std::optional<uint64_t> FrameEnv::load(uint64_t addr, const TypeRef& t) const { return v_.load(addr, t); }

ExecResult execute(const Program& p, const TriggerInput& in, const ExecOptions& opts) {
  Machine m(p, opts);
  return m.run(in);
}

std::optional<FaultRecord> detect_integer_overflow_to_zero_alloc(const ExecResult& r) {
  if (r.fault.kind == FaultKind::ZeroSizeAllocOverflow) return r.fault;
  for (const auto& a : r.allocs) {
    if (a.kind == AllocKind::Heap && a.size == 0 && a.overflow_uid >= 0) {
      FaultRecord f;
      f.kind = FaultKind::ZeroSizeAllocOverflow;
      f.inst_uid = a.site_uid;
      f.func = a.func;
      f.address = a.base;
      f.alloc_id = a.id;
      f.overflow_uid = a.overflow_uid;
      f.call_stack.assign(a.call_stack.begin() + 1, a.call_stack.end());
      return f;
    }
  }
  return std::nullopt;
}

FaultRecord detect_bad_cast(const Program& p, const ExecResult& r) {
  FaultRecord f = r.fault;
  if (f.kind != FaultKind::OobRead && f.kind != FaultKind::OobWrite) return f;
  const Instruction* in = p.inst(f.inst_uid);
  InstLoc loc = p.locate(f.inst_uid);
  if (!in || !loc.func || in->a.kind != Operand::Kind::Value) return f;
  const Instruction* gef = nullptr;
  // The outermost field access in the chain names the object type.
  for (const Instruction* d = loc.func->def_of(in->a.id); d;) {
    if (d->op == Opcode::GetElementField) gef = d;
    else if (d->op != Opcode::GetElementIndex) break;
    if (d->a.kind != Operand::Kind::Value) break;
    d = loc.func->def_of(d->a.id);
  }
  if (!gef) return f;
  if (address_updated_in_loop(*loc.func, *in)) return f;
  const AllocationRecord* a = r.alloc(f.alloc_id);
  TypeRef st = decay(gef->a.type);
  if (!a || !is_pointer(st) || !is_struct(st->elem)) return f;
  if (a->size < size_of(st->elem)) f.kind = FaultKind::BadCastAccess;
  return f;
}

std::string dump_trace(const Program& p, const ExecResult& r) {
  std::ostringstream out;
  for (const auto& t : r.trace) {
    const Instruction* in = p.inst(t.uid);
    out << std::string(static_cast<size_t>(std::max(0, t.depth - 1)) * 2, ' ') << format_instruction(*in);
    if (in->result >= 0 || in->op == Opcode::Store) out << "  ; " << as_signed(t.value);
    out << "\n";
  }
  return out.str();
}

}  // namespace patchsmith
