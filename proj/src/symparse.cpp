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


#include <cctype>
#include <limits>

#include "patchsmith/ast.hpp"
#include "patchsmith/symexpr.hpp"

namespace patchsmith {

namespace {

struct Tok {
  enum Kind { End, Ident, Int, Str, Punct } kind = End;
  std::string text;
  uint64_t ival = 0;
  bool is_unsigned = false;
  bool is_long = false;
};

class SymParser {
 public:
  SymParser(const std::string& text, const VarTypes& vt, const TranslationUnit* tu)
      : src_(text), vt_(vt), tu_(tu) {
    lex();
  }

  SymRef parse() {
    SymRef e = binary(0);
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("expression '" + src_ + "': " + msg);
  }

  void lex() {
    size_t i = 0;
    const size_t n = src_.size();
    static const char* puncts[] = {"->", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "(",
                                   ")",  "[",  "]",  ".",  ",",  "*",  "&",  "+",  "-",  "!",
                                   "~",  "/",  "%",  "<",  ">",  "^",  "|"};
    while (i < n) {
      char c = src_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      Tok t;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t b = i;
        while (i < n && (std::isalnum(static_cast<unsigned char>(src_[i])) || src_[i] == '_')) ++i;
        t.kind = Tok::Ident;
        t.text = src_.substr(b, i - b);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        size_t b = i;
        int base = 10;
        if (c == '0' && i + 1 < n && (src_[i + 1] == 'x' || src_[i + 1] == 'X')) {
          base = 16;
          i += 2;
        }
        uint64_t v = 0;
        while (i < n && std::isxdigit(static_cast<unsigned char>(src_[i]))) {
          char d = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[i])));
          if (base == 10 && !std::isdigit(static_cast<unsigned char>(d))) break;
          uint64_t dv = static_cast<uint64_t>(std::isdigit(static_cast<unsigned char>(d)) ? d - '0' : d - 'a' + 10);
          if (v > (std::numeric_limits<uint64_t>::max() - dv) / static_cast<uint64_t>(base))
            fail("integer literal too large");
          v = v * static_cast<uint64_t>(base) + dv;
          ++i;
        }
        while (i < n && (src_[i] == 'u' || src_[i] == 'U' || src_[i] == 'l' || src_[i] == 'L')) {
          if (src_[i] == 'u' || src_[i] == 'U') t.is_unsigned = true;
          else t.is_long = true;
          ++i;
        }
        t.kind = Tok::Int;
        t.ival = v;
        t.text = src_.substr(b, i - b);
      } else if (c == '\'') {
        ++i;
        uint64_t v = static_cast<unsigned char>(escape(i));
        if (i >= n || src_[i] != '\'') fail("unterminated character literal");
        ++i;
        t.kind = Tok::Int;
        t.ival = v;
        t.text = "'";
      } else if (c == '"') {
        ++i;
        std::string s;
        while (i < n && src_[i] != '"') s += escape(i);
        if (i >= n) fail("unterminated string literal");
        ++i;
        t.kind = Tok::Str;
        t.text = s;
      } else {
        for (const char* p : puncts) {
          std::string_view pv(p);
          if (src_.compare(i, pv.size(), pv) == 0) {
            t.kind = Tok::Punct;
            t.text = std::string(pv);
            i += pv.size();
            break;
          }
        }
        if (t.kind != Tok::Punct) fail(std::string("unexpected character '") + c + "'");
      }
      toks_.push_back(std::move(t));
    }
    toks_.push_back(Tok{});
  }

  char escape(size_t& i) {
    char c = src_[i++];
    if (c != '\\') return c;
    if (i >= src_.size()) fail("bad escape");
    char e = src_[i++];
    switch (e) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case '0': case '1': case '2': case '3': case '4': case '5': case '6': case '7': {
        int v = e - '0';
        for (int k = 0; k < 2 && i < src_.size() && src_[i] >= '0' && src_[i] <= '7'; ++k)
          v = v * 8 + (src_[i++] - '0');
        return static_cast<char>(v);
      }
      default: return e;
    }
  }

  const Tok& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Tok& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool is(const char* p, size_t k = 0) const {
    return peek(k).kind == Tok::Punct && peek(k).text == p;
  }
  void expect(const char* p) {
    if (!is(p)) fail(std::string("expected '") + p + "'");
    ++pos_;
  }

  static int bin_prec(const std::string& op) {
    if (op == "*" || op == "/" || op == "%") return 13;
    if (op == "+" || op == "-") return 12;
    if (op == "<<" || op == ">>") return 11;
    if (op == "<" || op == "<=" || op == ">" || op == ">=") return 10;
    if (op == "==" || op == "!=") return 9;
    if (op == "&") return 8;
    if (op == "^") return 7;
    if (op == "|") return 6;
    if (op == "&&") return 5;
    if (op == "||") return 4;
    return -1;
  }

  SymRef binary(int min_prec) {
    SymRef lhs = unary();
    while (peek().kind == Tok::Punct) {
      std::string op = peek().text;
      int p = bin_prec(op);
      if (p < 0 || p < min_prec) break;
      ++pos_;
      SymRef rhs = binary(p + 1);
      lhs = combine(op, lhs, rhs);
    }
    return lhs;
  }

  static SymRef combine(const std::string& op, SymRef a, SymRef b) {
    static const std::map<std::string, SymOp> ops = {
        {"+", SymOp::Add}, {"-", SymOp::Sub},  {"*", SymOp::Mul},  {"/", SymOp::Div},
        {"%", SymOp::Rem}, {"<<", SymOp::Shl}, {">>", SymOp::Shr}, {"&", SymOp::And},
        {"|", SymOp::Or},  {"^", SymOp::Xor},  {"&&", SymOp::LAnd}, {"||", SymOp::LOr}};
    static const std::map<std::string, CmpKind> cmps = {
        {"==", CmpKind::Eq}, {"!=", CmpKind::Ne}, {"<", CmpKind::Lt},
        {"<=", CmpKind::Le}, {">", CmpKind::Gt},  {">=", CmpKind::Ge}};
    auto c = cmps.find(op);
    if (c != cmps.end()) return make_cmp_op(c->second, std::move(a), std::move(b));
    return make_bin_op(ops.at(op), std::move(a), std::move(b), nullptr);
  }

  bool type_start(size_t k) const {
    const Tok& t = peek(k);
    if (t.kind != Tok::Ident) return false;
    static const std::set<std::string> kw = {"int",    "long",   "short", "char",
                                             "signed", "unsigned", "void", "struct"};
    return kw.count(t.text) || fixed_width_type(t.text).has_value();
  }

  TypeRef type_name_() {
    std::string spelling;
    bool uns = false;
    int shorts = 0, longs = 0, chars = 0;
    TypeRef t;
    while (peek().kind == Tok::Ident) {
      const std::string w = peek().text;
      if (w == "struct") {
        ++pos_;
        std::string name = next().text;
        if (!tu_ || !tu_->structs.count(name)) fail("unknown struct " + name);
        t = struct_type(tu_->structs.at(name));
        continue;
      }
      if (w == "void") {
        ++pos_;
        t = void_type();
        continue;
      }
      if (auto fw = fixed_width_type(w)) {
        ++pos_;
        t = *fw;
        continue;
      }
      if (w == "unsigned" || w == "signed" || w == "short" || w == "long" || w == "char" || w == "int") {
        if (w == "unsigned") uns = true;
        if (w == "short") ++shorts;
        if (w == "long") ++longs;
        if (w == "char") ++chars;
        spelling += spelling.empty() ? w : " " + w;
        ++pos_;
        continue;
      }
      break;
    }
    if (!t) {
      if (spelling.empty()) fail("expected type");
      int width = chars ? 8 : shorts ? 16 : longs ? 64 : 32;
      t = int_type(width, !uns, spelling);
    }
    while (is("*")) {
      ++pos_;
      t = pointer_to(t);
    }
    return t;
  }

  static TypeRef literal_type(const Tok& t) {
    const uint64_t v = t.ival;
    const uint64_t imax = static_cast<uint64_t>(std::numeric_limits<int32_t>::max());
    const uint64_t umax = std::numeric_limits<uint32_t>::max();
    const uint64_t lmax = static_cast<uint64_t>(std::numeric_limits<int64_t>::max());
    if (t.is_unsigned) return (!t.is_long && v <= umax) ? int_type(32, false) : int_type(64, false);
    if (!t.is_long && v <= imax) return type_int();
    return v <= lmax ? type_long() : int_type(64, false);
  }

  SymRef unary() {
    if (is("-") && peek(1).kind == Tok::Int && !is("[", 2) && !is(".", 2) && !is("->", 2)) {
      ++pos_;
      const Tok& t = next();
      return sym_const(-static_cast<int64_t>(t.ival), literal_type(t));
    }
    if (is("-")) {
      ++pos_;
      SymRef x = unary();
      return make_bin_op(SymOp::Sub, sym_const(0, type_int()), x, nullptr);
    }
    if (is("+")) {
      ++pos_;
      return unary();
    }
    if (is("!")) {
      ++pos_;
      return make_cmp_op(CmpKind::Eq, unary(), sym_const(0, type_int()));
    }
    if (is("~")) {
      ++pos_;
      return make_bin_op(SymOp::Xor, unary(), sym_const(-1, type_int()), nullptr);
    }
    if (is("*")) {
      ++pos_;
      SymRef x = unary();
      return deref(x);
    }
    if (is("&")) {
      ++pos_;
      return sym_addr_of(unary());
    }
    if (is("(") && type_start(1)) {
      ++pos_;
      TypeRef t = type_name_();
      expect(")");
      return sym_cast(t, unary());
    }
    return postfix(primary());
  }

  static SymRef deref(const SymRef& p) {
    SymExpr e;
    e.kind = SymKind::Deref;
    TypeRef d = decay(p->type);
    e.type = is_pointer(d) && d->elem ? d->elem : type_long();
    e.kids = {p};
    return std::make_shared<const SymExpr>(std::move(e));
  }

  static SymRef field(SymRef base, const std::string& name, bool arrow) {
    try {
      return make_struct_op(base, name, arrow);
    } catch (const Abort&) {
      SymExpr e;
      e.kind = SymKind::Field;
      e.name = name;
      e.via_pointer = arrow;
      e.type = type_long();
      e.kids = {std::move(base)};
      return std::make_shared<const SymExpr>(std::move(e));
    }
  }

  SymRef postfix(SymRef e) {
    while (true) {
      if (is("[")) {
        ++pos_;
        SymRef idx = binary(0);
        expect("]");
        SymExpr n;
        n.kind = SymKind::Index;
        TypeRef d = decay(e->type);
        n.type = is_pointer(d) && d->elem ? d->elem : type_long();
        n.kids = {e, idx};
        e = std::make_shared<const SymExpr>(std::move(n));
      } else if (is(".") || is("->")) {
        bool arrow = is("->");
        ++pos_;
        const Tok& name = next();
        if (name.kind != Tok::Ident) fail("expected field name");
        e = field(e, name.text, arrow);
      } else {
        return e;
      }
    }
  }

  SymRef primary() {
    const Tok& t = next();
    switch (t.kind) {
      case Tok::Int:
        return sym_const(static_cast<int64_t>(t.ival), literal_type(t));
      case Tok::Str:
        return sym_str(t.text);
      case Tok::Ident: {
        if (is("(")) {
          ++pos_;
          std::vector<SymRef> args;
          if (!is(")")) {
            while (true) {
              args.push_back(binary(0));
              if (!is(",")) break;
              ++pos_;
            }
          }
          expect(")");
          return make_call(t.text, std::move(args), type_long());
        }
        TypeRef vt = vt_ ? vt_(t.text) : nullptr;
        return sym_var(t.text, vt ? vt : type_long());
      }
      case Tok::Punct:
        if (t.text == "(") {
          SymRef e = binary(0);
          expect(")");
          return e;
        }
        fail("unexpected '" + t.text + "'");
      case Tok::End:
        fail("unexpected end of expression");
    }
    fail("unexpected token");
  }

  std::string src_;
  VarTypes vt_;
  const TranslationUnit* tu_;
  std::vector<Tok> toks_;
  size_t pos_ = 0;
};

// Drops (long) casts and the L suffix of constants that fit an int.
SymRef strip_widening(const SymRef& e) {
  if (e->kind == SymKind::Cast && is_int(e->type) && e->type->width == 64 && e->type->is_signed)
    return strip_widening(e->kids[0]);
  if (e->kind == SymKind::Const && is_int(e->type) && e->type->width == 64 && e->type->is_signed &&
      e->value >= INT32_MIN && e->value <= INT32_MAX)
    return sym_const(e->value, type_int());
  if (e->kids.empty()) return e;
  SymExpr c = *e;
  for (auto& k : c.kids) k = strip_widening(k);
  return retype(std::make_shared<const SymExpr>(std::move(c)));
}

}  // namespace

SymRef parse_sym(const std::string& text, const VarTypes& var_type, const TranslationUnit* tu) {
  return SymParser(text, var_type, tu).parse();
}

std::string canonical(const std::string& text) {
  auto as_int = [](const std::string&) { return type_int(); };
  return render(simplify(strip_widening(parse_sym(text, as_int))));
}

}  // namespace patchsmith
