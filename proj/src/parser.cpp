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

#include <algorithm>
#include <cctype>
#include <limits>
#include <set>

#include "patchsmith/frontend.hpp"

namespace patchsmith {

const FunctionDecl* TranslationUnit::find_function(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

const GlobalDecl* TranslationUnit::find_global(const std::string& name) const {
  for (const auto& g : globals)
    if (g.name == name) return &g;
  return nullptr;
}

namespace {

TypeRef size_type() {
  static const TypeRef t = int_type(64, false, "size_t");
  return t;
}

}  // namespace

const ExternSig* extern_signature(const std::string& name) {
  static const std::map<std::string, ExternSig> sigs = [] {
    std::map<std::string, ExternSig> m;
    TypeRef vp = pointer_to(void_type());
    TypeRef cp = pointer_to(type_char());
    m["malloc"] = {vp, {size_type()}, false};
    m["free"] = {void_type(), {vp}, false};
    m["strlen"] = {size_type(), {cp}, false};
    m["printf"] = {type_int(), {cp}, true};
    m["memcpy"] = {vp, {vp, vp, size_type()}, false};
    m["exit"] = {void_type(), {type_int()}, false};
    return m;
  }();
  auto it = sigs.find(name);
  return it == sigs.end() ? nullptr : &it->second;
}

namespace {

enum class Tok { Ident, Int, Char, String, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  uint64_t ival = 0;
  bool is_long = false;
  bool is_unsigned = false;
  std::string sval;
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(const std::string& src, const std::string& file) : src_(src), file_(file) {
    line_starts_.push_back(0);
    for (size_t i = 0; i < src_.size(); ++i)
      if (src_[i] == '\n') line_starts_.push_back(i + 1);
  }

  SourceSpan span(size_t b, size_t e) const {
    auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), b);
    size_t line = static_cast<size_t>(it - line_starts_.begin());
    SourceSpan s;
    s.begin = b;
    s.end = e;
    s.line = static_cast<int>(line);
    s.column = static_cast<int>(b - line_starts_[line - 1] + 1);
    return s;
  }

  [[noreturn]] void fail(size_t at, const std::string& msg) const {
    auto s = span(at, at);
    throw Error(file_ + ":" + std::to_string(s.line) + ":" + std::to_string(s.column) + ": " + msg);
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    size_t i = 0;
    const size_t n = src_.size();
    while (true) {
      while (i < n) {
        if (std::isspace(static_cast<unsigned char>(src_[i]))) {
          ++i;
        } else if (src_.compare(i, 2, "//") == 0) {
          while (i < n && src_[i] != '\n') ++i;
        } else if (src_.compare(i, 2, "/*") == 0) {
          size_t e = src_.find("*/", i + 2);
          if (e == std::string::npos) fail(i, "unterminated comment");
          i = e + 2;
        } else if (src_[i] == '#') {
          fail(i, "unsupported construct: preprocessor directive");
        } else {
          break;
        }
      }
      Token t;
      if (i >= n) {
        t.kind = Tok::End;
        t.span = span(n, n);
        out.push_back(t);
        return out;
      }
      size_t b = i;
      char c = src_[i];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (i < n && (std::isalnum(static_cast<unsigned char>(src_[i])) || src_[i] == '_')) ++i;
        t.kind = Tok::Ident;
        t.text = src_.substr(b, i - b);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Int;
        uint64_t v = 0;
        bool overflow = false;
        auto acc = [&](uint64_t base, uint64_t d) {
          if (v > (std::numeric_limits<uint64_t>::max() - d) / base) overflow = true;
          v = v * base + d;
        };
        if (c == '0' && i + 1 < n && (src_[i + 1] == 'x' || src_[i + 1] == 'X')) {
          i += 2;
          if (i >= n || !std::isxdigit(static_cast<unsigned char>(src_[i]))) fail(b, "malformed hex literal");
          while (i < n && std::isxdigit(static_cast<unsigned char>(src_[i]))) {
            char d = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[i])));
            acc(16, static_cast<uint64_t>(std::isdigit(static_cast<unsigned char>(d)) ? d - '0' : d - 'a' + 10));
            ++i;
          }
        } else {
          while (i < n && std::isdigit(static_cast<unsigned char>(src_[i]))) {
            acc(10, static_cast<uint64_t>(src_[i] - '0'));
            ++i;
          }
        }
        while (i < n && (src_[i] == 'u' || src_[i] == 'U' || src_[i] == 'l' || src_[i] == 'L')) {
          if (src_[i] == 'u' || src_[i] == 'U') t.is_unsigned = true;
          else t.is_long = true;
          ++i;
        }
        if (i < n && (std::isalpha(static_cast<unsigned char>(src_[i])) || src_[i] == '.')) {
          if (src_[i] == '.' || src_[i] == 'e' || src_[i] == 'E') fail(b, "unsupported construct: floating-point literal");
          fail(b, "malformed integer literal");
        }
        if (overflow) fail(b, "integer literal too large");
        t.ival = v;
        t.text = src_.substr(b, i - b);
      } else if (c == '\'') {
        ++i;
        if (i >= n || src_[i] == '\'') fail(b, "empty character literal");
        t.kind = Tok::Char;
        t.ival = static_cast<uint64_t>(static_cast<int64_t>(static_cast<signed char>(escape(i))));
        if (i >= n || src_[i] != '\'') fail(b, "unterminated character literal");
        ++i;
        t.text = src_.substr(b, i - b);
      } else if (c == '"') {
        ++i;
        t.kind = Tok::String;
        while (true) {
          if (i >= n || src_[i] == '\n') fail(b, "unterminated string literal");
          if (src_[i] == '"') {
            ++i;
            break;
          }
          t.sval.push_back(escape(i));
        }
        t.text = src_.substr(b, i - b);
      } else {
        static const char* puncts[] = {"<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=",
                                       "==",  "!=",  "&&",  "||", "+=", "-=", "*=", "/=", "%=", "&=",
                                       "|=",  "^=",  "{",   "}",  "(",  ")",  "[",  "]",  ";",  ",",
                                       ".",   "+",   "-",   "*",  "/",  "%",  "<",  ">",  "=",  "!",
                                       "~",   "&",   "|",   "^",  "?",  ":"};
        bool found = false;
        for (const char* p : puncts) {
          size_t len = std::char_traits<char>::length(p);
          if (src_.compare(i, len, p) == 0) {
            t.kind = Tok::Punct;
            t.text = p;
            i += len;
            found = true;
            break;
          }
        }
        if (!found) fail(b, std::string("unexpected character '") + c + "'");
      }
      t.span = span(b, i);
      out.push_back(std::move(t));
    }
  }

 private:
  char escape(size_t& i) {
    char c = src_[i++];
    if (c != '\\') return c;
    if (i >= src_.size()) fail(i, "bad escape");
    char e = src_[i++];
    switch (e) {
      case 'n': return '\n';
      case 't': return '\t';
      case 'r': return '\r';
      case '\\': return '\\';
      case '\'': return '\'';
      case '"': return '"';
      case 'a': return '\a';
      case 'b': return '\b';
      case 'f': return '\f';
      case 'v': return '\v';
      case 'x': {
        int v = 0, digits = 0;
        while (i < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[i])) && digits < 2) {
          char d = static_cast<char>(std::tolower(static_cast<unsigned char>(src_[i++])));
          v = v * 16 + (std::isdigit(static_cast<unsigned char>(d)) ? d - '0' : d - 'a' + 10);
          ++digits;
        }
        if (!digits) fail(i, "bad hex escape");
        return static_cast<char>(v);
      }
      default:
        if (e >= '0' && e <= '7') {
          int v = e - '0', digits = 1;
          while (i < src_.size() && digits < 3 && src_[i] >= '0' && src_[i] <= '7') {
            v = v * 8 + (src_[i++] - '0');
            ++digits;
          }
          return static_cast<char>(v);
        }
        fail(i - 2, std::string("unknown escape \\") + e);
    }
  }

  const std::string& src_;
  const std::string& file_;
  std::vector<size_t> line_starts_;
};

bool is_lvalue(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Name: return true;
    case ExprKind::Index: return true;
    case ExprKind::Member: return true;
    case ExprKind::Unary: return e.op == "*";
    default: return false;
  }
}


class Parser {
 public:
  Parser(std::string source, std::string file)
      : tu_(std::make_shared<TranslationUnit>()) {
    tu_->file = std::move(file);
    tu_->source = std::move(source);
    lexer_ = std::make_unique<Lexer>(tu_->source, tu_->file);
    toks_ = lexer_->run();
  }

  std::shared_ptr<TranslationUnit> run() {
    while (peek().kind != Tok::End) top_level();
    return tu_;
  }

 private:
  // ---- token helpers ----
  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool is(const char* p, size_t k = 0) const {
    const Token& t = peek(k);
    return (t.kind == Tok::Punct || t.kind == Tok::Ident) && t.text == p;
  }
  bool accept(const char* p) {
    if (is(p)) {
      ++pos_;
      return true;
    }
    return false;
  }
  const Token& expect(const char* p) {
    if (!is(p)) fail(peek(), std::string("expected '") + p + "'" + found(peek()));
    return next();
  }
  std::string found(const Token& t) const {
    if (t.kind == Tok::End) return " at end of input";
    return " before '" + t.text + "'";
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw Error(tu_->file + ":" + std::to_string(t.span.line) + ":" + std::to_string(t.span.column) +
                ": " + msg);
  }
  [[noreturn]] void unsupported(const Token& t, const std::string& what) const {
    fail(t, "unsupported construct: " + what);
  }
  SourceSpan span_from(const SourceSpan& b) const {
    SourceSpan s = b;
    s.end = toks_[pos_ == 0 ? 0 : pos_ - 1].span.end;
    return s;
  }

  // ---- types ----
  bool is_type_start(size_t k = 0) const {
    const Token& t = peek(k);
    if (t.kind != Tok::Ident) return false;
    static const std::set<std::string> kw = {"int",    "char",   "short",  "long",   "unsigned",
                                             "signed", "void",   "struct", "const",  "static",
                                             "extern", "float",  "double", "union",  "enum",
                                             "volatile", "typedef"};
    return kw.count(t.text) || fixed_width_type(t.text).has_value();
  }

  TypeRef base_type() {
    const Token& start = peek();
    bool is_unsigned = false, is_signed = false;
    int shorts = 0, longs = 0, chars = 0, ints = 0;
    TypeRef result;
    std::string spelling;
    while (true) {
      const Token& t = peek();
      if (t.kind != Tok::Ident) break;
      const std::string& w = t.text;
      if (w == "const" || w == "volatile" || w == "static" || w == "extern") {
        next();
        continue;
      }
      if (w == "typedef") unsupported(t, "typedef");
      if (w == "float" || w == "double") unsupported(t, "floating-point type");
      if (w == "union") unsupported(t, "union");
      if (w == "enum") unsupported(t, "enum");
      if (w == "unsigned") { is_unsigned = true; spelling += spelling.empty() ? w : " " + w; next(); continue; }
      if (w == "signed") { is_signed = true; spelling += spelling.empty() ? w : " " + w; next(); continue; }
      if (w == "short") { ++shorts; spelling += spelling.empty() ? w : " " + w; next(); continue; }
      if (w == "long") { ++longs; spelling += spelling.empty() ? w : " " + w; next(); continue; }
      if (w == "char") { ++chars; spelling += spelling.empty() ? w : " " + w; next(); continue; }
      if (w == "int") { ++ints; spelling += spelling.empty() ? w : " " + w; next(); continue; }
      if (result || is_unsigned || is_signed || shorts || longs || chars || ints) break;
      if (w == "void") {
        next();
        result = void_type();
        continue;
      }
      if (w == "struct") {
        next();
        const Token& name = next();
        if (name.kind != Tok::Ident) fail(name, "expected struct name");
        result = struct_type(struct_def(name.text));
        continue;
      }
      if (auto fw = fixed_width_type(w)) {
        next();
        result = *fw;
        continue;
      }
      break;
    }
    if (result) return result;
    if (!(is_unsigned || is_signed || shorts || longs || chars || ints)) fail(start, "expected type");
    int width = 32;
    if (chars) width = 8;
    else if (shorts) width = 16;
    else if (longs) width = 64;
    return int_type(width, !is_unsigned, spelling);
  }

  std::shared_ptr<StructDef> struct_def(const std::string& name) {
    auto& slot = tu_->structs[name];
    if (!slot) {
      slot = std::make_shared<StructDef>();
      slot->name = name;
    }
    return slot;
  }

  // Parses `* ... name [N]...` and returns (name token, full type).
  std::pair<Token, TypeRef> declarator(TypeRef base, bool allow_abstract = false) {
    TypeRef t = std::move(base);
    while (accept("*")) {
      while (accept("const") || accept("volatile")) {
      }
      t = pointer_to(t);
    }
    Token name;
    if (peek().kind == Tok::Ident && !is_type_start()) {
      name = next();
    } else if (!allow_abstract) {
      if (is("(")) unsupported(peek(), "function pointer");
      fail(peek(), "expected identifier" + found(peek()));
    }
    std::vector<uint64_t> dims;
    while (accept("[")) {
      const Token& n = next();
      if (n.kind != Tok::Int) fail(n, "array length must be an integer constant");
      if (n.ival == 0) fail(n, "array length must be positive");
      dims.push_back(n.ival);
      expect("]");
    }
    for (size_t i = dims.size(); i-- > 0;) t = array_of(t, dims[i]);
    return {name, t};
  }

  // ---- top level ----
  void top_level() {
    const Token& start = peek();
    if (is("struct") && peek(1).kind == Tok::Ident && is("{", 2)) {
      struct_definition();
      return;
    }
    TypeRef base = base_type();
    if (accept(";")) return;  // bare `struct X;`
    auto [name, type] = declarator(base);
    if (is("(")) {
      function(start, name, type);
      return;
    }
    global(start, name, type);
    while (accept(",")) {
      auto [n2, t2] = declarator(base);
      global(start, n2, t2);
    }
    expect(";");
  }

  void struct_definition() {
    next();
    const Token& name = next();
    auto def = struct_def(name.text);
    if (def->complete) fail(name, "redefinition of struct " + name.text);
    expect("{");
    std::set<std::string> seen;
    while (!accept("}")) {
      TypeRef base = base_type();
      do {
        auto [fname, ftype] = declarator(base);
        if (is_struct(ftype) && !ftype->def->complete) fail(fname, "field has incomplete type");
        if (is_void(ftype)) fail(fname, "field has void type");
        if (!seen.insert(fname.text).second) fail(fname, "duplicate field " + fname.text);
        def->fields.push_back({fname.text, ftype, 0});
      } while (accept(","));
      expect(";");
    }
    expect(";");
    if (def->fields.empty()) fail(name, "empty struct");
    layout_struct(*def);
  }

  void global(const Token& start, const Token& name, const TypeRef& type) {
    if (is_void(type)) fail(name, "variable has void type");
    if (tu_->find_global(name.text) || tu_->find_function(name.text))
      fail(name, "redefinition of " + name.text);
    GlobalDecl g;
    g.name = name.text;
    g.type = type;
    if (accept("=")) {
      if (!is_scalar(type)) unsupported(name, "aggregate initializer");
      g.init = assignment();
    }
    g.span = span_from(start.span);
    tu_->globals.push_back(std::move(g));
  }

  void function(const Token& start, const Token& name, const TypeRef& ret) {
    if (is_array(ret)) fail(name, "function returning array");
    if (is_struct(ret)) unsupported(name, "struct return value");
    const Token& open = expect("(");
    FunctionDecl f;
    f.name = name.text;
    f.ret = ret;
    f.ret_span = lexer_->span(start.span.begin, name.span.begin);
    // trim trailing whitespace of the return type text
    while (f.ret_span.end > f.ret_span.begin &&
           std::isspace(static_cast<unsigned char>(tu_->source[f.ret_span.end - 1])))
      --f.ret_span.end;
    size_t params_begin = open.span.end;
    if (is("void") && is(")", 1)) {
      next();
    } else if (!is(")")) {
      do {
        if (is("...")) unsupported(peek(), "variadic function");
        const Token& pstart = peek();
        TypeRef base = base_type();
        auto [pname, ptype] = declarator(base);
        if (is_array(ptype)) ptype = pointer_to(ptype->elem);
        if (is_struct(ptype)) unsupported(pname, "struct parameter passed by value");
        for (const auto& p : f.params)
          if (p.name == pname.text) fail(pname, "duplicate parameter " + pname.text);
        f.params.push_back({pname.text, ptype, span_from(pstart.span)});
      } while (accept(","));
    }
    const Token& close = expect(")");
    f.params_span = lexer_->span(params_begin, close.span.begin);
    if (accept(";")) {
      return;  // prototypes are ignored
    }
    if (tu_->find_function(f.name)) fail(name, "redefinition of function " + f.name);
    if (tu_->find_global(f.name)) fail(name, "redefinition of " + f.name);
    func_ = f.name;
    f.body = block();
    f.span = span_from(start.span);
    tu_->functions.push_back(std::move(f));
  }

  // ---- statements ----
  StmtPtr make_stmt(StmtKind k, const Token& start) {
    auto s = std::make_shared<Stmt>();
    s->kind = k;
    s->func = func_;
    s->span = start.span;
    return s;
  }

  StmtPtr block() {
    const Token& open = expect("{");
    auto s = make_stmt(StmtKind::Block, open);
    while (!accept("}")) {
      if (peek().kind == Tok::End) fail(peek(), "expected '}' at end of input");
      s->body.push_back(statement());
    }
    s->span = span_from(open.span);
    return s;
  }

  StmtPtr statement() {
    const Token& t = peek();
    if (t.kind == Tok::Ident) {
      const std::string& w = t.text;
      if (w == "switch" || w == "case" || w == "default") unsupported(t, "switch");
      if (w == "do") unsupported(t, "do-while loop");
      if (w == "if") return if_stmt();
      if (w == "while") return while_stmt();
      if (w == "for") return for_stmt();
      if (w == "goto") {
        next();
        auto s = make_stmt(StmtKind::Goto, t);
        const Token& l = next();
        if (l.kind != Tok::Ident) fail(l, "expected label");
        s->label = l.text;
        expect(";");
        s->span = span_from(t.span);
        return s;
      }
      if (w == "return") {
        next();
        auto s = make_stmt(StmtKind::Return, t);
        if (!is(";")) s->expr = expression();
        expect(";");
        s->span = span_from(t.span);
        return s;
      }
      if (w == "break" || w == "continue") {
        next();
        auto s = make_stmt(w == "break" ? StmtKind::Break : StmtKind::Continue, t);
        expect(";");
        s->span = span_from(t.span);
        return s;
      }
      if (is(":", 1)) {
        next();
        next();
        auto s = make_stmt(StmtKind::Label, t);
        s->label = t.text;
        if (is("}")) fail(peek(), "label at end of compound statement");
        s->then_stmt = statement();
        s->span = span_from(t.span);
        return s;
      }
      if (is_type_start()) {
        auto s = declaration();
        expect(";");
        s->span = span_from(t.span);
        return s;
      }
    }
    if (is("{")) return block();
    if (accept(";")) {
      auto s = make_stmt(StmtKind::Empty, t);
      return s;
    }
    auto s = make_stmt(StmtKind::ExprStmt, t);
    s->expr = expression();
    expect(";");
    s->span = span_from(t.span);
    return s;
  }

  StmtPtr declaration() {
    const Token& t = peek();
    auto s = make_stmt(StmtKind::Decl, t);
    TypeRef base = base_type();
    do {
      const Token& dstart = peek();
      auto [name, type] = declarator(base);
      if (is_void(type)) fail(name, "variable has void type");
      VarDecl d;
      d.name = name.text;
      d.type = type;
      if (accept("=")) {
        if (is("{")) unsupported(peek(), "initializer list");
        if (!is_scalar(type)) unsupported(name, "aggregate initializer");
        d.init = assignment();
      }
      d.span = span_from(dstart.span);
      s->decls.push_back(std::move(d));
    } while (accept(","));
    return s;
  }

  StmtPtr if_stmt() {
    const Token& t = next();
    auto s = make_stmt(StmtKind::If, t);
    expect("(");
    s->expr = expression();
    expect(")");
    s->then_stmt = statement();
    if (accept("else")) s->else_stmt = statement();
    s->span = span_from(t.span);
    return s;
  }

  StmtPtr while_stmt() {
    const Token& t = next();
    auto s = make_stmt(StmtKind::While, t);
    expect("(");
    s->expr = expression();
    expect(")");
    s->then_stmt = statement();
    s->span = span_from(t.span);
    return s;
  }

  StmtPtr for_stmt() {
    const Token& t = next();
    auto s = make_stmt(StmtKind::For, t);
    expect("(");
    if (!is(";")) {
      const Token& is_ = peek();
      if (is_type_start()) {
        s->init = declaration();
      } else {
        s->init = make_stmt(StmtKind::ExprStmt, is_);
        s->init->expr = expression();
      }
      s->init->span = span_from(is_.span);
    }
    expect(";");
    if (!is(";")) s->expr = expression();
    expect(";");
    if (!is(")")) s->step = expression();
    expect(")");
    s->then_stmt = statement();
    s->span = span_from(t.span);
    return s;
  }

  // ---- expressions ----
  ExprPtr make(ExprKind k, const SourceSpan& span) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->span = span;
    return e;
  }

  ExprPtr expression() {
    auto e = assignment();
    if (is(",")) unsupported(peek(), "comma operator");
    return e;
  }

  ExprPtr assignment() {
    const Token& start = peek();
    auto lhs = binary(0);
    if (is("?")) unsupported(peek(), "conditional operator");
    static const std::set<std::string> ops = {"=", "+=", "-=", "*=", "/=", "%=",
                                              "<<=", ">>=", "&=", "|=", "^="};
    if (peek().kind == Tok::Punct && ops.count(peek().text)) {
      std::string op = next().text;
      auto rhs = assignment();
      auto e = make(ExprKind::Assign, start.span);
      e->op = op;
      e->kids = {lhs, rhs};
      e->span = span_from(start.span);
      return e;
    }
    return lhs;
  }

  static int precedence(const std::string& op) {
    static const std::map<std::string, int> p = {
        {"||", 1}, {"&&", 2}, {"|", 3},  {"^", 4},  {"&", 5},  {"==", 6}, {"!=", 6},
        {"<", 7},  {">", 7},  {"<=", 7}, {">=", 7}, {"<<", 8}, {">>", 8}, {"+", 9},
        {"-", 9},  {"*", 10}, {"/", 10}, {"%", 10}};
    auto it = p.find(op);
    return it == p.end() ? -1 : it->second;
  }

  ExprPtr binary(int min_prec) {
    const Token& start = peek();
    auto lhs = unary();
    while (true) {
      const Token& t = peek();
      if (t.kind != Tok::Punct) break;
      int prec = precedence(t.text);
      if (prec < 0 || prec <= min_prec) break;
      std::string op = next().text;
      auto rhs = binary(prec);
      auto e = make(ExprKind::Binary, start.span);
      e->op = op;
      e->kids = {lhs, rhs};
      e->span = span_from(start.span);
      lhs = e;
    }
    return lhs;
  }

  ExprPtr unary() {
    const Token& t = peek();
    if (t.kind == Tok::Punct) {
      if (t.text == "++" || t.text == "--") {
        next();
        auto operand = unary();
        auto e = make(ExprKind::IncDec, t.span);
        e->op = t.text;
        e->prefix = true;
        e->kids = {operand};
        e->span = span_from(t.span);
        return e;
      }
      if (t.text == "-" || t.text == "+" || t.text == "!" || t.text == "~" || t.text == "*" ||
          t.text == "&") {
        next();
        auto operand = unary();
        auto e = make(ExprKind::Unary, t.span);
        e->op = t.text;
        e->kids = {operand};
        e->span = span_from(t.span);
        return e;
      }
      if (t.text == "(" && is_type_start(1)) {
        next();
        TypeRef base = base_type();
        auto [unused, type] = declarator(base, true);
        expect(")");
        if (is("{")) unsupported(peek(), "compound literal");
        auto operand = unary();
        auto e = make(ExprKind::Cast, t.span);
        e->cast_type = type;
        e->kids = {operand};
        e->span = span_from(t.span);
        return e;
      }
    }
    if (t.kind == Tok::Ident && t.text == "sizeof") {
      next();
      uint64_t size = 0;
      if (is("(") && is_type_start(1)) {
        next();
        TypeRef base = base_type();
        auto [unused, type] = declarator(base, true);
        expect(")");
        size = size_of(type);
        if (is_struct(type) && !type->def->complete) fail(t, "sizeof incomplete struct");
      } else {
        auto operand = unary();
        auto e = make(ExprKind::IntLit, t.span);
        e->span = span_from(t.span);
        e->op = "sizeof";
        e->kids = {operand};
        e->type = size_type();
        return e;
      }
      auto e = make(ExprKind::IntLit, t.span);
      e->value = static_cast<int64_t>(size);
      e->type = size_type();
      e->span = span_from(t.span);
      return e;
    }
    return postfix();
  }

  ExprPtr postfix() {
    const Token& start = peek();
    auto e = primary();
    while (true) {
      if (is("[")) {
        next();
        auto idx = expression();
        expect("]");
        auto n = make(ExprKind::Index, start.span);
        n->kids = {e, idx};
        n->span = span_from(start.span);
        e = n;
      } else if (is("(")) {
        if (e->kind != ExprKind::Name) unsupported(peek(), "indirect call");
        next();
        auto n = make(ExprKind::Call, start.span);
        n->name = e->name;
        if (!is(")")) {
          do {
            n->kids.push_back(assignment());
          } while (accept(","));
        }
        expect(")");
        n->span = span_from(start.span);
        e = n;
      } else if (is(".") || is("->")) {
        bool arrow = next().text == "->";
        const Token& f = next();
        if (f.kind != Tok::Ident) fail(f, "expected field name");
        auto n = make(ExprKind::Member, start.span);
        n->name = f.text;
        n->arrow = arrow;
        n->kids = {e};
        n->span = span_from(start.span);
        e = n;
      } else if (is("++") || is("--")) {
        auto n = make(ExprKind::IncDec, start.span);
        n->op = next().text;
        n->prefix = false;
        n->kids = {e};
        n->span = span_from(start.span);
        e = n;
      } else {
        break;
      }
    }
    return e;
  }

  ExprPtr primary() {
    const Token& t = next();
    switch (t.kind) {
      case Tok::Int: {
        auto e = make(ExprKind::IntLit, t.span);
        bool fits_int = t.ival <= static_cast<uint64_t>(std::numeric_limits<int32_t>::max());
        bool fits_uint = t.ival <= std::numeric_limits<uint32_t>::max();
        if (t.is_long || (!fits_int && !(t.is_unsigned && fits_uint)))
          e->type = int_type(64, !(t.is_unsigned || t.ival > static_cast<uint64_t>(std::numeric_limits<int64_t>::max())));
        else
          e->type = int_type(32, !t.is_unsigned);
        e->value = static_cast<int64_t>(t.ival);
        return e;
      }
      case Tok::Char: {
        auto e = make(ExprKind::IntLit, t.span);
        e->type = type_int();
        e->value = static_cast<int64_t>(t.ival);
        return e;
      }
      case Tok::String: {
        auto e = make(ExprKind::StrLit, t.span);
        e->str = t.sval;
        while (peek().kind == Tok::String) e->str += next().sval;
        e->span = span_from(t.span);
        e->type = pointer_to(type_char());
        return e;
      }
      case Tok::Ident: {
        if (t.text == "NULL") {
          auto e = make(ExprKind::IntLit, t.span);
          e->type = pointer_to(void_type());
          e->value = 0;
          return e;
        }
        auto e = make(ExprKind::Name, t.span);
        e->name = t.text;
        return e;
      }
      case Tok::Punct:
        if (t.text == "(") {
          auto e = expression();
          expect(")");
          // keep the inner node but widen the span to include the parentheses
          auto wrapped = std::make_shared<Expr>(*e);
          wrapped->span = span_from(t.span);
          return wrapped;
        }
        break;
      case Tok::End:
        fail(t, "unexpected end of input");
    }
    fail(t, "expected expression" + found(t));
  }

  std::shared_ptr<TranslationUnit> tu_;
  std::unique_ptr<Lexer> lexer_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::string func_;
};

// ---- semantic analysis: name resolution and expression types ----

class Sema {
 public:
  explicit Sema(TranslationUnit& tu) : tu_(tu) {}

  void run() {
    for (auto& g : tu_.globals) {
      if (g.init) {
        check_expr(g.init);
        if (g.init->kind != ExprKind::IntLit && g.init->kind != ExprKind::StrLit &&
            !(g.init->kind == ExprKind::Unary && g.init->op == "-" &&
              g.init->kids[0]->kind == ExprKind::IntLit))
          err(g.init->span, "global initializer must be a constant");
      }
    }
    int next_id = 0;
    for (auto& f : tu_.functions) {
      fn_ = &f;
      declared_.clear();
      labels_.clear();
      gotos_.clear();
      for (const auto& p : f.params) declared_[p.name] = p.type;
      number(f.body, -1, next_id);
      check_stmt(f.body);
      for (const auto& [label, span] : gotos_)
        if (!labels_.count(label)) err(span, "undefined label " + label);
    }
  }

 private:
  [[noreturn]] void err(const SourceSpan& s, const std::string& msg) const {
    throw Error(tu_.file + ":" + std::to_string(s.line) + ":" + std::to_string(s.column) + ": " + msg);
  }

  void number(const StmtPtr& s, int parent, int& next_id) {
    if (!s) return;
    s->id = next_id++;
    s->parent = parent;
    tu_.stmts.push_back(s.get());
    number(s->init, s->id, next_id);
    number(s->then_stmt, s->id, next_id);
    number(s->else_stmt, s->id, next_id);
    for (const auto& b : s->body) number(b, s->id, next_id);
  }

  void declare(const VarDecl& d) {
    for (const auto& p : fn_->params)
      if (p.name == d.name) err(d.span, "unsupported construct: shadowed variable " + d.name);
    auto it = fn_->locals.find(d.name);
    if (it != fn_->locals.end()) {
      if (!same_type(it->second, d.type))
        err(d.span, "unsupported construct: shadowed variable " + d.name);
    } else {
      if (tu_.find_global(d.name)) err(d.span, "unsupported construct: shadowed variable " + d.name);
      fn_->locals[d.name] = d.type;
    }
    declared_[d.name] = d.type;
  }

  void check_stmt(const StmtPtr& s) {
    if (!s) return;
    switch (s->kind) {
      case StmtKind::Decl:
        for (auto& d : s->decls) {
          if (is_struct(d.type) && !d.type->def->complete) err(d.span, "variable has incomplete type");
          if (d.init) {
            check_expr(d.init);
            check_assignable(d.type, d.init, d.span);
          }
          declare(d);
        }
        break;
      case StmtKind::ExprStmt:
        check_expr(s->expr);
        break;
      case StmtKind::If:
        check_cond(s->expr);
        check_stmt(s->then_stmt);
        check_stmt(s->else_stmt);
        break;
      case StmtKind::While:
        check_cond(s->expr);
        check_stmt(s->then_stmt);
        break;
      case StmtKind::For:
        check_stmt(s->init);
        if (s->expr) check_cond(s->expr);
        if (s->step) check_expr(s->step);
        check_stmt(s->then_stmt);
        break;
      case StmtKind::Goto:
        gotos_.emplace_back(s->label, s->span);
        break;
      case StmtKind::Label:
        if (!labels_.insert(s->label).second) err(s->span, "duplicate label " + s->label);
        check_stmt(s->then_stmt);
        break;
      case StmtKind::Return:
        if (s->expr) {
          check_expr(s->expr);
          if (is_void(fn_->ret)) err(s->span, "void function returns a value");
          check_assignable(fn_->ret, s->expr, s->span);
        }
        break;
      case StmtKind::Block:
        for (auto& b : s->body) check_stmt(b);
        break;
      case StmtKind::Break:
      case StmtKind::Continue:
      case StmtKind::Empty:
        break;
    }
  }

  void check_cond(const ExprPtr& e) {
    check_expr(e);
    if (!is_scalar(decay(e->type))) err(e->span, "condition is not scalar");
  }

  void check_assignable(const TypeRef& dst, const ExprPtr& src, const SourceSpan& at) {
    TypeRef s = decay(src->type);
    if (is_int(dst) && is_int(s)) return;
    if (is_pointer(dst) && is_pointer(s)) return;
    if (is_pointer(dst) && is_int(s) && src->kind == ExprKind::IntLit && src->value == 0) return;
    if (is_pointer(dst) && is_int(s)) return;  // C allows with a warning
    if (is_int(dst) && is_pointer(s)) err(at, "assigning pointer to integer");
    err(at, "incompatible types: cannot assign " + type_name(s) + " to " + type_name(dst));
  }

  void check_expr(const ExprPtr& e) {
    switch (e->kind) {
      case ExprKind::IntLit:
        if (e->op == "sizeof") {
          check_expr(e->kids[0]);
          e->value = static_cast<int64_t>(size_of(e->kids[0]->type));
          e->kids.clear();
        }
        return;
      case ExprKind::StrLit:
        return;
      case ExprKind::Name: {
        auto it = declared_.find(e->name);
        if (it != declared_.end()) {
          e->type = it->second;
          bool is_param = false;
          for (const auto& p : fn_->params)
            if (p.name == e->name) is_param = true;
          e->scope = is_param ? VarScope::Param : VarScope::Local;
          return;
        }
        if (auto g = tu_.find_global(e->name)) {
          e->type = g->type;
          e->scope = VarScope::Global;
          return;
        }
        err(e->span, "undeclared identifier " + e->name);
      }
      case ExprKind::Unary: {
        check_expr(e->kids[0]);
        TypeRef t = decay(e->kids[0]->type);
        if (e->op == "*") {
          if (!is_pointer(t)) err(e->span, "dereference of non-pointer");
          if (is_void(t->elem)) err(e->span, "dereference of void pointer");
          e->type = t->elem;
        } else if (e->op == "&") {
          if (!is_lvalue(*e->kids[0])) err(e->span, "address of non-lvalue");
          e->type = pointer_to(e->kids[0]->type);
        } else if (e->op == "!") {
          if (!is_scalar(t)) err(e->span, "invalid operand to !");
          e->type = type_int();
        } else {
          if (!is_int(t)) err(e->span, "invalid operand to unary " + e->op);
          e->type = promote(t);
        }
        return;
      }
      case ExprKind::IncDec: {
        check_expr(e->kids[0]);
        if (!is_lvalue(*e->kids[0]) || !is_scalar(e->kids[0]->type))
          err(e->span, "invalid operand to " + e->op);
        e->type = e->kids[0]->type;
        return;
      }
      case ExprKind::Binary: {
        check_expr(e->kids[0]);
        check_expr(e->kids[1]);
        TypeRef a = decay(e->kids[0]->type), b = decay(e->kids[1]->type);
        const std::string& op = e->op;
        if (op == "&&" || op == "||") {
          if (!is_scalar(a) || !is_scalar(b)) err(e->span, "invalid operands to " + op);
          e->type = type_int();
        } else if (op == "==" || op == "!=" || op == "<" || op == ">" || op == "<=" || op == ">=") {
          bool ok = (is_int(a) && is_int(b)) || (is_pointer(a) && is_pointer(b)) ||
                    (is_pointer(a) && is_int(b)) || (is_int(a) && is_pointer(b));
          if (!ok) err(e->span, "invalid operands to " + op);
          e->type = type_int();
        } else if (op == "+") {
          if (is_pointer(a) && is_int(b)) e->type = a;
          else if (is_int(a) && is_pointer(b)) e->type = b;
          else if (is_int(a) && is_int(b)) e->type = common_type(a, b);
          else err(e->span, "invalid operands to +");
          if (is_pointer(e->type) && is_void(e->type->elem)) err(e->span, "arithmetic on void pointer");
        } else if (op == "-") {
          if (is_pointer(a) && is_int(b)) e->type = a;
          else if (is_pointer(a) && is_pointer(b)) e->type = type_long();
          else if (is_int(a) && is_int(b)) e->type = common_type(a, b);
          else err(e->span, "invalid operands to -");
          if (is_pointer(a) && is_void(a->elem)) err(e->span, "arithmetic on void pointer");
        } else if (op == "<<" || op == ">>") {
          if (!is_int(a) || !is_int(b)) err(e->span, "invalid operands to " + op);
          e->type = promote(a);
        } else {
          if (!is_int(a) || !is_int(b)) err(e->span, "invalid operands to " + op);
          e->type = common_type(a, b);
        }
        return;
      }
      case ExprKind::Assign: {
        check_expr(e->kids[0]);
        check_expr(e->kids[1]);
        const auto& lhs = e->kids[0];
        if (!is_lvalue(*lhs)) err(e->span, "assignment to non-lvalue");
        if (!is_scalar(lhs->type)) err(e->span, "unsupported construct: aggregate assignment");
        if (e->op == "=") {
          check_assignable(lhs->type, e->kids[1], e->span);
        } else {
          TypeRef b = decay(e->kids[1]->type);
          if (is_pointer(lhs->type)) {
            if (!(e->op == "+=" || e->op == "-=") || !is_int(b))
              err(e->span, "invalid compound assignment to pointer");
          } else if (!is_int(b)) {
            err(e->span, "invalid operands to " + e->op);
          }
        }
        e->type = lhs->type;
        return;
      }
      case ExprKind::Call: {
        for (auto& k : e->kids) check_expr(k);
        if (declared_.count(e->name) || tu_.find_global(e->name))
          err(e->span, "unsupported construct: indirect call");
        if (auto f = tu_.find_function(e->name)) {
          if (f->params.size() != e->kids.size())
            err(e->span, "wrong number of arguments to " + e->name);
          for (size_t i = 0; i < e->kids.size(); ++i)
            check_assignable(f->params[i].type, e->kids[i], e->kids[i]->span);
          e->type = f->ret;
          return;
        }
        if (auto sig = extern_signature(e->name)) {
          if (e->kids.size() < sig->params.size() || (!sig->variadic && e->kids.size() != sig->params.size()))
            err(e->span, "wrong number of arguments to " + e->name);
          e->type = sig->ret;
          return;
        }
        e->type = type_int();  // unresolved; reported by validation
        return;
      }
      case ExprKind::Cast: {
        check_expr(e->kids[0]);
        TypeRef s = decay(e->kids[0]->type);
        if (!is_scalar(e->cast_type) && !is_void(e->cast_type))
          err(e->span, "unsupported construct: cast to " + type_name(e->cast_type));
        if (!is_scalar(s)) err(e->span, "cast of non-scalar value");
        if (is_void(e->cast_type)) err(e->span, "unsupported construct: cast to void");
        e->type = e->cast_type;
        return;
      }
      case ExprKind::Index: {
        check_expr(e->kids[0]);
        check_expr(e->kids[1]);
        TypeRef b = decay(e->kids[0]->type);
        if (!is_pointer(b)) err(e->span, "subscript of non-pointer");
        if (!is_int(decay(e->kids[1]->type))) err(e->span, "array index is not an integer");
        if (is_void(b->elem)) err(e->span, "subscript of void pointer");
        e->type = b->elem;
        return;
      }
      case ExprKind::Member: {
        check_expr(e->kids[0]);
        TypeRef b = e->kids[0]->type;
        if (e->arrow) {
          b = decay(b);
          if (!is_pointer(b) || !is_struct(b->elem)) err(e->span, "-> on non-struct pointer");
          b = b->elem;
        } else if (!is_struct(b)) {
          err(e->span, ". on non-struct");
        }
        if (!b->def->complete) err(e->span, "member access into incomplete struct");
        const Field* f = b->def->find(e->name);
        if (!f) err(e->span, "no field " + e->name + " in struct " + b->def->name);
        e->type = f->type;
        return;
      }
    }
  }

  TranslationUnit& tu_;
  FunctionDecl* fn_ = nullptr;
  std::map<std::string, TypeRef> declared_;
  std::set<std::string> labels_;
  std::vector<std::pair<std::string, SourceSpan>> gotos_;
};

}  // namespace

std::shared_ptr<TranslationUnit> parse_unit(std::string source, std::string file) {
  Parser parser(std::move(source), std::move(file));
  auto tu = parser.run();
  Sema(*tu).run();
  return tu;
}

}  // namespace patchsmith
