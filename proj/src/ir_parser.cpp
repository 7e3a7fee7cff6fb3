#include "authmine/ir.hpp"

#include <cctype>
#include <sstream>

namespace authmine::ir {

ParseError::ParseError(std::string file, SourcePos pos, const std::string& message)
    : std::runtime_error(file + ":" + std::to_string(pos.line) + ":" + std::to_string(pos.col) +
                         ": " + message),
      file_(std::move(file)),
      pos_(pos) {}

namespace {

enum class Tok {
  Ident,     // identifiers, possibly dotted/qualified, may contain $ and .
  Int,
  Str,
  Punct,     // single punctuation or multi-char operator
  Newline,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  long long int_value = 0;
  SourcePos pos;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::string file) : src_(src), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      Token t = next();
      // collapse runs of newlines
      if (t.kind == Tok::Newline && !out.empty() && out.back().kind == Tok::Newline) continue;
      out.push_back(t);
      if (t.kind == Tok::End) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(file_, pos(), msg); }

  SourcePos pos() const { return {line_, int(i_ - line_start_) + 1}; }

  char peek(std::size_t off = 0) const {
    return i_ + off < src_.size() ? src_[i_ + off] : '\0';
  }

  void advance() {
    if (peek() == '\n') {
      ++line_;
      line_start_ = i_ + 1;
    }
    ++i_;
  }

  static bool ident_start(char c) { return std::isalpha(unsigned(c)) || c == '_' || c == '$'; }
  static bool ident_char(char c) {
    return std::isalnum(unsigned(c)) || c == '_' || c == '$' || c == '.';
  }

  Token next() {
    // skip horizontal whitespace and comments
    while (true) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (peek() != '\n' && peek() != '\0') advance();
      } else {
        break;
      }
    }
    Token t;
    t.pos = pos();
    char c = peek();
    if (c == '\0') {
      t.kind = Tok::End;
      return t;
    }
    if (c == '\n') {
      advance();
      t.kind = Tok::Newline;
      t.text = "\\n";
      return t;
    }
    if (std::isdigit(unsigned(c)) || (c == '-' && std::isdigit(unsigned(peek(1))))) {
      t.kind = Tok::Int;
      std::string digits;
      if (c == '-') {
        digits.push_back(c);
        advance();
      }
      while (std::isdigit(unsigned(peek()))) {
        digits.push_back(peek());
        advance();
      }
      t.text = digits;
      t.int_value = std::stoll(digits);
      return t;
    }
    if (c == '"') {
      advance();
      std::string s;
      while (true) {
        char d = peek();
        if (d == '\0' || d == '\n') fail("unterminated string literal");
        if (d == '"') {
          advance();
          break;
        }
        if (d == '\\') {
          advance();
          char e = peek();
          switch (e) {
            case 'n': s.push_back('\n'); break;
            case 't': s.push_back('\t'); break;
            case '\\': s.push_back('\\'); break;
            case '"': s.push_back('"'); break;
            default: fail("unknown escape in string literal");
          }
          advance();
          continue;
        }
        s.push_back(d);
        advance();
      }
      t.kind = Tok::Str;
      t.text = std::move(s);
      return t;
    }
    if (ident_start(c)) {
      std::string s;
      while (ident_char(peek())) {
        s.push_back(peek());
        advance();
      }
      t.kind = Tok::Ident;
      t.text = std::move(s);
      return t;
    }
    // operators, longest match first
    static const char* two_char[] = {"==", "!=", "<=", ">=", "<<", ">>", "->"};
    for (const char* op : two_char) {
      if (c == op[0] && peek(1) == op[1]) {
        advance();
        advance();
        t.kind = Tok::Punct;
        t.text = op;
        return t;
      }
    }
    static const std::string single = "{}()[],:=<>+-*/%&|^!";
    if (single.find(c) != std::string::npos) {
      advance();
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      return t;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::string_view src_;
  std::string file_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::size_t line_start_ = 0;
};

bool is_cmp_op(const std::string& s) {
  return s == "==" || s == "!=" || s == "<" || s == "<=" || s == ">" || s == ">=";
}

bool is_bin_op(const std::string& s) {
  return is_cmp_op(s) || s == "+" || s == "-" || s == "*" || s == "/" || s == "%" || s == "&" ||
         s == "|" || s == "^" || s == "<<" || s == ">>";
}

class Parser {
 public:
  Parser(std::vector<Token> toks, std::string file)
      : toks_(std::move(toks)), file_(std::move(file)) {}

  Program run(bool resolve_types) {
    Program program;
    skip_newlines();
    while (!at_end()) {
      program.classes.push_back(parse_class());
      skip_newlines();
    }
    validate(program);
    program.build_indexes();
    if (resolve_types) validate_type_resolution(program);
    return program;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(file_, cur().pos, msg); }
  [[noreturn]] void fail_at(SourcePos p, const std::string& msg) {
    throw ParseError(file_, p, msg);
  }

  const Token& cur() const { return toks_[i_]; }
  bool at_end() const { return cur().kind == Tok::End; }
  void advance() {
    if (!at_end()) ++i_;
  }

  bool is_punct(const std::string& p) const { return cur().kind == Tok::Punct && cur().text == p; }
  bool is_ident(const std::string& s) const { return cur().kind == Tok::Ident && cur().text == s; }

  void expect_punct(const std::string& p) {
    if (!is_punct(p)) fail("expected '" + p + "'");
    advance();
  }

  std::string expect_ident(const std::string& what) {
    if (cur().kind != Tok::Ident) fail("expected " + what);
    std::string s = cur().text;
    advance();
    return s;
  }

  void expect_newline() {
    if (cur().kind == Tok::End) return;
    if (cur().kind != Tok::Newline) fail("expected end of line");
    advance();
  }

  void skip_newlines() {
    while (cur().kind == Tok::Newline) advance();
  }

  std::string parse_type() {
    std::string t = expect_ident("type name");
    while (is_punct("[")) {
      advance();
      expect_punct("]");
      t += "[]";
    }
    return t;
  }

  ClassDecl parse_class() {
    ClassDecl cls;
    SourcePos start = cur().pos;
    cls.pos = start;
    std::string kw = expect_ident("'class' or 'interface'");
    if (kw == "interface") {
      cls.is_interface = true;
    } else if (kw != "class") {
      fail_at(start, "expected 'class' or 'interface'");
    }
    cls.name = expect_ident("class name");
    cls.source_file = file_;
    if (is_ident("extends")) {
      advance();
      cls.superclass = expect_ident("superclass name");
    }
    if (is_ident("implements")) {
      advance();
      cls.interfaces.push_back(expect_ident("interface name"));
      while (is_punct(",")) {
        advance();
        cls.interfaces.push_back(expect_ident("interface name"));
      }
    }
    if (is_ident("external")) {
      advance();
      cls.external = true;
    }
    expect_punct("{");
    expect_newline();
    skip_newlines();
    while (!is_punct("}")) {
      if (is_ident("field")) {
        advance();
        FieldDecl f;
        f.name = expect_ident("field name");
        expect_punct(":");
        f.type = parse_type();
        expect_newline();
        cls.fields.push_back(std::move(f));
      } else if (is_ident("method")) {
        cls.methods.push_back(parse_method(cls));
      } else {
        fail("expected 'field', 'method' or '}'");
      }
      skip_newlines();
    }
    expect_punct("}");
    if (cur().kind == Tok::Newline) advance();
    return cls;
  }

  MethodDecl parse_method(const ClassDecl& cls) {
    MethodDecl m;
    m.pos = cur().pos;
    advance();  // 'method'
    m.name = expect_ident("method name");
    expect_punct("(");
    if (!is_punct(")")) {
      while (true) {
        Param p;
        p.name = expect_ident("parameter name");
        expect_punct(":");
        p.type = parse_type();
        m.params.push_back(std::move(p));
        if (is_punct(",")) {
          advance();
          continue;
        }
        break;
      }
    }
    expect_punct(")");
    expect_punct("->");
    m.return_type = parse_type();
    while (cur().kind == Tok::Ident && !is_punct("{")) {
      m.attributes.insert(expect_ident("attribute"));
    }
    if (is_punct("{")) {
      advance();
      expect_newline();
      std::vector<Statement> body;
      skip_newlines();
      while (!is_punct("}")) {
        body.push_back(parse_statement());
        skip_newlines();
      }
      expect_punct("}");
      if (cur().kind == Tok::Newline) advance();
      m.body = std::move(body);
    } else {
      expect_newline();
      if (!cls.external && !cls.is_interface)
        fail_at(cur().pos, "method '" + m.name + "' must have a body");
    }
    return m;
  }

  Constant parse_constant() {
    if (cur().kind == Tok::Int) {
      long long v = cur().int_value;
      advance();
      return Constant::of_int(v);
    }
    if (cur().kind == Tok::Str) {
      std::string v = cur().text;
      advance();
      return Constant::of_str(std::move(v));
    }
    if (is_ident("true") || is_ident("false")) {
      bool v = cur().text == "true";
      advance();
      return Constant::of_bool(v);
    }
    if (is_ident("null")) {
      advance();
      return Constant::null();
    }
    fail("expected constant literal");
  }

  bool at_constant() const {
    return cur().kind == Tok::Int || cur().kind == Tok::Str || is_ident("true") ||
           is_ident("false") || is_ident("null");
  }

  Operand parse_operand() {
    if (at_constant()) return Operand::of_const(parse_constant());
    return Operand::of_local(expect_ident("operand"));
  }

  // splits "a.b.C.member" into ("a.b.C", "member")
  static std::pair<std::string, std::string> split_member(const std::string& dotted) {
    auto dot = dotted.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == dotted.size()) return {"", dotted};
    return {dotted.substr(0, dot), dotted.substr(dot + 1)};
  }

  Statement parse_invoke(std::optional<std::string> result, SourcePos pos) {
    Statement s;
    s.kind = Statement::Kind::Invoke;
    s.pos = pos;
    s.result = std::move(result);
    std::string kind = expect_ident("invoke kind");
    if (kind == "static")
      s.invoke_kind = InvokeKind::Static;
    else if (kind == "virtual")
      s.invoke_kind = InvokeKind::Virtual;
    else if (kind == "special")
      s.invoke_kind = InvokeKind::Special;
    else
      fail_at(pos, "invoke kind must be static, virtual or special");
    std::string dotted = expect_ident("qualified method name");
    auto [cls, name] = split_member(dotted);
    if (cls.empty()) fail_at(pos, "invoke target must be qualified as Class.method");
    s.callee_class = cls;
    s.callee_name = name;
    expect_punct("(");
    if (!is_punct(")")) {
      while (true) {
        s.args.push_back(parse_operand());
        if (is_punct(",")) {
          advance();
          continue;
        }
        break;
      }
    }
    expect_punct(")");
    if (is_ident("on")) {
      advance();
      s.receiver = expect_ident("receiver local");
    }
    expect_newline();
    return s;
  }

  Expr parse_expr(SourcePos pos) {
    Expr e;
    if (is_ident("const")) {
      advance();
      e.kind = Expr::Kind::Const;
      e.constant = parse_constant();
      return e;
    }
    if (is_ident("field")) {
      advance();
      std::string dotted = expect_ident("qualified field name");
      auto [cls, name] = split_member(dotted);
      if (cls.empty()) fail_at(pos, "field reference must be qualified as Class.field");
      e.kind = Expr::Kind::FieldRead;
      e.field = FieldRef{cls, name};
      return e;
    }
    if (is_ident("new")) {
      advance();
      e.kind = Expr::Kind::New;
      e.type_name = parse_type();
      return e;
    }
    if (is_ident("cast")) {
      advance();
      e.kind = Expr::Kind::Cast;
      e.type_name = parse_type();
      e.lhs = parse_operand();
      return e;
    }
    if (is_ident("lengthof")) {
      advance();
      e.kind = Expr::Kind::LengthOf;
      e.lhs = parse_operand();
      return e;
    }
    if (is_ident("instanceof")) {
      advance();
      e.kind = Expr::Kind::InstanceOf;
      e.type_name = parse_type();
      e.lhs = parse_operand();
      return e;
    }
    if (is_ident("not") || is_ident("neg")) {
      e.kind = Expr::Kind::UnOp;
      e.op = cur().text;
      advance();
      e.lhs = parse_operand();
      return e;
    }
    // constant, local copy, array read, or binary operation
    Operand first = parse_operand();
    if (!first.is_const && is_punct("[")) {
      advance();
      e.kind = Expr::Kind::ArrayRead;
      e.local = first.local;
      e.index = parse_operand();
      expect_punct("]");
      return e;
    }
    if (cur().kind == Tok::Punct && is_bin_op(cur().text)) {
      e.kind = Expr::Kind::BinOp;
      e.op = cur().text;
      advance();
      e.lhs = first;
      e.rhs = parse_operand();
      return e;
    }
    if (first.is_const) {
      e.kind = Expr::Kind::Const;
      e.constant = first.constant;
      return e;
    }
    e.kind = Expr::Kind::Local;
    e.local = first.local;
    return e;
  }

  Statement parse_statement() {
    SourcePos pos = cur().pos;
    if (is_ident("if")) {
      advance();
      Statement s;
      s.kind = Statement::Kind::If;
      s.pos = pos;
      if (is_ident("not")) {
        advance();
        s.cond.negated = true;
        s.cond.lhs = parse_operand();
      } else {
        s.cond.lhs = parse_operand();
        if (cur().kind != Tok::Punct || !is_cmp_op(cur().text))
          fail("expected comparison operator");
        s.cond.cmp_op = cur().text;
        advance();
        s.cond.rhs = parse_operand();
      }
      if (!is_ident("goto")) fail("expected 'goto'");
      advance();
      s.jump_target = expect_ident("label");
      expect_newline();
      return s;
    }
    if (is_ident("goto")) {
      advance();
      Statement s;
      s.kind = Statement::Kind::Goto;
      s.pos = pos;
      s.jump_target = expect_ident("label");
      expect_newline();
      return s;
    }
    if (is_ident("switch")) {
      advance();
      Statement s;
      s.kind = Statement::Kind::Switch;
      s.pos = pos;
      s.switch_local = expect_ident("switch operand");
      expect_punct("{");
      skip_newlines();
      bool saw_default = false;
      while (!is_punct("}")) {
        if (is_ident("case")) {
          advance();
          SwitchCase c;
          c.value = parse_constant();
          expect_punct(":");
          c.label = expect_ident("label");
          s.cases.push_back(std::move(c));
        } else if (is_ident("default")) {
          advance();
          expect_punct(":");
          s.default_label = expect_ident("label");
          saw_default = true;
        } else {
          fail("expected 'case', 'default' or '}'");
        }
        skip_newlines();
      }
      expect_punct("}");
      if (!saw_default) fail_at(pos, "switch requires a default label");
      expect_newline();
      return s;
    }
    if (is_ident("throw")) {
      advance();
      Statement s;
      s.kind = Statement::Kind::Throw;
      s.pos = pos;
      if (!is_ident("new")) fail("expected 'new'");
      advance();
      s.exception_type = expect_ident("exception type");
      expect_punct("(");
      if (!is_punct(")")) s.throw_arg = expect_ident("throw argument local");
      expect_punct(")");
      expect_newline();
      return s;
    }
    if (is_ident("return")) {
      advance();
      Statement s;
      s.kind = Statement::Kind::Return;
      s.pos = pos;
      if (cur().kind != Tok::Newline && cur().kind != Tok::End) s.return_value = parse_operand();
      expect_newline();
      return s;
    }
    if (is_ident("invoke")) {
      advance();
      return parse_invoke(std::nullopt, pos);
    }
    if (is_ident("field")) {
      // field Class.f = value
      advance();
      Statement s;
      s.kind = Statement::Kind::FieldWrite;
      s.pos = pos;
      std::string dotted = expect_ident("qualified field name");
      auto [cls, name] = split_member(dotted);
      if (cls.empty()) fail_at(pos, "field reference must be qualified as Class.field");
      s.field = FieldRef{cls, name};
      expect_punct("=");
      s.value = parse_operand();
      expect_newline();
      return s;
    }
    // ident-led: label, assignment, array write
    std::string name = expect_ident("statement");
    if (is_punct(":")) {
      advance();
      Statement s;
      s.kind = Statement::Kind::Label;
      s.pos = pos;
      s.label_name = name;
      expect_newline();
      return s;
    }
    if (is_punct("[")) {
      advance();
      Statement s;
      s.kind = Statement::Kind::ArrayWrite;
      s.pos = pos;
      s.target = name;
      s.index = parse_operand();
      expect_punct("]");
      expect_punct("=");
      s.value = parse_operand();
      expect_newline();
      return s;
    }
    if (is_punct("=")) {
      advance();
      if (is_ident("invoke")) {
        advance();
        return parse_invoke(name, pos);
      }
      Statement s;
      s.kind = Statement::Kind::Assign;
      s.pos = pos;
      s.target = name;
      s.expr = parse_expr(pos);
      expect_newline();
      return s;
    }
    fail_at(pos, "malformed statement");
  }

  void validate(const Program& program) {
    std::set<std::string> class_names;
    for (const auto& cls : program.classes) {
      if (!class_names.insert(cls.name).second)
        fail_at(cls.pos, "duplicate class declaration: " + cls.name);
    }
    for (const auto& cls : program.classes) {
      std::set<std::string> sigs;
      for (const auto& m : cls.methods) {
        std::string sig = m.name + "(";
        for (const auto& p : m.params) sig += p.type + ",";
        sig += ")";
        if (!sigs.insert(sig).second)
          fail_at(m.pos, "duplicate method declaration: " + cls.name + "." + m.name);
        if ((cls.external || cls.is_interface) && m.has_body())
          fail_at(m.pos, "external/interface method must not have a body: " + cls.name + "." +
                             m.name);
        if (m.has_body()) validate_body(cls, m);
      }
    }
  }

  void validate_body(const ClassDecl& cls, const MethodDecl& m) {
    std::set<std::string> labels;
    for (const auto& s : *m.body) {
      if (s.kind == Statement::Kind::Label) {
        if (!labels.insert(s.label_name).second)
          fail_at(s.pos, "duplicate label '" + s.label_name + "' in " + cls.name + "." + m.name);
      }
    }
    auto require_label = [&](const Statement& s, const std::string& label) {
      if (!labels.count(label))
        fail_at(s.pos, "dangling label '" + label + "' in " + cls.name + "." + m.name);
    };
    std::set<std::string> defined;
    for (const auto& p : m.params) defined.insert(p.name);
    defined.insert("this");
    for (const auto& s : *m.body) {
      switch (s.kind) {
        case Statement::Kind::If: require_label(s, s.jump_target); break;
        case Statement::Kind::Goto: require_label(s, s.jump_target); break;
        case Statement::Kind::Switch:
          for (const auto& c : s.cases) require_label(s, c.label);
          require_label(s, s.default_label);
          break;
        case Statement::Kind::Assign: defined.insert(s.target); break;
        case Statement::Kind::Invoke:
          if (s.result) defined.insert(*s.result);
          break;
        default: break;
      }
    }
    auto check_operand = [&](const Statement& s, const Operand& o) {
      if (!o.is_const && !defined.count(o.local))
        fail_at(s.pos, "use of undefined local '" + o.local + "' in " + cls.name + "." + m.name);
    };
    auto check_local = [&](const Statement& s, const std::string& l) {
      if (!defined.count(l))
        fail_at(s.pos, "use of undefined local '" + l + "' in " + cls.name + "." + m.name);
    };
    for (const auto& s : *m.body) {
      switch (s.kind) {
        case Statement::Kind::Assign: {
          const Expr& e = s.expr;
          switch (e.kind) {
            case Expr::Kind::Local: check_local(s, e.local); break;
            case Expr::Kind::ArrayRead:
              check_local(s, e.local);
              check_operand(s, e.index);
              break;
            case Expr::Kind::BinOp:
              check_operand(s, e.lhs);
              check_operand(s, e.rhs);
              break;
            case Expr::Kind::UnOp:
            case Expr::Kind::Cast:
            case Expr::Kind::LengthOf:
            case Expr::Kind::InstanceOf: check_operand(s, e.lhs); break;
            default: break;
          }
          break;
        }
        case Statement::Kind::FieldWrite: check_operand(s, s.value); break;
        case Statement::Kind::ArrayWrite:
          check_local(s, s.target);
          check_operand(s, s.index);
          check_operand(s, s.value);
          break;
        case Statement::Kind::Invoke:
          for (const auto& a : s.args) check_operand(s, a);
          if (s.receiver) check_local(s, *s.receiver);
          break;
        case Statement::Kind::If:
          check_operand(s, s.cond.lhs);
          if (!s.cond.negated) check_operand(s, s.cond.rhs);
          break;
        case Statement::Kind::Switch: check_local(s, s.switch_local); break;
        case Statement::Kind::Throw:
          if (s.throw_arg) check_local(s, *s.throw_arg);
          break;
        case Statement::Kind::Return:
          if (s.return_value) check_operand(s, *s.return_value);
          break;
        default: break;
      }
    }
    if (!m.body->empty()) {
      const Statement& last = m.body->back();
      bool terminates = last.kind == Statement::Kind::Return ||
                        last.kind == Statement::Kind::Throw ||
                        last.kind == Statement::Kind::Goto;
      if (!terminates)
        fail_at(last.pos, "method body of " + cls.name + "." + m.name +
                              " must end with return, throw or goto");
    }
  }

  std::vector<Token> toks_;
  std::string file_;
  std::size_t i_ = 0;
};

}  // namespace

Program parse_program(std::string_view text, const std::string& filename) {
  Lexer lexer(text, filename);
  Parser parser(lexer.run(), filename);
  return parser.run(true);
}

Program parse_program_unlinked(std::string_view text, const std::string& filename) {
  Lexer lexer(text, filename);
  Parser parser(lexer.run(), filename);
  return parser.run(false);
}

Program merge_programs(std::vector<Program> parts) {
  Program merged;
  for (auto& part : parts)
    for (auto& cls : part.classes) merged.classes.push_back(std::move(cls));
  merged.build_indexes();
  validate_type_resolution(merged);
  return merged;
}

void validate_type_resolution(const Program& program) {
  std::set<std::string> class_names;
  for (const auto& cls : program.classes) {
    if (!class_names.insert(cls.name).second)
      throw ParseError(cls.source_file, cls.pos, "duplicate class declaration: " + cls.name);
  }
  auto require_type = [&](const std::string& file, SourcePos at, const std::string& type,
                          const std::string& what) {
    std::string base = type;
    while (base.size() >= 2 && base.substr(base.size() - 2) == "[]")
      base = base.substr(0, base.size() - 2);
    if (base == "int" || base == "bool" || base == "string" || base == "void") return;
    if (!class_names.count(base))
      throw ParseError(file, at, "unresolved type in " + what + ": " + base);
  };
  for (const auto& cls : program.classes) {
    if (cls.superclass)
      require_type(cls.source_file, cls.pos, *cls.superclass, "extends clause of " + cls.name);
    for (const auto& itf : cls.interfaces)
      require_type(cls.source_file, cls.pos, itf, "implements clause of " + cls.name);
    for (const auto& f : cls.fields)
      require_type(cls.source_file, cls.pos, f.type, cls.name + "." + f.name);
    for (const auto& m : cls.methods) {
      for (const auto& p : m.params)
        require_type(cls.source_file, m.pos, p.type, cls.name + "." + m.name + " parameter");
      require_type(cls.source_file, m.pos, m.return_type,
                   cls.name + "." + m.name + " return type");
    }
  }
}

}  // namespace authmine::ir
