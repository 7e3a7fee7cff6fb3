#include "authmine/ir.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace authmine::ir {

std::string MethodRef::package() const {
  auto dot = class_name.rfind('.');
  return dot == std::string::npos ? std::string() : class_name.substr(0, dot);
}

std::string MethodRef::simple_class() const {
  auto dot = class_name.rfind('.');
  return dot == std::string::npos ? class_name : class_name.substr(dot + 1);
}

std::string MethodRef::signature() const {
  std::string s = qualified() + "(";
  for (std::size_t i = 0; i < param_types.size(); ++i) {
    if (i) s += ",";
    s += param_types[i];
  }
  return s + ")";
}

Constant Constant::of_int(long long v) {
  Constant c;
  c.kind = Kind::Int;
  c.int_value = v;
  return c;
}

Constant Constant::of_bool(bool v) {
  Constant c;
  c.kind = Kind::Bool;
  c.bool_value = v;
  return c;
}

Constant Constant::of_str(std::string v) {
  Constant c;
  c.kind = Kind::Str;
  c.str_value = std::move(v);
  return c;
}

Constant Constant::null() {
  Constant c;
  c.kind = Kind::Null;
  return c;
}

std::string Constant::render() const {
  switch (kind) {
    case Kind::Int: return std::to_string(int_value);
    case Kind::Bool: return bool_value ? "true" : "false";
    case Kind::Null: return "null";
    case Kind::Str: {
      std::string out = "\"";
      for (char c : str_value) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\t': out += "\\t"; break;
          default: out.push_back(c);
        }
      }
      return out + "\"";
    }
  }
  return "null";
}

Operand Operand::of_local(std::string name) {
  Operand o;
  o.is_const = false;
  o.local = std::move(name);
  return o;
}

Operand Operand::of_const(Constant c) {
  Operand o;
  o.is_const = true;
  o.constant = std::move(c);
  return o;
}

std::string Operand::render() const { return is_const ? constant.render() : local; }

const MethodDecl* ClassDecl::find_method(const std::string& method_name,
                                         std::size_t nparams) const {
  const MethodDecl* found = nullptr;
  for (const auto& m : methods) {
    if (m.name == method_name && m.params.size() == nparams) {
      if (found) return nullptr;  // ambiguous overloads are unresolvable at call sites
      found = &m;
    }
  }
  return found;
}

const FieldDecl* ClassDecl::find_field(const std::string& field_name) const {
  for (const auto& f : fields)
    if (f.name == field_name) return &f;
  return nullptr;
}

void Program::build_indexes() {
  class_index_.clear();
  direct_subtypes.clear();
  for (std::size_t i = 0; i < classes.size(); ++i) {
    class_index_[classes[i].name] = i;
    if (classes[i].superclass) direct_subtypes[*classes[i].superclass].push_back(classes[i].name);
    for (const auto& itf : classes[i].interfaces) direct_subtypes[itf].push_back(classes[i].name);
  }
  for (auto& [_, subs] : direct_subtypes) std::sort(subs.begin(), subs.end());
}

const ClassDecl* Program::find_class(const std::string& name) const {
  auto it = class_index_.find(name);
  return it == class_index_.end() ? nullptr : &classes[it->second];
}

const MethodDecl* Program::find_method(const std::string& class_name,
                                       const std::string& method_name,
                                       std::size_t nparams) const {
  const ClassDecl* cls = find_class(class_name);
  return cls ? cls->find_method(method_name, nparams) : nullptr;
}

const ClassDecl* Program::nearest_implementor(const std::string& class_name,
                                              const std::string& method_name,
                                              std::size_t nparams) const {
  const ClassDecl* cls = find_class(class_name);
  std::set<std::string> seen;
  while (cls && seen.insert(cls->name).second) {
    if (cls->find_method(method_name, nparams)) return cls;
    if (!cls->superclass) return nullptr;
    cls = find_class(*cls->superclass);
  }
  return nullptr;
}

MethodRef Program::ref_of(const std::string& class_name, const MethodDecl& m) const {
  MethodRef r;
  r.class_name = class_name;
  r.method_name = m.name;
  for (const auto& p : m.params) r.param_types.push_back(p.type);
  r.return_type = m.return_type;
  return r;
}

std::set<std::string> subtypes_of(const Program& program, const std::string& type_name) {
  if (!program.find_class(type_name))
    throw std::invalid_argument("unknown type: " + type_name);
  std::set<std::string> out;
  std::deque<std::string> work{type_name};
  while (!work.empty()) {
    std::string cur = work.front();
    work.pop_front();
    if (!out.insert(cur).second) continue;
    auto it = program.direct_subtypes.find(cur);
    if (it == program.direct_subtypes.end()) continue;
    for (const auto& sub : it->second) work.push_back(sub);
  }
  return out;
}

bool is_primitive_or_string(const std::string& type_name) {
  return type_name == "int" || type_name == "bool" || type_name == "string";
}

ControlFlowGraph build_cfg(const MethodDecl& method) {
  if (!method.has_body()) throw std::invalid_argument("build_cfg requires a method body");
  const auto& body = *method.body;
  ControlFlowGraph cfg;
  cfg.nodes.resize(body.size());

  std::map<std::string, int> label_index;
  for (std::size_t i = 0; i < body.size(); ++i)
    if (body[i].kind == Statement::Kind::Label) label_index[body[i].label_name] = int(i);

  for (std::size_t i = 0; i < body.size(); ++i) {
    const Statement& s = body[i];
    auto& succ = cfg.nodes[i].successors;
    switch (s.kind) {
      case Statement::Kind::If:
        succ.push_back(label_index.at(s.jump_target));
        if (i + 1 < body.size()) succ.push_back(int(i + 1));
        break;
      case Statement::Kind::Switch:
        for (const auto& c : s.cases) succ.push_back(label_index.at(c.label));
        succ.push_back(label_index.at(s.default_label));
        break;
      case Statement::Kind::Goto: succ.push_back(label_index.at(s.jump_target)); break;
      case Statement::Kind::Throw:
      case Statement::Kind::Return: break;  // sinks
      default:
        if (i + 1 < body.size()) succ.push_back(int(i + 1));
        break;
    }
  }

  if (!cfg.nodes.empty()) {
    std::deque<int> work{0};
    while (!work.empty()) {
      int n = work.front();
      work.pop_front();
      if (cfg.nodes[n].reachable) continue;
      cfg.nodes[n].reachable = true;
      for (int s : cfg.nodes[n].successors) work.push_back(s);
    }
  }
  return cfg;
}

namespace {

void render_statement(std::ostringstream& out, const Statement& s) {
  switch (s.kind) {
    case Statement::Kind::Assign: {
      out << "    " << s.target << " = ";
      const Expr& e = s.expr;
      switch (e.kind) {
        case Expr::Kind::Const: out << "const " << e.constant.render(); break;
        case Expr::Kind::Local: out << e.local; break;
        case Expr::Kind::FieldRead: out << "field " << e.field.qualified(); break;
        case Expr::Kind::ArrayRead: out << e.local << "[" << e.index.render() << "]"; break;
        case Expr::Kind::BinOp: out << e.lhs.render() << " " << e.op << " " << e.rhs.render(); break;
        case Expr::Kind::UnOp: out << e.op << " " << e.lhs.render(); break;
        case Expr::Kind::Cast: out << "cast " << e.type_name << " " << e.lhs.render(); break;
        case Expr::Kind::New: out << "new " << e.type_name; break;
        case Expr::Kind::LengthOf: out << "lengthof " << e.lhs.render(); break;
        case Expr::Kind::InstanceOf:
          out << "instanceof " << e.type_name << " " << e.lhs.render();
          break;
      }
      break;
    }
    case Statement::Kind::FieldWrite:
      out << "    field " << s.field.qualified() << " = " << s.value.render();
      break;
    case Statement::Kind::ArrayWrite:
      out << "    " << s.target << "[" << s.index.render() << "] = " << s.value.render();
      break;
    case Statement::Kind::Invoke: {
      out << "    ";
      if (s.result) out << *s.result << " = ";
      out << "invoke ";
      switch (s.invoke_kind) {
        case InvokeKind::Static: out << "static "; break;
        case InvokeKind::Virtual: out << "virtual "; break;
        case InvokeKind::Special: out << "special "; break;
      }
      out << s.callee_class << "." << s.callee_name << "(";
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        if (i) out << ", ";
        out << s.args[i].render();
      }
      out << ")";
      if (s.receiver) out << " on " << *s.receiver;
      break;
    }
    case Statement::Kind::If:
      out << "    if ";
      if (s.cond.negated)
        out << "not " << s.cond.lhs.render();
      else
        out << s.cond.lhs.render() << " " << s.cond.cmp_op << " " << s.cond.rhs.render();
      out << " goto " << s.jump_target;
      break;
    case Statement::Kind::Switch: {
      out << "    switch " << s.switch_local << " {";
      for (const auto& c : s.cases) out << " case " << c.value.render() << ": " << c.label;
      out << " default: " << s.default_label << " }";
      break;
    }
    case Statement::Kind::Goto: out << "    goto " << s.jump_target; break;
    case Statement::Kind::Label: out << "  " << s.label_name << ":"; break;
    case Statement::Kind::Throw:
      out << "    throw new " << s.exception_type << "("
          << (s.throw_arg ? *s.throw_arg : std::string()) << ")";
      break;
    case Statement::Kind::Return:
      out << "    return";
      if (s.return_value) out << " " << s.return_value->render();
      break;
  }
  out << "\n";
}

}  // namespace

std::string render_program(const Program& program) {
  std::ostringstream out;
  for (const auto& cls : program.classes) {
    out << (cls.is_interface ? "interface " : "class ") << cls.name;
    if (cls.superclass) out << " extends " << *cls.superclass;
    if (!cls.interfaces.empty()) {
      out << " implements ";
      for (std::size_t i = 0; i < cls.interfaces.size(); ++i) {
        if (i) out << ", ";
        out << cls.interfaces[i];
      }
    }
    if (cls.external) out << " external";
    out << " {\n";
    for (const auto& f : cls.fields) out << "  field " << f.name << ": " << f.type << "\n";
    for (const auto& m : cls.methods) {
      out << "  method " << m.name << "(";
      for (std::size_t i = 0; i < m.params.size(); ++i) {
        if (i) out << ", ";
        out << m.params[i].name << ": " << m.params[i].type;
      }
      out << ") -> " << m.return_type;
      for (const auto& attr : m.attributes) out << " " << attr;
      if (m.has_body()) {
        out << " {\n";
        for (const auto& s : *m.body) render_statement(out, s);
        out << "  }\n";
      } else {
        out << "\n";
      }
    }
    out << "}\n";
  }
  return out.str();
}

}  // namespace authmine::ir
