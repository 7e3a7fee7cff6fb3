#include "authmine/matchlang.hpp"

#include <cctype>
#include <sstream>

namespace authmine::matchlang {

namespace {

// --- s-expression reading -------------------------------------------------

struct SexprNode {
  bool is_list = false;
  bool is_regex = false;  // backquote-delimited atom
  std::string atom;
  std::vector<SexprNode> items;
};

class SexprReader {
 public:
  explicit SexprReader(std::string_view src) : src_(src) {}

  std::vector<SexprNode> read_all() {
    std::vector<SexprNode> out;
    skip_ws();
    while (!at_end()) {
      out.push_back(read());
      skip_ws();
    }
    return out;
  }

  SexprNode read_one() {
    skip_ws();
    if (at_end()) throw MatchError("empty matcher expression");
    SexprNode n = read();
    skip_ws();
    if (!at_end()) throw MatchError("trailing characters after matcher expression");
    return n;
  }

 private:
  bool at_end() const { return i_ >= src_.size(); }
  char peek() const { return at_end() ? '\0' : src_[i_]; }

  void skip_ws() {
    while (!at_end()) {
      char c = peek();
      if (std::isspace(unsigned(c))) {
        ++i_;
      } else if (c == ';') {
        while (!at_end() && peek() != '\n') ++i_;
      } else {
        break;
      }
    }
  }

  SexprNode read() {
    char c = peek();
    if (c == '(') {
      ++i_;
      SexprNode n;
      n.is_list = true;
      skip_ws();
      while (peek() != ')') {
        if (at_end()) throw MatchError("unbalanced parentheses in matcher expression");
        n.items.push_back(read());
        skip_ws();
      }
      ++i_;
      return n;
    }
    if (c == ')') throw MatchError("unbalanced parentheses in matcher expression");
    if (c == '`') {
      ++i_;
      SexprNode n;
      n.is_regex = true;
      while (peek() != '`') {
        if (at_end()) throw MatchError("unterminated regex literal");
        // regexes in input files may be wrapped across lines; drop the breaks
        if (peek() != '\n' && peek() != '\r') n.atom.push_back(peek());
        ++i_;
      }
      ++i_;
      return n;
    }
    SexprNode n;
    while (!at_end() && !std::isspace(unsigned(peek())) && peek() != '(' && peek() != ')') {
      n.atom.push_back(peek());
      ++i_;
    }
    if (n.atom.empty()) throw MatchError("malformed matcher expression");
    return n;
  }

  std::string_view src_;
  std::size_t i_ = 0;
};

std::regex compile(const std::string& pattern) {
  try {
    return std::regex(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw MatchError("bad regex `" + pattern + "`: " + e.what());
  }
}

bool parse_leaf_op(const std::string& head, MatcherExpr::Op& op, MatcherExpr::Dim& dim) {
  auto dim_of = [&](const std::string& suffix) {
    if (suffix == "package") return MatcherExpr::Dim::Package;
    if (suffix == "class") return MatcherExpr::Dim::Class;
    if (suffix == "name") return MatcherExpr::Dim::Name;
    return MatcherExpr::Dim::None;
  };
  static const std::pair<const char*, MatcherExpr::Op> prefixes[] = {
      {"starts-with-", MatcherExpr::Op::StartsWith}, {"ends-with-", MatcherExpr::Op::EndsWith},
      {"contains-", MatcherExpr::Op::Contains},      {"equals-", MatcherExpr::Op::Equals},
      {"equal-", MatcherExpr::Op::Equals},           {"regex-", MatcherExpr::Op::Regex},
  };
  for (const auto& [prefix, candidate] : prefixes) {
    std::string p = prefix;
    if (head.size() > p.size() && head.compare(0, p.size(), p) == 0) {
      MatcherExpr::Dim d = dim_of(head.substr(p.size()));
      if (d == MatcherExpr::Dim::None) continue;
      op = candidate;
      dim = d;
      return true;
    }
  }
  return false;
}

MatcherPtr build_matcher(const SexprNode& node) {
  if (!node.is_list) throw MatchError("matcher operation must be a parenthesized list");
  if (node.items.empty() || node.items[0].is_list || node.items[0].is_regex)
    throw MatchError("matcher operation must start with an operation name");
  const std::string& head = node.items[0].atom;
  auto expr = std::make_shared<MatcherExpr>();

  if (head == "and" || head == "or") {
    expr->op = head == "and" ? MatcherExpr::Op::And : MatcherExpr::Op::Or;
    if (node.items.size() < 3)
      throw MatchError("'" + head + "' requires at least two operands");
    for (std::size_t i = 1; i < node.items.size(); ++i)
      expr->children.push_back(build_matcher(node.items[i]));
    return expr;
  }
  if (head == "not") {
    expr->op = MatcherExpr::Op::Not;
    if (node.items.size() != 2) throw MatchError("'not' requires exactly one operand");
    expr->children.push_back(build_matcher(node.items[1]));
    return expr;
  }
  if (head == "regex-name-words" || head == "regex-class-words") {
    expr->op = head == "regex-name-words" ? MatcherExpr::Op::RegexNameWords
                                          : MatcherExpr::Op::RegexClassWords;
    if (node.items.size() < 2 || node.items.size() > (head == "regex-class-words" ? 3u : 2u))
      throw MatchError("wrong arity for '" + head + "'");
    if (!node.items[1].is_regex)
      throw MatchError("'" + head + "' requires a backquoted regex literal");
    expr->text = node.items[1].atom;
    expr->regex = compile(expr->text);
    if (head == "regex-class-words" && node.items.size() == 3) {
      try {
        expr->class_index = std::stoi(node.items[2].atom);
      } catch (...) {
        throw MatchError("regex-class-words index must be an integer");
      }
      if (expr->class_index < -1) throw MatchError("regex-class-words index must be >= -1");
    }
    return expr;
  }
  MatcherExpr::Op op;
  MatcherExpr::Dim dim;
  if (!parse_leaf_op(head, op, dim)) throw MatchError("unknown matcher operation '" + head + "'");
  expr->op = op;
  expr->dim = dim;
  if (node.items.size() != 2) throw MatchError("wrong arity for '" + head + "'");
  const SexprNode& arg = node.items[1];
  if (arg.is_list) throw MatchError("'" + head + "' requires a string argument");
  if (op == MatcherExpr::Op::Regex) {
    if (!arg.is_regex) throw MatchError("'" + head + "' requires a backquoted regex literal");
    expr->text = arg.atom;
    expr->regex = compile(expr->text);
  } else {
    expr->text = arg.atom;
  }
  return expr;
}

const char* op_name(MatcherExpr::Op op, MatcherExpr::Dim dim) {
  auto dim_suffix = [&]() {
    switch (dim) {
      case MatcherExpr::Dim::Package: return "package";
      case MatcherExpr::Dim::Class: return "class";
      default: return "name";
    }
  };
  static thread_local std::string buf;
  switch (op) {
    case MatcherExpr::Op::And: return "and";
    case MatcherExpr::Op::Or: return "or";
    case MatcherExpr::Op::Not: return "not";
    case MatcherExpr::Op::RegexNameWords: return "regex-name-words";
    case MatcherExpr::Op::RegexClassWords: return "regex-class-words";
    case MatcherExpr::Op::StartsWith: buf = std::string("starts-with-") + dim_suffix(); break;
    case MatcherExpr::Op::EndsWith: buf = std::string("ends-with-") + dim_suffix(); break;
    case MatcherExpr::Op::Contains: buf = std::string("contains-") + dim_suffix(); break;
    case MatcherExpr::Op::Equals: buf = std::string("equals-") + dim_suffix(); break;
    case MatcherExpr::Op::Regex: buf = std::string("regex-") + dim_suffix(); break;
  }
  return buf.c_str();
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<std::string> split_dollar(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find('$', start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string MatcherExpr::render() const {
  std::ostringstream out;
  out << "(" << op_name(op, dim);
  for (const auto& child : children) out << " " << child->render();
  if (op == Op::Regex || op == Op::RegexNameWords || op == Op::RegexClassWords)
    out << " `" << text << "`";
  else if (!children.size() && !text.empty())
    out << " " << text;
  if (op == Op::RegexClassWords) out << " " << class_index;
  out << ")";
  return out.str();
}

MatcherPtr parse_matcher(std::string_view text) {
  SexprReader reader(text);
  return build_matcher(reader.read_one());
}

std::vector<MatcherPtr> parse_matcher_file(std::string_view text) {
  SexprReader reader(text);
  std::vector<MatcherPtr> out;
  for (const auto& node : reader.read_all()) out.push_back(build_matcher(node));
  return out;
}

std::string split_words(const std::string& identifier) {
  std::string out;
  for (std::size_t i = 0; i < identifier.size(); ++i) {
    char c = identifier[i];
    if (c == '_') {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      continue;
    }
    if (std::isupper(unsigned(c)) && i > 0 && std::islower(unsigned(identifier[i - 1])) &&
        !out.empty() && out.back() != ' ')
      out.push_back(' ');
    out.push_back(char(std::tolower(unsigned(c))));
  }
  // trim any trailing separator left by trailing underscores
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

MemberName MemberName::of(const ir::MethodRef& m) {
  return MemberName{m.package(), m.simple_class(), m.method_name};
}

MemberName MemberName::of(const ir::FieldRef& f) {
  ir::MethodRef helper;
  helper.class_name = f.class_name;
  return MemberName{helper.package(), helper.simple_class(), f.field_name};
}

bool matches(const MatcherExpr& expr, const MemberName& member) {
  switch (expr.op) {
    case MatcherExpr::Op::And:
      for (const auto& c : expr.children)
        if (!matches(*c, member)) return false;
      return true;
    case MatcherExpr::Op::Or:
      for (const auto& c : expr.children)
        if (matches(*c, member)) return true;
      return false;
    case MatcherExpr::Op::Not: return !matches(*expr.children[0], member);
    case MatcherExpr::Op::RegexNameWords:
      return std::regex_search(split_words(member.member), expr.regex);
    case MatcherExpr::Op::RegexClassWords: {
      std::vector<std::string> parts = split_dollar(member.class_name);
      // parts are outer-to-inner; index 0 selects the innermost
      if (expr.class_index >= 0) {
        if (std::size_t(expr.class_index) >= parts.size()) return false;
        const std::string& part = parts[parts.size() - 1 - std::size_t(expr.class_index)];
        return std::regex_search(split_words(part), expr.regex);
      }
      for (const auto& part : parts)
        if (std::regex_search(split_words(part), expr.regex)) return true;
      return false;
    }
    default: break;
  }
  const std::string& subject = expr.dim == MatcherExpr::Dim::Package ? member.package
                               : expr.dim == MatcherExpr::Dim::Class ? member.class_name
                                                                     : member.member;
  switch (expr.op) {
    case MatcherExpr::Op::StartsWith: return starts_with(subject, expr.text);
    case MatcherExpr::Op::EndsWith: return ends_with(subject, expr.text);
    case MatcherExpr::Op::Contains: return subject.find(expr.text) != std::string::npos;
    case MatcherExpr::Op::Equals: return subject == expr.text;
    case MatcherExpr::Op::Regex: return std::regex_search(subject, expr.regex);
    default: return false;
  }
}

bool matches(const MatcherExpr& expr, const ir::MethodRef& method) {
  return matches(expr, MemberName::of(method));
}

bool matches(const MatcherExpr& expr, const ir::FieldRef& field) {
  return matches(expr, MemberName::of(field));
}

std::set<ir::MethodRef> identify_context_queries(const ir::Program& program,
                                                 const std::vector<MatcherPtr>& exprs,
                                                 const std::vector<ir::MethodRef>& seeds) {
  std::set<ir::MethodRef> out(seeds.begin(), seeds.end());
  for (const auto& cls : program.classes) {
    for (const auto& m : cls.methods) {
      if (!m.has_body()) continue;
      ir::MethodRef ref = program.ref_of(cls.name, m);
      for (const auto& expr : exprs) {
        if (matches(*expr, ref)) {
          out.insert(ref);
          break;
        }
      }
    }
  }
  return out;
}

std::vector<ir::MethodRef> parse_seed_file(std::string_view text) {
  std::vector<ir::MethodRef> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    auto open = line.find('(');
    auto close = line.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw MatchError("seed line " + std::to_string(lineno) +
                       ": expected full method signature a.b.C.name(t1,t2)");
    std::string qualified = line.substr(0, open);
    auto dot = qualified.rfind('.');
    if (dot == std::string::npos)
      throw MatchError("seed line " + std::to_string(lineno) + ": missing class qualifier");
    ir::MethodRef ref;
    ref.class_name = qualified.substr(0, dot);
    ref.method_name = qualified.substr(dot + 1);
    std::string params = line.substr(open + 1, close - open - 1);
    std::size_t start = 0;
    while (start < params.size()) {
      auto comma = params.find(',', start);
      std::string p = params.substr(start, comma == std::string::npos ? std::string::npos
                                                                      : comma - start);
      auto pb = p.find_first_not_of(" \t");
      auto pe = p.find_last_not_of(" \t");
      if (pb != std::string::npos) ref.param_types.push_back(p.substr(pb, pe - pb + 1));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    out.push_back(std::move(ref));
  }
  return out;
}

// --- string matchers --------------------------------------------------------

namespace {

StringMatcherPtr build_string_matcher(const SexprNode& node) {
  if (!node.is_list) throw MatchError("string matcher must be a parenthesized list");
  if (node.items.empty() || node.items[0].is_list || node.items[0].is_regex)
    throw MatchError("string matcher must start with an operation name");
  const std::string& head = node.items[0].atom;
  auto expr = std::make_shared<StringMatcher>();
  if (head == "and" || head == "or") {
    expr->op = head == "and" ? StringMatcher::Op::And : StringMatcher::Op::Or;
    if (node.items.size() < 3)
      throw MatchError("'" + head + "' requires at least two operands");
    for (std::size_t i = 1; i < node.items.size(); ++i)
      expr->children.push_back(build_string_matcher(node.items[i]));
    return expr;
  }
  if (head == "not") {
    expr->op = StringMatcher::Op::Not;
    if (node.items.size() != 2) throw MatchError("'not' requires exactly one operand");
    expr->children.push_back(build_string_matcher(node.items[1]));
    return expr;
  }
  if (node.items.size() != 2) throw MatchError("wrong arity for '" + head + "'");
  const SexprNode& arg = node.items[1];
  if (head == "regex") {
    if (!arg.is_regex) throw MatchError("'regex' requires a backquoted regex literal");
    expr->op = StringMatcher::Op::Regex;
    expr->text = arg.atom;
    expr->regex = compile(expr->text);
    return expr;
  }
  if (head == "starts-with")
    expr->op = StringMatcher::Op::StartsWith;
  else if (head == "ends-with")
    expr->op = StringMatcher::Op::EndsWith;
  else if (head == "contains")
    expr->op = StringMatcher::Op::Contains;
  else if (head == "equals" || head == "equal")
    expr->op = StringMatcher::Op::Equals;
  else
    throw MatchError("unknown string matcher operation '" + head + "'");
  if (arg.is_list) throw MatchError("'" + head + "' requires a string argument");
  expr->text = arg.atom;
  return expr;
}

}  // namespace

StringMatcherPtr parse_string_matcher(std::string_view text) {
  SexprReader reader(text);
  return build_string_matcher(reader.read_one());
}

bool matches(const StringMatcher& expr, const std::string& value) {
  switch (expr.op) {
    case StringMatcher::Op::And:
      for (const auto& c : expr.children)
        if (!matches(*c, value)) return false;
      return true;
    case StringMatcher::Op::Or:
      for (const auto& c : expr.children)
        if (matches(*c, value)) return true;
      return false;
    case StringMatcher::Op::Not: return !matches(*expr.children[0], value);
    case StringMatcher::Op::StartsWith: return starts_with(value, expr.text);
    case StringMatcher::Op::EndsWith: return ends_with(value, expr.text);
    case StringMatcher::Op::Contains: return value.find(expr.text) != std::string::npos;
    case StringMatcher::Op::Equals: return value == expr.text;
    case StringMatcher::Op::Regex: return std::regex_search(value, expr.regex);
  }
  return false;
}

}  // namespace authmine::matchlang
