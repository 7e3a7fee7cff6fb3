#include "authmine/cpfilter.hpp"

#include <algorithm>
#include <functional>

#include "authmine/callgraph.hpp"
#include "xml.hpp"

namespace authmine::cpfilter {

namespace {

int parse_position(const xml::Node& node) {
  const std::string* raw = node.attr("Position");
  if (!raw) throw FilterError("IsValueUsedInMethodCall requires a Position attribute");
  try {
    std::size_t used = 0;
    int v = std::stoi(*raw, &used);
    if (used != raw->size()) throw std::invalid_argument("");
    if (v < -1) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw FilterError("bad position '" + *raw + "' (expected an integer >= -1)");
  }
}

bool parse_bool_attr(const xml::Node& node, const std::string& key, bool fallback) {
  const std::string* raw = node.attr(key);
  if (!raw) return fallback;
  if (*raw == "true") return true;
  if (*raw == "false") return false;
  throw FilterError("attribute " + key + " must be \"true\" or \"false\"");
}

matchlang::MatcherPtr parse_member_matcher(const xml::Node& node) {
  const std::string* value = node.attr("Value");
  if (!value) throw FilterError("<" + node.name + "> requires a Value matcher attribute");
  try {
    return matchlang::parse_matcher(*value);
  } catch (const matchlang::MatchError& e) {
    throw FilterError("bad matcher in <" + node.name + ">: " + e.what());
  }
}

matchlang::StringMatcherPtr parse_value_string_matcher(const xml::Node& node) {
  const std::string* value = node.attr("Value");
  if (!value) throw FilterError("<" + node.name + "> requires a Value matcher attribute");
  try {
    return matchlang::parse_string_matcher(*value);
  } catch (const matchlang::MatchError& e) {
    throw FilterError("bad matcher in <" + node.name + ">: " + e.what());
  }
}

RestrictionGroup parse_restriction_group(const xml::Node& node);

Restriction parse_restriction(const xml::Node& node) {
  Restriction r;
  if (node.name == "IsInArithmeticChain") {
    r.kind = Restriction::Kind::InArithmeticChain;
    r.handle_constants = parse_bool_attr(node, "HandleConstants", false);
    if (!node.children.empty())
      throw FilterError("IsInArithmeticChain does not take nested elements");
    return r;
  }
  if (node.name == "IsValueUsedInMethodCall") {
    r.kind = Restriction::Kind::ValueUsedInMethodCall;
    r.position = parse_position(node);
    bool saw_matcher = false;
    for (const auto& child : node.children) {
      if (child.name == "Matcher") {
        if (saw_matcher) throw FilterError("IsValueUsedInMethodCall takes a single Matcher");
        saw_matcher = true;
        const std::string* cls = child.attr("class");
        if (!cls) throw FilterError("Matcher requires a class attribute");
        if (*cls == "MethodMatcher") {
          r.matcher_is_string = false;
          r.method_matcher = parse_member_matcher(child);
        } else if (*cls == "StringMatcher") {
          r.matcher_is_string = true;
          r.string_matcher = parse_value_string_matcher(child);
        } else {
          throw FilterError("Matcher class must be StringMatcher or MethodMatcher");
        }
      } else if (child.name == "Restrictions") {
        if (r.nested) throw FilterError("IsValueUsedInMethodCall takes a single Restrictions");
        r.nested = std::make_shared<RestrictionGroup>(parse_restriction_group(child));
      } else {
        throw FilterError("unknown element <" + child.name + "> under IsValueUsedInMethodCall");
      }
    }
    if (!saw_matcher) throw FilterError("IsValueUsedInMethodCall requires a Matcher");
    if (r.matcher_is_string && r.nested && !r.nested->items.empty())
      throw FilterError("a StringMatcher cannot carry nested restrictions");
    return r;
  }
  if (node.name == "Restrictions") {
    r.kind = Restriction::Kind::Group;
    r.nested = std::make_shared<RestrictionGroup>(parse_restriction_group(node));
    return r;
  }
  throw FilterError("unknown restriction <" + node.name + ">");
}

RestrictionGroup parse_restriction_group(const xml::Node& node) {
  RestrictionGroup group;
  group.use_union = parse_bool_attr(node, "UseUnion", false);
  for (const auto& child : node.children) group.items.push_back(parse_restriction(child));
  return group;
}

FilterNodePtr parse_rule(const xml::Node& node) {
  auto out = std::make_shared<FilterNode>();
  if (node.name == "And" || node.name == "Or" || node.name == "Not") {
    out->kind = node.name == "And"  ? FilterNode::Kind::And
                : node.name == "Or" ? FilterNode::Kind::Or
                                    : FilterNode::Kind::Not;
    for (const auto& child : node.children) out->children.push_back(parse_rule(child));
    if (out->kind == FilterNode::Kind::Not && out->children.size() != 1)
      throw FilterError("<Not> requires exactly one child");
    if (out->kind != FilterNode::Kind::Not && out->children.size() < 2)
      throw FilterError("<" + node.name + "> requires at least two children");
    return out;
  }
  if (node.name == "KeepFieldValueUse" || node.name == "KeepMethodReturnValueUse" ||
      node.name == "KeepStringUse" || node.name == "KeepMethodContainerUse") {
    out->kind = node.name == "KeepFieldValueUse" ? FilterNode::Kind::KeepFieldValueUse
                : node.name == "KeepMethodReturnValueUse"
                    ? FilterNode::Kind::KeepMethodReturnValueUse
                : node.name == "KeepStringUse" ? FilterNode::Kind::KeepStringUse
                                               : FilterNode::Kind::KeepMethodContainerUse;
    if (out->kind == FilterNode::Kind::KeepStringUse)
      out->string_matcher = parse_value_string_matcher(node);
    else
      out->matcher = parse_member_matcher(node);
    for (const auto& child : node.children) {
      if (child.name != "Restrictions")
        throw FilterError("unknown element <" + child.name + "> under " + node.name);
      if (out->kind == FilterNode::Kind::KeepMethodContainerUse)
        throw FilterError("KeepMethodContainerUse does not take restrictions");
      if (!out->restrictions.items.empty())
        throw FilterError(node.name + " takes a single Restrictions group");
      out->restrictions = parse_restriction_group(child);
    }
    return out;
  }
  throw FilterError("unknown rule <" + node.name + ">");
}

}  // namespace

FilterSpec parse_filter(std::string_view document) {
  FilterSpec spec;
  std::string trimmed(document);
  if (trimmed.find_first_not_of(" \t\r\n") == std::string::npos) return spec;
  xml::Node root;
  try {
    root = xml::parse(document);
  } catch (const xml::XmlError& e) {
    throw FilterError(e.what());
  }
  if (root.name != "Filter") throw FilterError("filter document root must be <Filter>");
  for (const auto& child : root.children) spec.rules.push_back(parse_rule(child));
  return spec;
}

std::set<int> detect_loop_conditionals(const ir::ControlFlowGraph& cfg,
                                       const ir::MethodDecl& method) {
  // Tarjan strongly connected components; a conditional on a cycle has a
  // successor path returning to it
  const int n = int(cfg.nodes.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0, next_comp = 0;
  std::vector<int> comp_size;

  std::function<void(int)> strongconnect = [&](int v) {
    index[v] = low[v] = next_index++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : cfg.nodes[v].successors) {
      if (index[w] == -1) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      int size = 0;
      while (true) {
        int w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = next_comp;
        ++size;
        if (w == v) break;
      }
      comp_size.push_back(size);
      ++next_comp;
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] == -1) strongconnect(v);

  std::set<int> out;
  const auto& body = *method.body;
  for (int v = 0; v < n; ++v) {
    if (!body[v].is_conditional()) continue;
    bool self_loop = false;
    for (int w : cfg.nodes[v].successors) self_loop |= (w == v);
    if (self_loop || comp_size[comp[v]] > 1) out.insert(v);
  }
  return out;
}

namespace {

// defs of `local` in `method`, following plain copies
std::vector<const ir::Statement*> defs_of(const ir::MethodDecl& method, const std::string& local,
                                          std::set<std::string>& seen) {
  std::vector<const ir::Statement*> out;
  if (!seen.insert(local).second || !method.has_body()) return out;
  for (const auto& s : *method.body) {
    if (s.kind == ir::Statement::Kind::Assign && s.target == local) {
      if (s.expr.kind == ir::Expr::Kind::Local) {
        auto inner = defs_of(method, s.expr.local, seen);
        out.insert(out.end(), inner.begin(), inner.end());
      } else {
        out.push_back(&s);
      }
    } else if (s.kind == ir::Statement::Kind::Invoke && s.result && *s.result == local) {
      out.push_back(&s);
    }
  }
  return out;
}

bool eval_group(const RestrictionGroup& group, const Element& element,
                const ir::Program& program);

// does the operand at `position` of the element's call match the matcher
// (and, for method matchers, its nested restrictions)?
bool eval_value_used(const Restriction& r, const Element& element, const ir::Program& program) {
  if (element.kind != Element::Kind::MethodReturn) return false;
  const ir::MethodDecl* container = program.find_method(
      element.call_site.method.class_name, element.call_site.method.method_name,
      element.call_site.method.param_types.size());
  if (!container || !container->has_body()) return false;
  const auto& body = *container->body;
  if (element.call_site.stmt_index < 0 || element.call_site.stmt_index >= int(body.size()))
    return false;
  const ir::Statement& call = body[element.call_site.stmt_index];
  if (call.kind != ir::Statement::Kind::Invoke) return false;

  std::optional<ir::Operand> operand;
  if (r.position == -1) {
    if (!call.receiver) return false;
    operand = ir::Operand::of_local(*call.receiver);
  } else {
    if (std::size_t(r.position) >= call.args.size()) return false;
    operand = call.args[std::size_t(r.position)];
  }

  if (r.matcher_is_string) {
    if (operand->is_const) {
      return operand->constant.kind == ir::Constant::Kind::Str &&
             matchlang::matches(*r.string_matcher, operand->constant.str_value);
    }
    std::set<std::string> seen;
    for (const ir::Statement* def : defs_of(*container, operand->local, seen)) {
      if (def->kind == ir::Statement::Kind::Assign && def->expr.kind == ir::Expr::Kind::Const &&
          def->expr.constant.kind == ir::Constant::Kind::Str &&
          matchlang::matches(*r.string_matcher, def->expr.constant.str_value))
        return true;
    }
    return false;
  }

  // method matcher: the operand's value must come from a matching call
  if (operand->is_const) return false;
  std::set<std::string> seen;
  for (const ir::Statement* def : defs_of(*container, operand->local, seen)) {
    if (def->kind != ir::Statement::Kind::Invoke) continue;
    ir::MethodRef target = callgraph::declared_target(program, *def);
    if (!matchlang::matches(*r.method_matcher, target)) continue;
    if (!r.nested || r.nested->items.empty()) return true;
    Element inner;
    inner.kind = Element::Kind::MethodReturn;
    inner.method = target;
    inner.call_site =
        StmtRef{element.call_site.method, int(def - container->body->data())};
    inner.pure_chain = false;
    if (eval_group(*r.nested, inner, program)) return true;
  }
  return false;
}

bool eval_restriction(const Restriction& r, const Element& element, const ir::Program& program) {
  switch (r.kind) {
    case Restriction::Kind::InArithmeticChain:
      if (element.kind == Element::Kind::StringConst && !r.handle_constants) return false;
      return is_in_arithmetic_chain(element);
    case Restriction::Kind::ValueUsedInMethodCall: return eval_value_used(r, element, program);
    case Restriction::Kind::Group: return eval_group(*r.nested, element, program);
  }
  return false;
}

bool eval_group(const RestrictionGroup& group, const Element& element,
                const ir::Program& program) {
  if (group.items.empty()) return !group.use_union;
  if (group.use_union) {
    for (const auto& r : group.items)
      if (eval_restriction(r, element, program)) return true;
    return false;
  }
  for (const auto& r : group.items)
    if (!eval_restriction(r, element, program)) return false;
  return true;
}

bool eval_rule(const FilterNode& node, const ConditionalCandidate& candidate,
               const ir::Program& program) {
  switch (node.kind) {
    case FilterNode::Kind::And:
      for (const auto& c : node.children)
        if (!eval_rule(*c, candidate, program)) return false;
      return true;
    case FilterNode::Kind::Or:
      for (const auto& c : node.children)
        if (eval_rule(*c, candidate, program)) return true;
      return false;
    case FilterNode::Kind::Not: return !eval_rule(*node.children[0], candidate, program);
    case FilterNode::Kind::KeepMethodContainerUse:
      return matchlang::matches(*node.matcher, candidate.stmt.method);
    case FilterNode::Kind::KeepFieldValueUse:
      for (const auto& e : candidate.elements) {
        if (e.kind != Element::Kind::Field) continue;
        if (!matchlang::matches(*node.matcher, e.field)) continue;
        if (eval_group(node.restrictions, e, program)) return true;
      }
      return false;
    case FilterNode::Kind::KeepMethodReturnValueUse:
      for (const auto& e : candidate.elements) {
        if (e.kind != Element::Kind::MethodReturn) continue;
        if (!matchlang::matches(*node.matcher, e.method)) continue;
        if (eval_group(node.restrictions, e, program)) return true;
      }
      return false;
    case FilterNode::Kind::KeepStringUse:
      for (const auto& e : candidate.elements) {
        if (e.kind != Element::Kind::StringConst) continue;
        if (!matchlang::matches(*node.string_matcher, e.str_value)) continue;
        if (eval_group(node.restrictions, e, program)) return true;
      }
      return false;
  }
  return false;
}

}  // namespace

bool evaluate_filter(const FilterSpec& spec, const ConditionalCandidate& candidate,
                     const std::set<StmtRef>& loop_conditionals, const ir::Program& program) {
  if (loop_conditionals.count(candidate.stmt)) return false;
  if (candidate.in_context_query || candidate.cq_return_in_chain) return true;
  for (const auto& rule : spec.rules)
    if (eval_rule(*rule, candidate, program)) return true;
  return false;
}

}  // namespace authmine::cpfilter
