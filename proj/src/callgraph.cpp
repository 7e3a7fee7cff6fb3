#include "authmine/callgraph.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace authmine::callgraph {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// "a.b.C.m(t1,t2)" -> (class, name, params); throws on malformed input
std::tuple<std::string, std::string, std::vector<std::string>> parse_signature(
    const std::string& text) {
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ConfigError("malformed method signature: " + text);
  std::string qualified = text.substr(0, open);
  auto dot = qualified.rfind('.');
  if (dot == std::string::npos) throw ConfigError("malformed method signature: " + text);
  std::vector<std::string> params;
  std::string inner = text.substr(open + 1, close - open - 1);
  std::size_t start = 0;
  while (start < inner.size()) {
    auto comma = inner.find(',', start);
    std::string p =
        trim(inner.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!p.empty()) params.push_back(p);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return {qualified.substr(0, dot), qualified.substr(dot + 1), params};
}

bool signature_matches(const std::string& pattern, const ir::MethodRef& m) {
  auto [cls, name, params] = parse_signature(pattern);
  return cls == m.class_name && name == m.method_name && params == m.param_types;
}

// does `cls` transitively extend/implement `ancestor` (reflexive)?
bool derives_from(const ir::Program& program, const std::string& cls_name,
                  const std::string& ancestor, bool interfaces_too) {
  std::deque<std::string> work{cls_name};
  std::set<std::string> seen;
  while (!work.empty()) {
    std::string cur = work.front();
    work.pop_front();
    if (!seen.insert(cur).second) continue;
    if (cur == ancestor) return true;
    const ir::ClassDecl* cls = program.find_class(cur);
    if (!cls) continue;
    if (cls->superclass) work.push_back(*cls->superclass);
    if (interfaces_too)
      for (const auto& itf : cls->interfaces) work.push_back(itf);
  }
  return false;
}

}  // namespace

ExcludeList parse_exclude_list(std::string_view text) {
  ExcludeList out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw ConfigError("exclude list line " + std::to_string(lineno) +
                        ": expected '<procedure>: <pattern>'");
    std::string procedure = trim(line.substr(0, colon));
    std::string pattern = trim(line.substr(colon + 1));
    if (pattern.empty())
      throw ConfigError("exclude list line " + std::to_string(lineno) + ": empty pattern");
    if (procedure == "class_path")
      out.class_path.push_back(pattern);
    else if (procedure == "interface")
      out.interface.push_back(pattern);
    else if (procedure == "interface_all")
      out.interface_all.push_back(pattern);
    else if (procedure == "superclass")
      out.superclass.push_back(pattern);
    else if (procedure == "superclass_all")
      out.superclass_all.push_back(pattern);
    else if (procedure == "method_signature") {
      parse_signature(pattern);  // validate now
      out.method_signature.push_back(pattern);
    } else if (procedure == "override") {
      parse_signature(pattern);
      out.overrides.push_back(pattern);
    } else {
      throw ConfigError("exclude list line " + std::to_string(lineno) +
                        ": unknown procedure '" + procedure + "'");
    }
  }
  return out;
}

bool is_excluded(const ExcludeList& x, const ir::MethodRef& m, const ir::Program& program) {
  // override exemptions win over every procedure; an overriding method of an
  // exempted signature is exempt as well
  for (const auto& sig : x.overrides) {
    auto [cls, name, params] = parse_signature(sig);
    if (name != m.method_name || params != m.param_types) continue;
    if (cls == m.class_name || derives_from(program, m.class_name, cls, true)) return false;
  }

  for (const auto& pattern : x.class_path) {
    if (pattern == m.class_name) return true;
    if (pattern.size() >= 2) {
      std::string suffix = pattern.substr(pattern.size() - 2);
      std::string base = pattern.substr(0, pattern.size() - 2);
      if (suffix == ".*" && m.class_name.compare(0, base.size() + 1, base + ".") == 0) return true;
      if (suffix == "$*" &&
          (m.class_name == base || m.class_name.compare(0, base.size() + 1, base + "$") == 0))
        return true;
    }
  }
  // interface: m overrides a method declared in an exactly named interface
  for (const auto& itf_name : x.interface) {
    const ir::ClassDecl* itf = program.find_class(itf_name);
    if (!itf || !itf->is_interface) continue;
    if (!itf->find_method(m.method_name, m.param_types.size())) continue;
    if (derives_from(program, m.class_name, itf_name, true)) return true;
  }
  for (const auto& itf_name : x.interface_all) {
    if (derives_from(program, m.class_name, itf_name, true) && m.class_name != itf_name)
      return true;
    // the interface's own declarations are bodiless; still treat them as excluded
    if (m.class_name == itf_name) return true;
  }
  for (const auto& super_name : x.superclass) {
    const ir::ClassDecl* super = program.find_class(super_name);
    if (!super) continue;
    if (!super->find_method(m.method_name, m.param_types.size())) continue;
    if (m.class_name == super_name || derives_from(program, m.class_name, super_name, false))
      return true;
  }
  for (const auto& super_name : x.superclass_all) {
    if (derives_from(program, m.class_name, super_name, false)) return true;
  }
  for (const auto& sig : x.method_signature) {
    if (signature_matches(sig, m)) return true;
  }
  return false;
}

std::vector<ir::MethodRef> detect_entry_points(const ir::Program& program,
                                               const EntryPointConfig& cfg) {
  std::set<ir::MethodRef> out;

  if (!cfg.explicit_attribute.empty()) {
    for (const auto& cls : program.classes)
      for (const auto& m : cls.methods)
        if (m.has_attribute(cfg.explicit_attribute)) out.insert(program.ref_of(cls.name, m));
  }

  for (const auto& stub_base : cfg.stub_bases) {
    if (!program.find_class(stub_base)) continue;
    for (const auto& cls : program.classes) {
      if (!derives_from(program, cls.name, stub_base, false) || cls.name == stub_base) continue;
      const ir::MethodDecl* dispatch = nullptr;
      for (const auto& m : cls.methods)
        if (m.name == cfg.dispatch_method && m.has_body()) dispatch = &m;
      if (!dispatch) continue;
      // handler signatures: methods the dispatch body invokes on `this`
      std::set<std::pair<std::string, std::size_t>> handler_sigs;
      for (const auto& s : *dispatch->body) {
        if (s.kind != ir::Statement::Kind::Invoke) continue;
        if (s.invoke_kind == ir::InvokeKind::Static) continue;
        if (s.receiver && *s.receiver != "this") continue;
        handler_sigs.insert({s.callee_name, s.args.size()});
      }
      if (handler_sigs.empty()) continue;
      // concrete matching methods in this class and its subclasses
      for (const auto& sub_name : ir::subtypes_of(program, cls.name)) {
        const ir::ClassDecl* sub = program.find_class(sub_name);
        if (!sub) continue;
        for (const auto& m : sub->methods) {
          if (!m.has_body()) continue;
          if (handler_sigs.count({m.name, m.params.size()}))
            out.insert(program.ref_of(sub_name, m));
        }
      }
    }
  }

  return {out.begin(), out.end()};
}

std::string cut_reason_name(CutReason r) {
  switch (r) {
    case CutReason::Excluded: return "excluded";
    case CutReason::OtherEntrypoint: return "other_entrypoint";
    case CutReason::External: return "external";
  }
  return "external";
}

std::vector<ir::MethodRef> CallGraph::expanded_targets(const CallSite& site) const {
  std::vector<ir::MethodRef> out;
  auto it = edges.find(site);
  if (it == edges.end()) return out;
  for (const auto& t : it->second)
    if (is_node(t)) out.push_back(t);
  return out;
}

std::vector<ir::MethodRef> resolve_call_targets(const ir::Program& program,
                                                const ir::Statement& invoke) {
  std::set<ir::MethodRef> targets;
  const std::string& cls_name = invoke.callee_class;
  const std::string& name = invoke.callee_name;
  std::size_t nargs = invoke.args.size();

  if (invoke.invoke_kind != ir::InvokeKind::Virtual) {
    const ir::ClassDecl* holder = program.nearest_implementor(cls_name, name, nargs);
    if (holder && !holder->is_interface) {
      const ir::MethodDecl* m = holder->find_method(name, nargs);
      if (m) targets.insert(program.ref_of(holder->name, *m));
    }
  } else if (program.find_class(cls_name)) {
    for (const auto& sub_name : ir::subtypes_of(program, cls_name)) {
      const ir::ClassDecl* sub = program.find_class(sub_name);
      if (!sub || sub->is_interface) continue;
      const ir::MethodDecl* m = sub->find_method(name, nargs);
      if (m && m->has_body()) targets.insert(program.ref_of(sub_name, *m));
      if (m && !m->has_body() && sub->external) targets.insert(program.ref_of(sub_name, *m));
    }
    // receiver of exactly the declared type dispatches to the nearest
    // implementation above it when the class does not declare one; interface
    // declarations are not implementations
    const ir::ClassDecl* holder = program.nearest_implementor(cls_name, name, nargs);
    if (holder && !holder->is_interface) {
      const ir::MethodDecl* m = holder->find_method(name, nargs);
      if (m) targets.insert(program.ref_of(holder->name, *m));
    }
  }

  if (targets.empty()) {
    // unresolvable: keep the syntactic reference
    ir::MethodRef ref;
    ref.class_name = cls_name;
    ref.method_name = name;
    targets.insert(ref);
  }
  return {targets.begin(), targets.end()};
}

ir::MethodRef declared_target(const ir::Program& program, const ir::Statement& invoke) {
  const ir::ClassDecl* holder =
      program.nearest_implementor(invoke.callee_class, invoke.callee_name, invoke.args.size());
  if (holder) {
    const ir::MethodDecl* decl = holder->find_method(invoke.callee_name, invoke.args.size());
    if (decl) return program.ref_of(holder->name, *decl);
  }
  ir::MethodRef ref;
  ref.class_name = invoke.callee_class;
  ref.method_name = invoke.callee_name;
  ref.param_types.assign(invoke.args.size(), "?");
  return ref;
}

CallGraph build_cha_callgraph(const ir::Program& program, const ir::MethodRef& root,
                              const ExcludeList& exclude,
                              const std::set<ir::MethodRef>& all_entry_points) {
  const ir::MethodDecl* root_decl =
      program.find_method(root.class_name, root.method_name, root.param_types.size());
  if (!root_decl || !root_decl->has_body())
    throw std::invalid_argument("call graph root has no body: " + root.signature());

  CallGraph graph;
  graph.root = root;

  auto disposition = [&](const ir::MethodRef& m) -> std::optional<CutReason> {
    // entry-point calls are cut even when the callee is the root itself;
    // the root still participates as a node because it is the root
    if (all_entry_points.count(m)) return CutReason::OtherEntrypoint;
    if (is_excluded(exclude, m, program)) return CutReason::Excluded;
    const ir::MethodDecl* decl =
        program.find_method(m.class_name, m.method_name, m.param_types.size());
    if (!decl || !decl->has_body()) return CutReason::External;
    return std::nullopt;
  };

  std::deque<ir::MethodRef> work{root};
  std::set<ir::MethodRef> queued{root};
  while (!work.empty()) {
    ir::MethodRef cur = work.front();
    work.pop_front();
    graph.nodes.insert(cur);
    const ir::MethodDecl* decl =
        program.find_method(cur.class_name, cur.method_name, cur.param_types.size());
    if (!decl || !decl->has_body()) continue;
    const auto& body = *decl->body;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i].kind != ir::Statement::Kind::Invoke) continue;
      CallSite site{cur.signature(), int(i)};
      auto& edge_targets = graph.edges[site];
      for (const auto& target : resolve_call_targets(program, body[i])) {
        edge_targets.insert(target);
        auto cut = disposition(target);
        if (cut) {
          graph.cut_reasons.emplace(target, *cut);
        } else if (!queued.count(target)) {
          queued.insert(target);
          work.push_back(target);
        }
      }
    }
  }
  return graph;
}

}  // namespace authmine::callgraph
