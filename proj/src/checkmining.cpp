#include "authmine/checkmining.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace authmine::checkmining {

namespace {

std::string method_key(const std::string& class_name, const std::string& name,
                       std::size_t nparams) {
  return class_name + "#" + name + "/" + std::to_string(nparams);
}

std::string method_key(const ir::MethodRef& m) {
  return method_key(m.class_name, m.method_name, m.param_types.size());
}

std::set<std::string> key_set(const std::set<ir::MethodRef>& methods) {
  std::set<std::string> out;
  for (const auto& m : methods) out.insert(method_key(m));
  return out;
}

bool keepable_type(const std::string& type_name) {
  std::string base = type_name;
  while (base.size() >= 2 && base.substr(base.size() - 2) == "[]")
    base = base.substr(0, base.size() - 2);
  return ir::is_primitive_or_string(base);
}

/// Node-method view of a call graph: declarations, CFGs, per-statement
/// expanded callees and reverse call-site index.
struct GraphIndex {
  struct MethodInfo {
    ir::MethodRef ref;
    const ir::MethodDecl* decl = nullptr;
    ir::ControlFlowGraph cfg;
    std::vector<std::vector<std::string>> callees;  // expanded callee signatures per stmt
    std::vector<bool> cut_continuation;             // a cut/bodiless target allows fallthrough
  };

  const ir::Program& program;
  const callgraph::CallGraph& graph;
  std::map<std::string, MethodInfo> methods;          // by signature
  std::map<std::string, std::vector<StmtRef>> sites_of;  // callee signature -> call sites

  GraphIndex(const ir::Program& p, const callgraph::CallGraph& g) : program(p), graph(g) {
    for (const auto& node : g.nodes) {
      const ir::MethodDecl* decl =
          p.find_method(node.class_name, node.method_name, node.param_types.size());
      if (!decl || !decl->has_body()) continue;
      MethodInfo info;
      info.ref = node;
      info.decl = decl;
      info.cfg = ir::build_cfg(*decl);
      info.callees.resize(decl->body->size());
      info.cut_continuation.assign(decl->body->size(), false);
      methods.emplace(node.signature(), std::move(info));
    }
    for (auto& [sig, info] : methods) {
      const auto& body = *info.decl->body;
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i].kind != ir::Statement::Kind::Invoke) continue;
        callgraph::CallSite site{sig, int(i)};
        auto it = g.edges.find(site);
        if (it == g.edges.end()) continue;
        for (const auto& target : it->second) {
          if (g.is_cut(target) || !g.is_node(target)) {
            info.cut_continuation[i] = true;
            continue;
          }
          std::string callee_sig = target.signature();
          if (!methods.count(callee_sig)) {
            info.cut_continuation[i] = true;
            continue;
          }
          info.callees[i].push_back(callee_sig);
          sites_of[callee_sig].push_back(StmtRef{info.ref, int(i)});
        }
      }
    }
  }

  const MethodInfo* find(const std::string& sig) const {
    auto it = methods.find(sig);
    return it == methods.end() ? nullptr : &it->second;
  }
};

/// Interprocedural reachability with returns continuing at call sites.
struct ReachAnalysis {
  const GraphIndex& idx;
  std::map<std::string, bool> can_return;             // method signature -> may return
  std::set<std::pair<std::string, int>> reachable;    // nodes reachable from the root

  explicit ReachAnalysis(const GraphIndex& index) : idx(index) {
    compute_can_return();
    compute_reachable();
  }

  bool node_reachable(const StmtRef& r) const {
    return reachable.count({r.method.signature(), r.stmt_index}) > 0;
  }

 private:
  bool callee_continues(const GraphIndex::MethodInfo& info, int i) const {
    if (info.cut_continuation[i]) return true;
    for (const auto& callee : info.callees[i])
      if (can_return.at(callee)) return true;
    return false;
  }

  void compute_can_return() {
    for (const auto& [sig, _] : idx.methods) can_return[sig] = false;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [sig, info] : idx.methods) {
        if (can_return[sig]) continue;
        if (reaches_return(info)) {
          can_return[sig] = true;
          changed = true;
        }
      }
    }
  }

  bool reaches_return(const GraphIndex::MethodInfo& info) const {
    const auto& body = *info.decl->body;
    if (body.empty()) return true;
    std::vector<char> state(body.size(), 0);  // 0 unvisited, 1 in progress/false
    std::function<bool(int)> visit = [&](int n) -> bool {
      if (state[n]) return false;
      state[n] = 1;
      const ir::Statement& s = body[n];
      if (s.kind == ir::Statement::Kind::Return) return true;
      if (s.kind == ir::Statement::Kind::Throw) return false;
      if (s.kind == ir::Statement::Kind::Invoke && !callee_continues(info, n)) return false;
      for (int succ : info.cfg.nodes[n].successors)
        if (visit(succ)) return true;
      return false;
    };
    return visit(0);
  }

  void compute_reachable() {
    std::string root_sig = idx.graph.root.signature();
    const GraphIndex::MethodInfo* root = idx.find(root_sig);
    if (!root || root->decl->body->empty()) return;
    std::deque<std::pair<std::string, int>> work{{root_sig, 0}};
    while (!work.empty()) {
      auto node = work.front();
      work.pop_front();
      if (!reachable.insert(node).second) continue;
      const GraphIndex::MethodInfo& info = *idx.find(node.first);
      const ir::Statement& s = (*info.decl->body)[node.second];
      if (s.kind == ir::Statement::Kind::Invoke) {
        for (const auto& callee : info.callees[node.second]) {
          const GraphIndex::MethodInfo& target = *idx.find(callee);
          if (!target.decl->body->empty()) work.push_back({callee, 0});
        }
        if (callee_continues(info, node.second))
          for (int succ : info.cfg.nodes[node.second].successors)
            work.push_back({node.first, succ});
      } else {
        for (int succ : info.cfg.nodes[node.second].successors)
          work.push_back({node.first, succ});
      }
    }
  }
};

/// From which nodes is some target statement still reachable, with call
/// edges descended and returns continued at every call site of the method.
struct TargetReach {
  const GraphIndex& idx;
  const ReachAnalysis& reach;
  std::set<std::pair<std::string, int>> target_nodes;
  std::map<std::string, bool> summary;  // target reachable inside the callee's frame
  std::map<std::string, std::vector<char>> local_hit;    // per node: target hit before frame pop
  std::map<std::string, std::vector<char>> can_exit;     // per node: method return reachable
  std::set<std::pair<std::string, int>> global_hit;

  TargetReach(const GraphIndex& index, const ReachAnalysis& r, const std::set<StmtRef>& targets)
      : idx(index), reach(r) {
    for (const auto& t : targets) target_nodes.insert({t.method.signature(), t.stmt_index});
    for (const auto& [sig, _] : idx.methods) summary[sig] = false;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [sig, info] : idx.methods) {
        compute_local(sig, info);
        bool entry_hit = !info.decl->body->empty() && local_hit[sig][0];
        if (entry_hit && !summary[sig]) {
          summary[sig] = true;
          changed = true;
        }
      }
    }
    for (const auto& [sig, info] : idx.methods) compute_local(sig, info);
    compute_global();
  }

  bool hits_target(const StmtRef& r) const {
    return global_hit.count({r.method.signature(), r.stmt_index}) > 0;
  }

 private:
  bool callee_continues(const GraphIndex::MethodInfo& info, int i) const {
    if (info.cut_continuation[i]) return true;
    for (const auto& callee : info.callees[i])
      if (reach.can_return.at(callee)) return true;
    return false;
  }

  void compute_local(const std::string& sig, const GraphIndex::MethodInfo& info) {
    const auto& body = *info.decl->body;
    auto& hit = local_hit[sig];
    auto& exit = can_exit[sig];
    hit.assign(body.size(), 0);
    exit.assign(body.size(), 0);
    // least fixpoints via DFS per node (bodies are small)
    for (std::size_t start = 0; start < body.size(); ++start) {
      hit[start] = dfs_hit(sig, info, int(start));
      exit[start] = dfs_exit(info, int(start));
    }
  }

  bool dfs_hit(const std::string& sig, const GraphIndex::MethodInfo& info, int start) const {
    const auto& body = *info.decl->body;
    std::vector<char> seen(body.size(), 0);
    std::function<bool(int)> visit = [&](int n) -> bool {
      if (seen[n]) return false;
      seen[n] = 1;
      if (target_nodes.count({sig, n})) return true;
      const ir::Statement& s = body[n];
      if (s.kind == ir::Statement::Kind::Invoke) {
        for (const auto& callee : info.callees[n])
          if (summary.at(callee)) return true;
        if (!callee_continues(info, n)) return false;
      }
      for (int succ : info.cfg.nodes[n].successors)
        if (visit(succ)) return true;
      return false;
    };
    return visit(start);
  }

  bool dfs_exit(const GraphIndex::MethodInfo& info, int start) const {
    const auto& body = *info.decl->body;
    std::vector<char> seen(body.size(), 0);
    std::function<bool(int)> visit = [&](int n) -> bool {
      if (seen[n]) return false;
      seen[n] = 1;
      const ir::Statement& s = body[n];
      if (s.kind == ir::Statement::Kind::Return) return true;
      if (s.kind == ir::Statement::Kind::Throw) return false;
      if (s.kind == ir::Statement::Kind::Invoke && !callee_continues(info, n)) return false;
      for (int succ : info.cfg.nodes[n].successors)
        if (visit(succ)) return true;
      return false;
    };
    return visit(start);
  }

  void compute_global() {
    for (const auto& [sig, info] : idx.methods) {
      const auto& hit = local_hit[sig];
      for (std::size_t i = 0; i < hit.size(); ++i)
        if (hit[i]) global_hit.insert({sig, int(i)});
    }
    // a node that can leave its frame also hits the target when some call
    // site's continuation does
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& [sig, info] : idx.methods) {
        auto sites_it = idx.sites_of.find(sig);
        if (sites_it == idx.sites_of.end()) continue;
        bool continuation_hits = false;
        for (const auto& site : sites_it->second) {
          const GraphIndex::MethodInfo* caller = idx.find(site.method.signature());
          if (!caller) continue;
          for (int succ : caller->cfg.nodes[site.stmt_index].successors)
            if (global_hit.count({site.method.signature(), succ})) continuation_hits = true;
        }
        if (!continuation_hits) continue;
        const auto& exit = can_exit[sig];
        for (std::size_t i = 0; i < exit.size(); ++i) {
          if (exit[i] && global_hit.insert({sig, int(i)}).second) changed = true;
        }
      }
    }
  }
};

std::vector<StmtRef> sorted_cq_sites(const GraphIndex& idx,
                                     const std::set<std::string>& cq_keys) {
  std::vector<StmtRef> out;
  for (const auto& [sig, info] : idx.methods) {
    const auto& body = *info.decl->body;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i].kind != ir::Statement::Kind::Invoke) continue;
      bool is_cq = cq_keys.count(
          method_key(callgraph::declared_target(idx.program, body[i])));
      if (!is_cq) {
        callgraph::CallSite site{sig, int(i)};
        auto it = idx.graph.edges.find(site);
        if (it != idx.graph.edges.end())
          for (const auto& target : it->second)
            if (cq_keys.count(method_key(target))) is_cq = true;
      }
      if (is_cq) out.push_back(StmtRef{info.ref, int(i)});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::set<StmtRef> find_security_throws(const callgraph::CallGraph& graph,
                                       const ir::Program& program, const MinerConfig& config) {
  std::set<std::string> matching_types{config.security_exception_type};
  if (program.find_class(config.security_exception_type)) {
    for (const auto& sub : ir::subtypes_of(program, config.security_exception_type))
      matching_types.insert(sub);
  }
  std::set<StmtRef> out;
  for (const auto& node : graph.nodes) {
    const ir::MethodDecl* decl =
        program.find_method(node.class_name, node.method_name, node.param_types.size());
    if (!decl || !decl->has_body()) continue;
    const auto& body = *decl->body;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i].kind == ir::Statement::Kind::Throw &&
          matching_types.count(body[i].exception_type))
        out.insert(StmtRef{node, int(i)});
    }
  }
  return out;
}

std::set<StmtRef> mark_backward_cps(const callgraph::CallGraph& graph, const ir::Program& program,
                                    const std::set<StmtRef>& targets) {
  GraphIndex idx(program, graph);
  ReachAnalysis reach(idx);
  TargetReach target_reach(idx, reach, targets);

  std::set<StmtRef> out;
  for (const auto& [sig, info] : idx.methods) {
    const auto& body = *info.decl->body;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (!body[i].is_conditional()) continue;
      StmtRef ref{info.ref, int(i)};
      if (!reach.node_reachable(ref)) continue;
      for (int succ : info.cfg.nodes[i].successors) {
        if (target_reach.hits_target(StmtRef{info.ref, succ})) {
          out.insert(ref);
          break;
        }
      }
    }
  }
  return out;
}

std::set<StmtRef> mark_cq_internal_cps(const callgraph::CallGraph& graph,
                                       const ir::Program& program,
                                       const std::set<ir::MethodRef>& context_queries) {
  GraphIndex idx(program, graph);
  std::set<std::string> cq_keys = key_set(context_queries);

  // context-query methods of the graph, closed over call edges
  std::deque<std::string> work;
  std::set<std::string> marked_methods;
  for (const auto& [sig, info] : idx.methods)
    if (cq_keys.count(method_key(info.ref))) work.push_back(sig);
  while (!work.empty()) {
    std::string sig = work.front();
    work.pop_front();
    if (!marked_methods.insert(sig).second) continue;
    const GraphIndex::MethodInfo* info = idx.find(sig);
    for (const auto& callees : info->callees)
      for (const auto& callee : callees) work.push_back(callee);
  }

  std::set<StmtRef> out;
  for (const auto& sig : marked_methods) {
    const GraphIndex::MethodInfo* info = idx.find(sig);
    const auto& body = *info->decl->body;
    for (std::size_t i = 0; i < body.size(); ++i)
      if (body[i].is_conditional()) out.insert(StmtRef{info->ref, int(i)});
  }
  return out;
}

namespace {

std::set<StmtRef> forward_taint(const GraphIndex& idx, const std::vector<StmtRef>& seeds) {
  std::set<std::pair<std::string, std::string>> tainted;  // (method signature, local)
  for (const auto& seed : seeds) {
    const GraphIndex::MethodInfo* info = idx.find(seed.method.signature());
    if (!info) continue;
    const ir::Statement& s = (*info->decl->body)[seed.stmt_index];
    if (s.kind == ir::Statement::Kind::Invoke && s.result)
      tainted.insert({seed.method.signature(), *s.result});
  }

  auto op_tainted = [&](const std::string& sig, const ir::Operand& o) {
    return !o.is_const && tainted.count({sig, o.local}) > 0;
  };

  std::set<StmtRef> marked;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [sig, info] : idx.methods) {
      const auto& body = *info.decl->body;
      for (std::size_t i = 0; i < body.size(); ++i) {
        const ir::Statement& s = body[i];
        switch (s.kind) {
          case ir::Statement::Kind::Assign: {
            bool flows = false;
            const ir::Expr& e = s.expr;
            switch (e.kind) {
              case ir::Expr::Kind::Local: flows = tainted.count({sig, e.local}); break;
              case ir::Expr::Kind::BinOp:
                flows = op_tainted(sig, e.lhs) || op_tainted(sig, e.rhs);
                break;
              case ir::Expr::Kind::UnOp: flows = op_tainted(sig, e.lhs); break;
              case ir::Expr::Kind::ArrayRead: flows = tainted.count({sig, e.local}); break;
              default: break;  // fields, casts and the rest are not tracked
            }
            if (flows && tainted.insert({sig, s.target}).second) changed = true;
            break;
          }
          case ir::Statement::Kind::ArrayWrite:
            if (op_tainted(sig, s.value) && tainted.insert({sig, s.target}).second)
              changed = true;
            break;
          case ir::Statement::Kind::Invoke: {
            for (const auto& callee_sig : info.callees[i]) {
              const GraphIndex::MethodInfo* callee = idx.find(callee_sig);
              if (!callee) continue;
              for (std::size_t k = 0; k < s.args.size(); ++k) {
                if (k >= callee->decl->params.size()) break;
                if (op_tainted(sig, s.args[k]) &&
                    tainted.insert({callee_sig, callee->decl->params[k].name}).second)
                  changed = true;
              }
              if (s.receiver && tainted.count({sig, *s.receiver}) &&
                  tainted.insert({callee_sig, "this"}).second)
                changed = true;
            }
            break;
          }
          case ir::Statement::Kind::If: {
            bool uses = op_tainted(sig, s.cond.lhs) ||
                        (!s.cond.negated && op_tainted(sig, s.cond.rhs));
            if (uses && marked.insert(StmtRef{info.ref, int(i)}).second) changed = true;
            break;
          }
          case ir::Statement::Kind::Switch:
            if (tainted.count({sig, s.switch_local}) &&
                marked.insert(StmtRef{info.ref, int(i)}).second)
              changed = true;
            break;
          default: break;
        }
      }
    }
  }
  return marked;
}

}  // namespace

std::set<StmtRef> forward_defuse_cq_returns(const callgraph::CallGraph& graph,
                                            const ir::Program& program,
                                            const std::set<ir::MethodRef>& context_queries) {
  GraphIndex idx(program, graph);
  return forward_taint(idx, sorted_cq_sites(idx, key_set(context_queries)));
}

std::set<StmtRef> forward_defuse_from_site(const callgraph::CallGraph& graph,
                                           const ir::Program& program, const StmtRef& site) {
  GraphIndex idx(program, graph);
  return forward_taint(idx, {site});
}

// --- value analysis ---------------------------------------------------------

ValueAnalysis::ValueAnalysis(const ir::Program& program, const callgraph::CallGraph& graph,
                             const MinerConfig& config)
    : program_(program), graph_(graph), config_(config) {
  for (const auto& node : graph.nodes) {
    const ir::MethodDecl* decl =
        program.find_method(node.class_name, node.method_name, node.param_types.size());
    if (!decl || !decl->has_body()) continue;
    node_by_signature_.emplace(node.signature(), node);
    const auto& body = *decl->body;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i].kind != ir::Statement::Kind::Invoke) continue;
      callgraph::CallSite site{node.signature(), int(i)};
      auto it = graph.edges.find(site);
      if (it == graph.edges.end()) continue;
      for (const auto& target : it->second) {
        if (!graph.is_node(target) || graph.is_cut(target)) continue;
        call_sites_of_[target.signature()].push_back(StmtRef{node, int(i)});
      }
    }
  }
}

ValueSet ValueAnalysis::operand_values(const ir::MethodRef& method, const ir::Operand& operand) {
  ValueSet out;
  if (operand.is_const) {
    out.add(MiningValue::of_constant(operand.constant));
    return out;
  }
  return local_values(method, operand.local);
}

ValueSet ValueAnalysis::local_values(const ir::MethodRef& method, const std::string& local) {
  std::pair<std::string, std::string> key{method.signature(), local};
  auto it = memo_.find(key);
  if (it != memo_.end()) return it->second;
  if (in_progress_.count(key)) {
    ValueSet all;
    all.add(MiningValue::all());  // cycle while resolving: the value may be anything
    return all;
  }
  in_progress_.insert(key);
  ValueSet result = compute_local(method, local);
  in_progress_.erase(key);
  memo_.emplace(std::move(key), result);
  return result;
}

ValueSet ValueAnalysis::invoke_values(const ir::MethodRef& method, const ir::Statement& invoke) {
  ValueSet out;
  // locate the statement index within the body for the edge lookup
  const ir::MethodDecl* decl =
      program_.find_method(method.class_name, method.method_name, method.param_types.size());
  std::vector<ir::MethodRef> targets;
  if (decl && decl->has_body()) {
    const auto& body = *decl->body;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (&body[i] == &invoke) {
        auto it = graph_.edges.find(callgraph::CallSite{method.signature(), int(i)});
        if (it != graph_.edges.end()) targets.assign(it->second.begin(), it->second.end());
        break;
      }
    }
  }
  if (targets.empty()) targets = callgraph::resolve_call_targets(program_, invoke);

  std::vector<std::shared_ptr<const ValueSet>> arg_sets;
  for (const auto& arg : invoke.args)
    arg_sets.push_back(std::make_shared<const ValueSet>(operand_values(method, arg)));
  std::shared_ptr<const ValueSet> receiver_set;
  if (invoke.receiver)
    receiver_set = std::make_shared<const ValueSet>(
        local_values(method, *invoke.receiver));

  for (const auto& target : targets) {
    if (config_.value_opaque_classes.count(target.class_name)) {
      out.add(MiningValue::all());  // data-carrier returns may be anything
      continue;
    }
    const ir::MethodDecl* target_decl =
        program_.find_method(target.class_name, target.method_name, target.param_types.size());
    if (target_decl && !keepable_type(target_decl->return_type)) {
      out.add(MiningValue::all());
      continue;
    }
    MiningValue v;
    v.kind = MiningValue::Kind::Method;
    v.method = target;
    v.method_args = arg_sets;
    v.method_receiver = receiver_set;
    out.add(std::move(v));
  }
  if (out.empty()) out.add(MiningValue::all());
  return out;
}

ValueSet ValueAnalysis::compute_local(const ir::MethodRef& method, const std::string& local) {
  ValueSet out;
  auto all = [&]() {
    ValueSet s;
    s.add(MiningValue::all());
    return s;
  };
  if (local == "this") return all();

  const ir::MethodDecl* decl =
      program_.find_method(method.class_name, method.method_name, method.param_types.size());
  if (!decl || !decl->has_body()) return all();

  // parameters: ALL at the entry point, call-site argument union elsewhere
  for (std::size_t k = 0; k < decl->params.size(); ++k) {
    if (decl->params[k].name != local) continue;
    if (!keepable_type(decl->params[k].type)) return all();
    if (method == graph_.root) return all();
    auto it = call_sites_of_.find(method.signature());
    if (it == call_sites_of_.end()) return all();
    for (const auto& site : it->second) {
      const ir::MethodDecl* caller = program_.find_method(
          site.method.class_name, site.method.method_name, site.method.param_types.size());
      if (!caller || !caller->has_body()) continue;
      const ir::Statement& call = (*caller->body)[site.stmt_index];
      if (k < call.args.size()) out.merge(operand_values(site.method, call.args[k]));
    }
    if (out.empty()) return all();
    return out;
  }

  for (const auto& s : *decl->body) {
    if (s.kind == ir::Statement::Kind::Invoke && s.result && *s.result == local) {
      out.merge(invoke_values(method, s));
      continue;
    }
    if (s.kind != ir::Statement::Kind::Assign || s.target != local) continue;
    const ir::Expr& e = s.expr;
    switch (e.kind) {
      case ir::Expr::Kind::Const:
        out.add(MiningValue::of_constant(e.constant));
        break;
      case ir::Expr::Kind::Local: out.merge(local_values(method, e.local)); break;
      case ir::Expr::Kind::FieldRead: {
        const ir::ClassDecl* holder = program_.find_class(e.field.class_name);
        const ir::FieldDecl* field = holder ? holder->find_field(e.field.field_name) : nullptr;
        if (field && !keepable_type(field->type))
          out.add(MiningValue::all());
        else
          out.add(MiningValue::of_field(e.field));
        break;
      }
      case ir::Expr::Kind::ArrayRead: {
        ValueSet base = local_values(method, e.local);
        ValueSet index = operand_values(method, e.index);
        if (base.contains_all() || index.contains_all()) {
          out.add(MiningValue::all());
          break;
        }
        bool wrapped = false;
        for (const auto& b : base.values()) {
          if (b.kind == MiningValue::Kind::Null) continue;
          out.add(MiningValue::of_array(b));
          wrapped = true;
        }
        if (!wrapped) out.add(MiningValue::all());
        break;
      }
      case ir::Expr::Kind::BinOp:
        out.merge(operand_values(method, e.lhs));
        out.merge(operand_values(method, e.rhs));
        break;
      case ir::Expr::Kind::UnOp: out.merge(operand_values(method, e.lhs)); break;
      case ir::Expr::Kind::Cast:
      case ir::Expr::Kind::New:
      case ir::Expr::Kind::LengthOf:
      case ir::Expr::Kind::InstanceOf:
        out.add(MiningValue::all());
        break;
    }
  }
  if (out.empty()) return all();
  return out;
}

// --- expansion ---------------------------------------------------------------

namespace {

const ir::Statement* statement_at(const ir::Program& program, const StmtRef& ref) {
  const ir::MethodDecl* decl = program.find_method(
      ref.method.class_name, ref.method.method_name, ref.method.param_types.size());
  if (!decl || !decl->has_body()) return nullptr;
  if (ref.stmt_index < 0 || std::size_t(ref.stmt_index) >= decl->body->size()) return nullptr;
  return &(*decl->body)[ref.stmt_index];
}

}  // namespace

std::vector<AuthorizationCheck> expand_conditional(ValueAnalysis& values,
                                                   const ir::Program& program,
                                                   const StmtRef& conditional) {
  std::vector<AuthorizationCheck> out;
  const ir::Statement* s = statement_at(program, conditional);
  if (!s) return out;
  if (s->kind == ir::Statement::Kind::If) {
    if (s->cond.negated) return out;  // single-operand conditions carry no pair
    ValueSet lhs = values.operand_values(conditional.method, s->cond.lhs);
    ValueSet rhs = values.operand_values(conditional.method, s->cond.rhs);
    AuthorizationCheck check;
    if (make_pair_check(lhs, rhs, check)) out.push_back(std::move(check));
    return out;
  }
  if (s->kind == ir::Statement::Kind::Switch) {
    if (s->cases.empty()) return out;
    ValueSet lhs = values.local_values(conditional.method, s->switch_local);
    ValueSet rhs;
    for (const auto& c : s->cases) rhs.add(MiningValue::of_constant(c.value));
    AuthorizationCheck check;
    if (make_pair_check(lhs, rhs, check)) out.push_back(std::move(check));
    return out;
  }
  return out;
}

AuthorizationCheck expand_invocation(ValueAnalysis& values, const ir::Program& program,
                                     const callgraph::CallGraph& graph, const StmtRef& site,
                                     bool expand_args) {
  const ir::Statement* s = statement_at(program, site);
  if (!s || s->kind != ir::Statement::Kind::Invoke)
    throw std::invalid_argument("expand_invocation requires an invoke statement");
  ir::MethodRef target = callgraph::declared_target(program, *s);
  std::vector<ValueSet> arg_sets;
  if (expand_args)
    for (const auto& arg : s->args)
      arg_sets.push_back(values.operand_values(site.method, arg));
  (void)graph;
  return make_invocation_check(target, expand_args, std::move(arg_sets));
}

bool is_context_query_site(const ir::Program& program, const callgraph::CallGraph& graph,
                           const StmtRef& site, const std::set<ir::MethodRef>& context_queries) {
  const ir::Statement* s = statement_at(program, site);
  if (!s || s->kind != ir::Statement::Kind::Invoke) return false;
  std::set<std::string> cq_keys = key_set(context_queries);
  if (cq_keys.count(method_key(callgraph::declared_target(program, *s)))) return true;
  auto it = graph.edges.find(callgraph::CallSite{site.method.signature(), site.stmt_index});
  if (it == graph.edges.end()) return false;
  for (const auto& target : it->second)
    if (cq_keys.count(method_key(target))) return true;
  return false;
}

// --- candidate construction ---------------------------------------------------

namespace {

struct ElementCollector {
  const GraphIndex& idx;
  std::map<std::tuple<int, std::string, std::string>, cpfilter::Element> elements;
  // (method signature, local) -> purity already explored: bit 1 impure, bit 2 pure
  std::map<std::pair<std::string, std::string>, int> visited;

  void add_element(cpfilter::Element e) {
    std::string id;
    switch (e.kind) {
      case cpfilter::Element::Kind::Field: id = e.field.qualified(); break;
      case cpfilter::Element::Kind::MethodReturn: id = e.method.signature(); break;
      case cpfilter::Element::Kind::StringConst: id = e.str_value; break;
    }
    std::string site = e.kind == cpfilter::Element::Kind::MethodReturn ? e.call_site.render()
                                                                       : std::string();
    auto key = std::make_tuple(int(e.kind), id, site);
    auto it = elements.find(key);
    if (it == elements.end())
      elements.emplace(key, std::move(e));
    else
      it->second.pure_chain = it->second.pure_chain || e.pure_chain;
  }

  void seed_operand(const ir::MethodRef& method, const ir::Operand& op, bool pure) {
    if (op.is_const) {
      if (op.constant.kind == ir::Constant::Kind::Str) {
        cpfilter::Element e;
        e.kind = cpfilter::Element::Kind::StringConst;
        e.str_value = op.constant.str_value;
        e.pure_chain = pure;
        add_element(std::move(e));
      }
      return;
    }
    walk(method, op.local, pure);
  }

  void walk(const ir::MethodRef& method, const std::string& local, bool pure) {
    auto key = std::make_pair(method.signature(), local);
    int mask = pure ? 2 : 1;
    if ((visited[key] & mask) != 0) return;
    visited[key] |= mask;

    const GraphIndex::MethodInfo* info = idx.find(method.signature());
    if (!info) return;
    const auto& body = *info->decl->body;

    // parameters: continue at call-site arguments; the call boundary breaks
    // the arithmetic chain
    for (std::size_t k = 0; k < info->decl->params.size(); ++k) {
      if (info->decl->params[k].name != local) continue;
      auto sites = idx.sites_of.find(method.signature());
      if (sites == idx.sites_of.end()) return;
      for (const auto& site : sites->second) {
        const GraphIndex::MethodInfo* caller = idx.find(site.method.signature());
        if (!caller) continue;
        const ir::Statement& call = (*caller->decl->body)[site.stmt_index];
        if (k < call.args.size()) seed_operand(site.method, call.args[k], false);
      }
      return;
    }

    for (std::size_t i = 0; i < body.size(); ++i) {
      const ir::Statement& s = body[i];
      if (s.kind == ir::Statement::Kind::Invoke && s.result && *s.result == local) {
        cpfilter::Element e;
        e.kind = cpfilter::Element::Kind::MethodReturn;
        e.method = callgraph::declared_target(idx.program, s);
        e.call_site = StmtRef{method, int(i)};
        e.pure_chain = pure;
        add_element(std::move(e));
        for (const auto& arg : s.args) seed_operand(method, arg, false);
        if (s.receiver) walk(method, *s.receiver, false);
        continue;
      }
      if (s.kind != ir::Statement::Kind::Assign || s.target != local) continue;
      const ir::Expr& e = s.expr;
      switch (e.kind) {
        case ir::Expr::Kind::Const:
          if (e.constant.kind == ir::Constant::Kind::Str) {
            cpfilter::Element el;
            el.kind = cpfilter::Element::Kind::StringConst;
            el.str_value = e.constant.str_value;
            el.pure_chain = pure;
            add_element(std::move(el));
          }
          break;
        case ir::Expr::Kind::Local: walk(method, e.local, pure); break;
        case ir::Expr::Kind::FieldRead: {
          cpfilter::Element el;
          el.kind = cpfilter::Element::Kind::Field;
          el.field = e.field;
          el.pure_chain = pure;
          add_element(std::move(el));
          break;
        }
        case ir::Expr::Kind::ArrayRead:
          walk(method, e.local, false);
          seed_operand(method, e.index, false);
          break;
        case ir::Expr::Kind::BinOp:
          seed_operand(method, e.lhs, pure);
          seed_operand(method, e.rhs, pure);
          break;
        case ir::Expr::Kind::UnOp: seed_operand(method, e.lhs, pure); break;
        default: break;  // casts, new, lengthof, instanceof end the walk
      }
    }
  }
};

ConditionalCandidate build_candidate(const GraphIndex& idx, const StmtRef& ref) {
  ConditionalCandidate candidate;
  candidate.stmt = ref;
  const GraphIndex::MethodInfo* info = idx.find(ref.method.signature());
  if (!info) return candidate;
  const ir::Statement& s = (*info->decl->body)[ref.stmt_index];

  ElementCollector collector{idx, {}, {}};
  if (s.kind == ir::Statement::Kind::If) {
    collector.seed_operand(ref.method, s.cond.lhs, true);
    if (!s.cond.negated) collector.seed_operand(ref.method, s.cond.rhs, true);
  } else if (s.kind == ir::Statement::Kind::Switch) {
    collector.walk(ref.method, s.switch_local, true);
  }
  for (auto& [_, element] : collector.elements) candidate.elements.push_back(element);
  return candidate;
}

}  // namespace

EntryPointAnalysis mine_entry_point(const ir::Program& program, const ir::MethodRef& entry,
                                    const std::set<ir::MethodRef>& context_queries,
                                    const cpfilter::FilterSpec& filter,
                                    const callgraph::ExcludeList& exclude,
                                    const std::set<ir::MethodRef>& all_entry_points,
                                    const MinerConfig& config) {
  EntryPointAnalysis result;
  result.graph = callgraph::build_cha_callgraph(program, entry, exclude, all_entry_points);
  const callgraph::CallGraph& graph = result.graph;
  GraphIndex idx(program, graph);
  std::set<std::string> cq_keys = key_set(context_queries);

  std::vector<StmtRef> cq_sites = sorted_cq_sites(idx, cq_keys);
  std::set<StmtRef> cq_site_set(cq_sites.begin(), cq_sites.end());

  std::set<StmtRef> targets = find_security_throws(graph, program, config);
  for (const auto& site : cq_sites) targets.insert(site);

  std::set<StmtRef> marked = mark_backward_cps(graph, program, targets);
  std::set<StmtRef> cq_internal = mark_cq_internal_cps(graph, program, context_queries);
  std::set<StmtRef> defuse_marked = forward_defuse_cq_returns(graph, program, context_queries);

  // methods whose conditionals count as inside a context query
  std::set<std::string> cq_method_sigs;
  for (const auto& ref : cq_internal) cq_method_sigs.insert(ref.method.signature());
  marked.insert(cq_internal.begin(), cq_internal.end());
  marked.insert(defuse_marked.begin(), defuse_marked.end());

  std::set<StmtRef> loop_conditionals;
  for (const auto& [sig, info] : idx.methods) {
    for (int i : cpfilter::detect_loop_conditionals(info.cfg, *info.decl))
      loop_conditionals.insert(StmtRef{info.ref, i});
  }

  ValueAnalysis values(program, graph, config);

  for (const auto& ref : marked) {
    ConditionalCandidate candidate = build_candidate(idx, ref);
    candidate.in_context_query = cq_method_sigs.count(ref.method.signature()) > 0;
    for (const auto& element : candidate.elements) {
      if (element.kind == cpfilter::Element::Kind::MethodReturn && element.pure_chain &&
          cq_site_set.count(element.call_site))
        candidate.cq_return_in_chain = true;
    }
    result.candidates.push_back(std::move(candidate));
  }

  result.check_set.entry_point = entry;
  for (const auto& candidate : result.candidates) {
    if (!cpfilter::evaluate_filter(filter, candidate, loop_conditionals, program)) continue;
    result.kept_conditionals.insert(candidate.stmt);
    for (const auto& check : expand_conditional(values, program, candidate.stmt))
      result.check_set.add(check,
                           CheckOrigin{candidate.stmt.method.signature(),
                                       candidate.stmt.stmt_index});
  }

  for (const auto& site : cq_sites) {
    const ir::Statement* s = statement_at(program, site);
    bool return_used =
        s && s->result && !forward_defuse_from_site(graph, program, site).empty();
    AuthorizationCheck check = expand_invocation(values, program, graph, site, !return_used);
    result.check_set.add(check, CheckOrigin{site.method.signature(), site.stmt_index});
  }

  return result;
}

}  // namespace authmine::checkmining
