#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

namespace oracles {

namespace ir = authmine::ir;
namespace cg = authmine::callgraph;
namespace cm = authmine::checkmining;

std::set<std::string> closure_subtypes(const ir::Program& program, const std::string& type_name) {
  // adjacency matrix closure over declared extends/implements edges
  std::vector<std::string> names;
  std::map<std::string, int> index;
  for (const auto& cls : program.classes) {
    index[cls.name] = int(names.size());
    names.push_back(cls.name);
  }
  int n = int(names.size());
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (const auto& cls : program.classes) {
    int sub = index.at(cls.name);
    reach[sub][sub] = true;
    if (cls.superclass && index.count(*cls.superclass))
      reach[index.at(*cls.superclass)][sub] = true;
    for (const auto& itf : cls.interfaces)
      if (index.count(itf)) reach[index.at(itf)][sub] = true;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  std::set<std::string> out;
  int root = index.at(type_name);
  for (int j = 0; j < n; ++j)
    if (reach[root][j]) out.insert(names[j]);
  return out;
}

ir::Program random_hierarchy(Rng& rng, int classes) {
  std::ostringstream src;
  for (int i = 0; i < classes; ++i) {
    bool interface = rng.chance(30);
    src << (interface ? "interface T" : "class T") << i;
    if (!interface && i > 0 && rng.chance(60)) {
      int super = rng.below(i);
      src << " extends T" << super;
    }
    std::vector<int> itfs;
    for (int j = 0; j < i && itfs.size() < 2; ++j)
      if (rng.chance(15)) itfs.push_back(j);
    if (!itfs.empty()) {
      src << " implements ";
      for (std::size_t k = 0; k < itfs.size(); ++k) {
        if (k) src << ", ";
        src << "T" << itfs[k];
      }
    }
    src << " external {\n}\n";
  }
  return ir::parse_program(src.str(), "<random-hierarchy>");
}

namespace {

// superclass chain extends/implements filtering happens in the program; here
// we just need the extends-only chain walk for dispatch
const ir::MethodDecl* dispatch_for_receiver(const ir::Program& program,
                                            const std::string& receiver_class,
                                            const std::string& name, std::size_t nargs,
                                            std::string* holder_out) {
  const ir::ClassDecl* cls = program.find_class(receiver_class);
  std::set<std::string> seen;
  while (cls && seen.insert(cls->name).second) {
    const ir::MethodDecl* m = cls->find_method(name, nargs);
    if (m) {
      *holder_out = cls->name;
      return m;
    }
    if (!cls->superclass) break;
    cls = program.find_class(*cls->superclass);
  }
  return nullptr;
}

}  // namespace

std::set<ir::MethodRef> dispatch_targets(const ir::Program& program,
                                         const ir::Statement& invoke) {
  std::set<ir::MethodRef> out;
  if (!program.find_class(invoke.callee_class)) return out;
  for (const auto& receiver : ir::subtypes_of(program, invoke.callee_class)) {
    const ir::ClassDecl* receiver_cls = program.find_class(receiver);
    if (!receiver_cls || receiver_cls->is_interface) continue;
    std::string holder;
    const ir::MethodDecl* m =
        dispatch_for_receiver(program, receiver, invoke.callee_name, invoke.args.size(), &holder);
    if (m) out.insert(program.ref_of(holder, *m));
  }
  return out;
}

ir::Program random_call_program(Rng& rng, int max_methods) {
  // a hierarchy of classes, each declaring method m0..m2, bodies call
  // virtually through random declared classes
  int classes = 2 + rng.below(5);
  int method_names = 1 + rng.below(3);
  std::ostringstream src;
  int methods = 0;
  std::vector<std::vector<int>> declared;
  declared.resize(std::size_t(classes));
  for (int c = 0; c < classes; ++c) {
    src << "class C" << c;
    if (c > 0 && rng.chance(70)) src << " extends C" << rng.below(c);
    src << " {\n";
    for (int m = 0; m < method_names && methods < max_methods; ++m) {
      if (c != 0 && !rng.chance(60)) continue;
      declared[std::size_t(c)].push_back(m);
      ++methods;
      src << "  method m" << m << "() -> void {\n";
      int calls = rng.below(3);
      for (int k = 0; k < calls; ++k)
        src << "    invoke virtual C" << rng.below(classes) << ".m" << rng.below(method_names)
            << "()\n";
      src << "    return\n  }\n";
    }
    src << "}\n";
  }
  return ir::parse_program(src.str(), "<random-calls>");
}

std::set<cm::StmtRef> path_enumeration_marked(const cg::CallGraph& graph,
                                              const ir::Program& program,
                                              const std::set<cm::StmtRef>& targets) {
  struct MethodView {
    ir::MethodRef ref;
    const ir::MethodDecl* decl;
    ir::ControlFlowGraph cfg;
  };
  std::map<std::string, MethodView> methods;
  for (const auto& node : graph.nodes) {
    const ir::MethodDecl* decl =
        program.find_method(node.class_name, node.method_name, node.param_types.size());
    if (!decl || !decl->has_body()) continue;
    methods.emplace(node.signature(), MethodView{node, decl, ir::build_cfg(*decl)});
  }

  std::set<std::pair<std::string, int>> target_nodes;
  for (const auto& t : targets) target_nodes.insert({t.method.signature(), t.stmt_index});

  // frame = (method signature, node); stack holds return continuations
  struct State {
    std::vector<std::pair<std::string, int>> stack;
    std::string sig;
    int node;
    std::vector<std::pair<std::string, int>> visited_conditionals;
  };

  std::set<cm::StmtRef> marked;
  // bounded DFS over (stack, node) states; the on-path set keys on the full
  // stack so matched call/return paths are explored exactly
  std::set<std::string> seen_states;
  std::function<void(std::vector<std::pair<std::string, int>>&, const std::string&, int,
                     std::vector<std::pair<std::string, int>>&)>
      go = [&](std::vector<std::pair<std::string, int>>& stack, const std::string& sig, int node,
               std::vector<std::pair<std::string, int>>& trail) {
        std::ostringstream key;
        for (const auto& [s, n] : stack) key << s << "@" << n << "|";
        key << sig << "@" << node;
        if (!seen_states.insert(key.str()).second) return;

        const MethodView& view = methods.at(sig);
        const ir::Statement& stmt = (*view.decl->body)[std::size_t(node)];

        if (target_nodes.count({sig, node})) {
          // every conditional already traversed on this path is marked
          for (const auto& [csig, cnode] : trail) {
            auto it = methods.find(csig);
            if (it != methods.end()) marked.insert(cm::StmtRef{it->second.ref, cnode});
          }
          // the path may continue; later targets can mark more conditionals
        }

        bool conditional = stmt.is_conditional();
        if (conditional) trail.push_back({sig, node});

        if (stmt.kind == ir::Statement::Kind::Invoke) {
          bool any_descend = false;
          cg::CallSite site{sig, node};
          auto edge = graph.edges.find(site);
          bool has_cut = false;
          if (edge != graph.edges.end()) {
            for (const auto& target : edge->second) {
              std::string tsig = target.signature();
              if (graph.is_cut(target) || !methods.count(tsig)) {
                has_cut = true;
                continue;
              }
              const MethodView& callee = methods.at(tsig);
              if (callee.decl->body->empty()) {
                has_cut = true;  // empty body returns immediately
                continue;
              }
              any_descend = true;
              stack.push_back({sig, node});
              go(stack, tsig, 0, trail);
              stack.pop_back();
            }
          } else {
            has_cut = true;
          }
          (void)any_descend;
          if (has_cut) {
            for (int succ : view.cfg.nodes[std::size_t(node)].successors)
              go(stack, sig, succ, trail);
          }
        } else if (stmt.kind == ir::Statement::Kind::Return) {
          if (!stack.empty()) {
            auto frame = stack.back();
            stack.pop_back();
            const MethodView& caller = methods.at(frame.first);
            for (int succ : caller.cfg.nodes[std::size_t(frame.second)].successors)
              go(stack, frame.first, succ, trail);
            stack.push_back(frame);
          }
        } else if (stmt.kind == ir::Statement::Kind::Throw) {
          // sink
        } else {
          for (int succ : view.cfg.nodes[std::size_t(node)].successors)
            go(stack, sig, succ, trail);
        }

        if (conditional) trail.pop_back();
        // allow re-exploration along other trails
        seen_states.erase(key.str());
      };

  std::string root_sig = graph.root.signature();
  if (methods.count(root_sig) && !methods.at(root_sig).decl->body->empty()) {
    std::vector<std::pair<std::string, int>> stack;
    std::vector<std::pair<std::string, int>> trail;
    go(stack, root_sig, 0, trail);
  }
  return marked;
}

std::set<int> dfs_loop_conditionals(const ir::ControlFlowGraph& cfg,
                                    const ir::MethodDecl& method) {
  std::set<int> out;
  const auto& body = *method.body;
  for (int c = 0; c < int(body.size()); ++c) {
    if (!body[std::size_t(c)].is_conditional()) continue;
    // DFS from successors looking for a path back to c
    std::vector<char> seen(cfg.nodes.size(), 0);
    std::function<bool(int)> reaches = [&](int n) -> bool {
      if (n == c) return true;
      if (seen[std::size_t(n)]) return false;
      seen[std::size_t(n)] = 1;
      for (int succ : cfg.nodes[std::size_t(n)].successors)
        if (reaches(succ)) return true;
      return false;
    };
    for (int succ : cfg.nodes[std::size_t(c)].successors) {
      if (reaches(succ)) {
        out.insert(c);
        break;
      }
    }
  }
  return out;
}

authmine::rulemine::TransactionDB random_db(Rng& rng, int max_items, int max_transactions) {
  int items = 1 + rng.below(max_items);
  int transactions = 1 + rng.below(max_transactions);
  std::vector<std::pair<std::string, std::vector<std::string>>> named;
  for (int t = 0; t < transactions; ++t) {
    std::vector<std::string> contents;
    for (int i = 0; i < items; ++i) {
      if (rng.chance(45)) {
        std::ostringstream item;
        item << "i" << i;
        contents.push_back(item.str());
      }
    }
    std::ostringstream name;
    name << "e" << t;
    named.emplace_back(name.str(), contents);
  }
  return authmine::rulemine::TransactionDB::from_raw(named);
}

}  // namespace oracles
